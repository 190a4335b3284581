//! Limited-capacity admission shared by every niched model.
//!
//! Offspring are offered one at a time in production order. Each niche keeps a
//! reservoir of at most `capacity` entries (Algorithm R), so the set admitted
//! to a niche is a uniformly random subset of its arrivals of size
//! `min(capacity, arrivals)`. That is the same distribution as shuffling the
//! whole generation uniformly and admitting in shuffled order while the niche
//! has room, without materializing the shuffle.

use rand::Rng;

#[derive(Debug, Clone)]
pub struct NicheReservoir<T> {
    capacity: usize,
    arrivals: Vec<u32>,
    slots: Vec<T>,
    touched: Vec<usize>,
}

impl<T: Copy + Default> NicheReservoir<T> {
    pub fn new(niches: usize, capacity: usize) -> Self {
        assert!(capacity >= 1, "niche capacity must be at least 1");
        NicheReservoir {
            capacity,
            arrivals: vec![0; niches],
            slots: vec![T::default(); niches * capacity],
            touched: Vec::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn niches(&self) -> usize {
        self.arrivals.len()
    }

    /// Resizes to `niches` slots and forgets all arrivals.
    pub fn reset(&mut self, niches: usize) {
        if niches != self.arrivals.len() {
            self.arrivals = vec![0; niches];
            self.slots = vec![T::default(); niches * self.capacity];
            self.touched.clear();
        } else {
            self.clear();
        }
    }

    pub fn clear(&mut self) {
        for &n in &self.touched {
            self.arrivals[n] = 0;
        }
        self.touched.clear();
    }

    pub fn offer<R: Rng + ?Sized>(&mut self, niche: usize, item: T, rng: &mut R) {
        let seen = self.arrivals[niche] as usize;
        if seen == 0 {
            self.touched.push(niche);
        }
        let base = niche * self.capacity;
        if seen < self.capacity {
            self.slots[base + seen] = item;
        } else {
            let j = rng.random_range(0..=seen);
            if j < self.capacity {
                self.slots[base + j] = item;
            }
        }
        self.arrivals[niche] += 1;
    }

    /// Arrivals offered to `niche` since the last reset.
    pub fn arrivals(&self, niche: usize) -> usize {
        self.arrivals[niche] as usize
    }

    pub fn admitted(&self, niche: usize) -> &[T] {
        let kept = (self.arrivals[niche] as usize).min(self.capacity);
        let base = niche * self.capacity;
        &self.slots[base..base + kept]
    }

    /// Niches with at least one arrival, in order of first arrival.
    pub fn occupied(&self) -> &[usize] {
        &self.touched
    }

    /// Niches with at least one arrival, in increasing index order.
    pub fn occupied_sorted(&self) -> impl Iterator<Item = usize> + '_ {
        self.arrivals
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0)
            .map(|(i, _)| i)
    }

    pub fn admitted_count(&self) -> usize {
        self.touched.iter().map(|&n| self.admitted(n).len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::seed_stream;

    #[test]
    fn under_capacity_keeps_everything_in_order() {
        let mut rng = seed_stream(1, 0);
        let mut res = NicheReservoir::<u32>::new(4, 5);
        for i in 0..3 {
            res.offer(2, i, &mut rng);
        }
        assert_eq!(res.admitted(2), &[0, 1, 2]);
        assert_eq!(res.occupied(), &[2]);
        assert_eq!(res.admitted_count(), 3);
    }

    #[test]
    fn capacity_one_admits_exactly_one() {
        let mut rng = seed_stream(1, 0);
        let mut res = NicheReservoir::<u32>::new(1, 1);
        for i in 0..100 {
            res.offer(0, i, &mut rng);
        }
        assert_eq!(res.admitted(0).len(), 1);
        assert_eq!(res.arrivals(0), 100);
    }

    #[test]
    fn clear_forgets_arrivals() {
        let mut rng = seed_stream(1, 0);
        let mut res = NicheReservoir::<u32>::new(3, 2);
        res.offer(0, 1, &mut rng);
        res.offer(1, 1, &mut rng);
        res.clear();
        assert!(res.occupied().is_empty());
        assert_eq!(res.admitted(0).len(), 0);
    }

    #[test]
    fn admitted_subset_is_uniform() {
        // 10 arrivals, capacity 3: each arrival admitted with probability 3/10.
        // Chi-square over the 10 inclusion counts, df = 9; 99.9% critical 27.88.
        let mut rng = seed_stream(99, 0);
        let mut res = NicheReservoir::<u32>::new(1, 3);
        let trials = 20_000;
        let mut hits = [0u32; 10];
        for _ in 0..trials {
            res.clear();
            for i in 0..10 {
                res.offer(0, i, &mut rng);
            }
            for &k in res.admitted(0) {
                hits[k as usize] += 1;
            }
        }
        let expected = trials as f64 * 0.3;
        let chi2: f64 = hits
            .iter()
            .map(|&h| (h as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 27.88, "chi2 {chi2} hits {hits:?}");
    }
}
