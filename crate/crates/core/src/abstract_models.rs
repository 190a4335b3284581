//! Abstract organisms: a niche on the integer lattice plus a heritable
//! probability of leaving it.
//!
//! Two population schemes are provided. [`step_drift`] keeps the population
//! size fixed and applies nothing but mutation. [`step_niched`] (and the
//! reusable [`NichedStepper`]) replaces every organism by
//! `offspring_per_parent` offspring and admits them at random into niches of
//! bounded capacity.

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::analysis::{Checkpoint, RunRecord, SnapshotStats};
use crate::error::{Error, Result};
use crate::niching::NicheReservoir;
use crate::seed::SimRng;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
pub struct NichePoint {
    pub x: i32,
    pub y: i32,
}

impl NichePoint {
    pub const ORIGIN: NichePoint = NichePoint { x: 0, y: 0 };

    pub fn new(x: i32, y: i32) -> Self {
        NichePoint { x, y }
    }

    /// One unit east, west, north or south for `dir` 0..4.
    pub fn shifted(self, dir: u64) -> Self {
        match dir & 3 {
            0 => NichePoint::new(self.x + 1, self.y),
            1 => NichePoint::new(self.x - 1, self.y),
            2 => NichePoint::new(self.x, self.y + 1),
            _ => NichePoint::new(self.x, self.y - 1),
        }
    }

    pub fn manhattan(self, other: NichePoint) -> u64 {
        (self.x as i64 - other.x as i64).unsigned_abs()
            + (self.y as i64 - other.y as i64).unsigned_abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbstractOrganism {
    pub niche: NichePoint,
    /// Per-generation probability that an offspring leaves the parent's niche.
    pub evolvability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReproductionMode {
    /// Every organism leaves exactly one offspring.
    #[default]
    IndependentLineages,
    /// Parents are drawn uniformly with replacement (Wright-Fisher style).
    Resampling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbstractVariant {
    Drift,
    Niched,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AbstractParams {
    pub init_evolvability: f64,
    pub evo_mut_prob: f64,
    pub evo_mut_halfwidth: f64,
    pub pop_size: usize,
    /// Defaults to 3,000 for drift and 1,000 for the niched variant.
    pub generations: Option<u64>,
    pub niche_capacity: usize,
    pub offspring_per_parent: usize,
    pub reproduction_mode: ReproductionMode,
    pub checkpoint_interval: u64,
}

impl Default for AbstractParams {
    fn default() -> Self {
        AbstractParams {
            init_evolvability: 0.05,
            evo_mut_prob: 0.01,
            evo_mut_halfwidth: 0.005,
            pop_size: 40_000,
            generations: None,
            niche_capacity: 5,
            offspring_per_parent: 2,
            reproduction_mode: ReproductionMode::IndependentLineages,
            checkpoint_interval: 10,
        }
    }
}

impl AbstractParams {
    pub fn generations_for(&self, variant: AbstractVariant) -> u64 {
        self.generations.unwrap_or(match variant {
            AbstractVariant::Drift => 3_000,
            AbstractVariant::Niched => 1_000,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be in [0, 1], got {v}")))
            }
        };
        prob("init_evolvability", self.init_evolvability)?;
        prob("evo_mut_prob", self.evo_mut_prob)?;
        if !(self.evo_mut_halfwidth >= 0.0 && self.evo_mut_halfwidth.is_finite()) {
            return Err(Error::config("evo_mut_halfwidth must be a finite value >= 0"));
        }
        for (name, v) in [
            ("pop_size", self.pop_size),
            ("niche_capacity", self.niche_capacity),
            ("offspring_per_parent", self.offspring_per_parent),
        ] {
            if v < 1 {
                return Err(Error::config(format!("{name} must be at least 1")));
            }
        }
        if self.pop_size > u32::MAX as usize {
            return Err(Error::config("pop_size too large"));
        }
        if self.checkpoint_interval < 1 {
            return Err(Error::config("checkpoint_interval must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub organisms: Vec<AbstractOrganism>,
    pub generation: u64,
}

/// Niche half of a reproduction: with probability `evolvability` the niche
/// moves one unit in a uniformly chosen cardinal direction.
///
/// Consumes exactly one 64-bit draw: the top 53 bits decide the move, the low
/// two bits pick the direction.
#[inline]
pub fn mutate_niche<R: Rng + ?Sized>(niche: NichePoint, evolvability: f64, rng: &mut R) -> NichePoint {
    let u: u64 = rng.random();
    let unit = (u >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    if unit < evolvability {
        niche.shifted(u)
    } else {
        niche
    }
}

/// Evolvability half of a reproduction: with probability `evo_mut_prob` add a
/// uniform draw from `[-halfwidth, halfwidth]`, clamped to `[0, 1]`.
#[inline]
pub fn mutate_evolvability<R: Rng + ?Sized>(
    evolvability: f64,
    params: &AbstractParams,
    rng: &mut R,
) -> f64 {
    if rng.random::<f64>() < params.evo_mut_prob {
        let h = params.evo_mut_halfwidth;
        let delta = if h > 0.0 { rng.random_range(-h..=h) } else { 0.0 };
        (evolvability + delta).clamp(0.0, 1.0)
    } else {
        evolvability
    }
}

/// Produces one offspring; the niche and evolvability mutations are
/// independent events.
#[inline]
pub fn mutate_abstract<R: Rng + ?Sized>(
    parent: &AbstractOrganism,
    params: &AbstractParams,
    rng: &mut R,
) -> AbstractOrganism {
    let niche = mutate_niche(parent.niche, parent.evolvability, rng);
    let evolvability = mutate_evolvability(parent.evolvability, params, rng);
    AbstractOrganism { niche, evolvability }
}

pub fn step_drift<R: Rng + ?Sized>(
    mut pop: Population,
    params: &AbstractParams,
    rng: &mut R,
) -> Population {
    match params.reproduction_mode {
        ReproductionMode::IndependentLineages => {
            for org in pop.organisms.iter_mut() {
                *org = mutate_abstract(org, params, rng);
            }
        }
        ReproductionMode::Resampling => {
            let n = pop.organisms.len();
            let next = (0..n)
                .map(|_| mutate_abstract(&pop.organisms[rng.random_range(0..n)], params, rng))
                .collect();
            pop.organisms = next;
        }
    }
    pop.generation += 1;
    pop
}

/// Dense window over part of the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LatticeWindow {
    x0: i32,
    y0: i32,
    width: usize,
    height: usize,
}

impl LatticeWindow {
    fn covering(min: NichePoint, max: NichePoint, margin: i32) -> Self {
        LatticeWindow {
            x0: min.x - margin,
            y0: min.y - margin,
            width: (max.x - min.x + 1 + 2 * margin) as usize,
            height: (max.y - min.y + 1 + 2 * margin) as usize,
        }
    }

    fn contains(&self, p: NichePoint) -> bool {
        p.x >= self.x0
            && p.y >= self.y0
            && ((p.x - self.x0) as usize) < self.width
            && ((p.y - self.y0) as usize) < self.height
    }

    fn cells(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    fn index(&self, p: NichePoint) -> usize {
        (p.y - self.y0) as usize * self.width + (p.x - self.x0) as usize
    }

    fn point(&self, index: usize) -> NichePoint {
        NichePoint::new(
            self.x0 + (index % self.width) as i32,
            self.y0 + (index / self.width) as i32,
        )
    }
}

fn bounding_box(orgs: &[AbstractOrganism]) -> Option<(NichePoint, NichePoint)> {
    let first = orgs.first()?.niche;
    Some(orgs.iter().fold((first, first), |(lo, hi), o| {
        (
            NichePoint::new(lo.x.min(o.niche.x), lo.y.min(o.niche.y)),
            NichePoint::new(hi.x.max(o.niche.x), hi.y.max(o.niche.y)),
        )
    }))
}

/// Generational replacement into limited-capacity niches, reusing its
/// buffers across generations.
#[derive(Debug)]
pub struct NichedStepper {
    window: LatticeWindow,
    reservoir: NicheReservoir<u32>,
}

impl NichedStepper {
    pub fn new(params: &AbstractParams) -> Self {
        NichedStepper {
            window: LatticeWindow {
                x0: 0,
                y0: 0,
                width: 0,
                height: 0,
            },
            reservoir: NicheReservoir::new(0, params.niche_capacity),
        }
    }

    pub fn step<R: Rng + ?Sized>(
        &mut self,
        pop: &Population,
        params: &AbstractParams,
        rng: &mut R,
    ) -> Population {
        let Some((lo, hi)) = bounding_box(&pop.organisms) else {
            return Population {
                organisms: Vec::new(),
                generation: pop.generation + 1,
            };
        };
        // offspring land at most one unit outside the parents' box
        let needed = LatticeWindow::covering(lo, hi, 1);
        let fits = self.window.contains(NichePoint::new(needed.x0, needed.y0))
            && self.window.contains(NichePoint::new(
                needed.x0 + needed.width as i32 - 1,
                needed.y0 + needed.height as i32 - 1,
            ));
        if !fits {
            let span = (hi.x - lo.x).max(hi.y - lo.y);
            self.window = LatticeWindow::covering(lo, hi, (span / 2).max(8));
            self.reservoir.reset(self.window.cells());
        } else {
            self.reservoir.clear();
        }

        for (i, parent) in pop.organisms.iter().enumerate() {
            for _ in 0..params.offspring_per_parent {
                let dest = mutate_niche(parent.niche, parent.evolvability, rng);
                self.reservoir.offer(self.window.index(dest), i as u32, rng);
            }
        }

        let mut organisms = Vec::with_capacity(self.reservoir.admitted_count());
        // row-major order keeps the next generation's parents spatially coherent
        for cell in self.reservoir.occupied_sorted() {
            let niche = self.window.point(cell);
            for &parent in self.reservoir.admitted(cell) {
                let evolvability =
                    mutate_evolvability(pop.organisms[parent as usize].evolvability, params, rng);
                organisms.push(AbstractOrganism {
                    niche,
                    evolvability,
                });
            }
        }
        Population {
            organisms,
            generation: pop.generation + 1,
        }
    }
}

/// One niched generation with fresh buffers; see [`NichedStepper`] for
/// repeated stepping.
pub fn step_niched<R: Rng + ?Sized>(
    pop: &Population,
    params: &AbstractParams,
    rng: &mut R,
) -> Population {
    NichedStepper::new(params).step(pop, params, rng)
}

/// Population statistics with niches accumulated over a dense bounding box.
pub fn lattice_stats(orgs: &[AbstractOrganism]) -> Result<SnapshotStats> {
    let (lo, hi) =
        bounding_box(orgs).ok_or_else(|| Error::invalid("statistics of an empty population"))?;
    let window = LatticeWindow::covering(lo, hi, 0);
    let mut sums = vec![0.0; window.cells()];
    let mut counts = vec![0u64; window.cells()];
    let mut total = 0.0;
    for o in orgs {
        let i = window.index(o.niche);
        sums[i] += o.evolvability;
        counts[i] += 1;
        total += o.evolvability;
    }
    SnapshotStats::from_accumulators(&sums, &counts, total, orgs.len() as u64)
}

#[derive(Debug, Clone)]
pub struct AbstractRun {
    pub record: RunRecord,
    pub population: Population,
}

pub fn initial_population(params: &AbstractParams, variant: AbstractVariant) -> Population {
    let founder = AbstractOrganism {
        niche: NichePoint::ORIGIN,
        evolvability: params.init_evolvability,
    };
    let n = match variant {
        AbstractVariant::Drift => params.pop_size,
        AbstractVariant::Niched => 1,
    };
    Population {
        organisms: vec![founder; n],
        generation: 0,
    }
}

pub fn run_abstract(
    params: &AbstractParams,
    variant: AbstractVariant,
    seed: u64,
) -> Result<AbstractRun> {
    params.validate()?;
    let mut rng = SimRng::seed_from_u64(seed);
    let generations = params.generations_for(variant);
    let mut pop = initial_population(params, variant);
    let mut cumulative = pop.organisms.len() as u64;
    let mut record = RunRecord::new();
    record.push(Checkpoint::new(0, cumulative, lattice_stats(&pop.organisms)?));

    let mut stepper = NichedStepper::new(params);
    for g in 1..=generations {
        pop = match variant {
            AbstractVariant::Drift => {
                cumulative += pop.organisms.len() as u64;
                step_drift(pop, params, &mut rng)
            }
            AbstractVariant::Niched => {
                cumulative += (pop.organisms.len() * params.offspring_per_parent) as u64;
                stepper.step(&pop, params, &mut rng)
            }
        };
        if g % params.checkpoint_interval == 0 || g == generations {
            record.push(Checkpoint::new(g, cumulative, lattice_stats(&pop.organisms)?));
        }
    }
    Ok(AbstractRun {
        record,
        population: pop,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::seed::seed_stream;

    fn org(x: i32, y: i32, e: f64) -> AbstractOrganism {
        AbstractOrganism {
            niche: NichePoint::new(x, y),
            evolvability: e,
        }
    }

    fn max_occupancy(orgs: &[AbstractOrganism]) -> usize {
        let mut counts: HashMap<NichePoint, usize> = HashMap::new();
        for o in orgs {
            *counts.entry(o.niche).or_default() += 1;
        }
        counts.values().copied().max().unwrap_or(0)
    }

    #[test]
    fn zero_evolvability_never_moves() {
        let mut rng = seed_stream(1, 0);
        let params = AbstractParams {
            evo_mut_prob: 0.0,
            ..Default::default()
        };
        let parent = org(3, -4, 0.0);
        for _ in 0..10_000 {
            assert_eq!(mutate_abstract(&parent, &params, &mut rng).niche, parent.niche);
        }
    }

    #[test]
    fn full_evolvability_always_moves_one_unit() {
        let mut rng = seed_stream(2, 0);
        let params = AbstractParams::default();
        let parent = org(0, 0, 1.0);
        let mut dirs = [0u32; 4];
        for _ in 0..10_000 {
            let child = mutate_abstract(&parent, &params, &mut rng);
            assert_eq!(child.niche.manhattan(parent.niche), 1);
            let d = match (child.niche.x, child.niche.y) {
                (1, 0) => 0,
                (-1, 0) => 1,
                (0, 1) => 2,
                _ => 3,
            };
            dirs[d] += 1;
        }
        assert!(dirs.iter().all(|&c| c > 2_300), "{dirs:?}");
    }

    #[test]
    fn move_frequency_within_binomial_interval() {
        // Central 99.99% interval of Binomial(10^6, 0.05): scipy.stats.binom.ppf
        // at 0.00005 and 0.99995 gives [49154, 50850].
        let mut rng = seed_stream(3, 0);
        let params = AbstractParams::default();
        let parent = org(0, 0, 0.05);
        let moved = (0..1_000_000)
            .filter(|_| mutate_abstract(&parent, &params, &mut rng).niche != parent.niche)
            .count();
        assert!((49_154..=50_850).contains(&moved), "moved {moved}");
    }

    #[test]
    fn evolvability_stays_clamped() {
        let mut rng = seed_stream(4, 0);
        let params = AbstractParams {
            evo_mut_prob: 1.0,
            evo_mut_halfwidth: 0.5,
            ..Default::default()
        };
        let mut e = 0.01;
        for _ in 0..10_000 {
            e = mutate_evolvability(e, &params, &mut rng);
            assert!((0.0..=1.0).contains(&e));
        }
        let mut lo = 0.0;
        let mut hi = 1.0;
        for _ in 0..1000 {
            lo = mutate_evolvability(lo, &params, &mut rng);
            hi = mutate_evolvability(hi, &params, &mut rng);
            assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        }
    }

    #[test]
    fn drift_preserves_size() {
        let mut rng = seed_stream(5, 0);
        let params = AbstractParams::default();
        for mode in [ReproductionMode::IndependentLineages, ReproductionMode::Resampling] {
            let params = AbstractParams {
                reproduction_mode: mode,
                ..params.clone()
            };
            let mut pop = Population {
                organisms: vec![org(0, 0, 0.3), org(1, 0, 0.2), org(5, 5, 0.9)],
                generation: 0,
            };
            for _ in 0..50 {
                pop = step_drift(pop, &params, &mut rng);
                assert_eq!(pop.organisms.len(), 3);
            }
            assert_eq!(pop.generation, 50);
        }
    }

    #[test]
    fn frozen_drift_is_identity() {
        let mut rng = seed_stream(6, 0);
        let params = AbstractParams {
            evo_mut_prob: 0.0,
            ..Default::default()
        };
        let pop = Population {
            organisms: vec![org(0, 0, 0.0); 100],
            generation: 7,
        };
        let next = step_drift(pop.clone(), &params, &mut rng);
        assert_eq!(next.organisms, pop.organisms);
        assert_eq!(next.generation, 8);
    }

    #[test]
    fn founder_growth_caps_at_capacity() {
        // Hand simulation with capacity 5, 2 offspring each, frozen niche:
        // 1 -> 2 -> 4 -> min(8, 5) = 5 -> min(10, 5) = 5.
        let mut rng = seed_stream(7, 0);
        let params = AbstractParams {
            evo_mut_prob: 0.0,
            ..Default::default()
        };
        let mut pop = Population {
            organisms: vec![org(0, 0, 0.0)],
            generation: 0,
        };
        let mut sizes = vec![pop.organisms.len()];
        let mut stepper = NichedStepper::new(&params);
        for _ in 0..5 {
            pop = stepper.step(&pop, &params, &mut rng);
            sizes.push(pop.organisms.len());
        }
        assert_eq!(sizes, vec![1, 2, 4, 5, 5, 5]);
    }

    #[test]
    fn capacity_one_single_niche() {
        let mut rng = seed_stream(8, 0);
        let params = AbstractParams {
            niche_capacity: 1,
            evo_mut_prob: 0.0,
            ..Default::default()
        };
        let pop = Population {
            organisms: vec![org(2, 2, 0.0); 40],
            generation: 0,
        };
        let next = step_niched(&pop, &params, &mut rng);
        assert_eq!(next.organisms.len(), 1);
    }

    #[test]
    fn niched_capacity_holds_every_generation() {
        let mut rng = seed_stream(9, 0);
        let params = AbstractParams {
            init_evolvability: 0.4,
            ..Default::default()
        };
        let mut pop = initial_population(&params, AbstractVariant::Niched);
        let mut stepper = NichedStepper::new(&params);
        let mut ever: std::collections::HashSet<NichePoint> = Default::default();
        for _ in 0..120 {
            pop = stepper.step(&pop, &params, &mut rng);
            assert!(max_occupancy(&pop.organisms) <= 5);
            ever.extend(pop.organisms.iter().map(|o| o.niche));
            assert!(pop.organisms.len() <= 5 * ever.len());
        }
        assert!(pop.organisms.len() > 100);
    }

    #[test]
    fn zero_generations_records_initial_state() {
        let params = AbstractParams {
            pop_size: 10,
            generations: Some(0),
            ..Default::default()
        };
        let run = run_abstract(&params, AbstractVariant::Drift, 1).unwrap();
        assert_eq!(run.record.len(), 1);
        let row = run.record.first().unwrap();
        assert_eq!(row.checkpoint, 0);
        assert_eq!(row.pop_size, 10);
        assert!((row.pop_mean_evolvability - 0.05).abs() < 1e-15);
        assert_eq!(row.occupied_niches, 1);
    }

    #[test]
    fn runs_are_deterministic() {
        let params = AbstractParams {
            pop_size: 500,
            generations: Some(200),
            ..Default::default()
        };
        for variant in [AbstractVariant::Drift, AbstractVariant::Niched] {
            let a = run_abstract(&params, variant, 77).unwrap();
            let b = run_abstract(&params, variant, 77).unwrap();
            assert_eq!(a.record.to_csv_string(), b.record.to_csv_string());
            assert_eq!(a.population, b.population);
        }
    }

    #[test]
    fn checkpoint_schedule() {
        let params = AbstractParams {
            pop_size: 10,
            generations: Some(25),
            ..Default::default()
        };
        let run = run_abstract(&params, AbstractVariant::Drift, 1).unwrap();
        assert_eq!(run.record.schedule(), vec![0, 10, 20, 25]);
        assert_eq!(run.record.last().unwrap().cumulative_individuals, 10 * 26);
    }

    #[test]
    fn invalid_params_rejected() {
        let bad = [
            AbstractParams {
                init_evolvability: 1.5,
                ..Default::default()
            },
            AbstractParams {
                evo_mut_halfwidth: -0.1,
                ..Default::default()
            },
            AbstractParams {
                pop_size: 0,
                ..Default::default()
            },
            AbstractParams {
                niche_capacity: 0,
                ..Default::default()
            },
        ];
        for p in bad {
            assert!(matches!(
                run_abstract(&p, AbstractVariant::Drift, 0),
                Err(Error::Config(_))
            ));
        }
    }

    #[test]
    fn lattice_stats_match_generic_per_niche_mean() {
        let mut rng = seed_stream(10, 0);
        let orgs: Vec<_> = (0..500)
            .map(|_| org(rng.random_range(-5..5), rng.random_range(-3..7), rng.random()))
            .collect();
        let fast = lattice_stats(&orgs).unwrap();
        let slow = crate::analysis::per_niche_mean(orgs.iter().map(|o| (o.niche, o.evolvability)))
            .unwrap();
        assert!((fast.niche_mean - slow).abs() < 1e-12);
    }
}
