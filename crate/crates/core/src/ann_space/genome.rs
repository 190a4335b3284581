use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Connection genes per genome.
pub const GENES: usize = 18;
/// Size of the full genotype space, 3^18.
pub const SPACE_SIZE: u64 = 387_420_489;

/// One ternary connection gene. The trit value is the base-3 digit used by
/// [`GenotypeId`]: neutral 0, inhibitory 1, excitatory 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Gene {
    #[default]
    Neutral,
    Inhibitory,
    Excitatory,
}

impl Gene {
    pub const ALL: [Gene; 3] = [Gene::Neutral, Gene::Inhibitory, Gene::Excitatory];

    pub fn weight(self) -> f64 {
        match self {
            Gene::Neutral => 0.0,
            Gene::Inhibitory => -1.0,
            Gene::Excitatory => 1.0,
        }
    }

    pub fn trit(self) -> u8 {
        match self {
            Gene::Neutral => 0,
            Gene::Inhibitory => 1,
            Gene::Excitatory => 2,
        }
    }

    pub fn from_trit(t: u8) -> Option<Gene> {
        Gene::ALL.get(t as usize).copied()
    }
}

/// Index of a genome in the full space: gene `i` is the base-3 digit of
/// weight `3^i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GenotypeId(u64);

impl GenotypeId {
    pub fn new(index: u64) -> Result<Self> {
        if index < SPACE_SIZE {
            Ok(GenotypeId(index))
        } else {
            Err(Error::invalid(format!("genotype id {index} is outside [0, 3^18)")))
        }
    }

    pub fn index(self) -> u64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FixedAnnGenome {
    pub genes: [Gene; GENES],
}

impl FixedAnnGenome {
    pub fn from_trits(trits: &[u8]) -> Result<Self> {
        if trits.len() != GENES {
            return Err(Error::invalid(format!(
                "genome needs {GENES} genes, got {}",
                trits.len()
            )));
        }
        let mut genes = [Gene::Neutral; GENES];
        for (g, &t) in genes.iter_mut().zip(trits) {
            *g = Gene::from_trit(t).ok_or_else(|| Error::invalid(format!("invalid trit {t}")))?;
        }
        Ok(FixedAnnGenome { genes })
    }

    pub fn weights(&self) -> [f64; GENES] {
        self.genes.map(Gene::weight)
    }
}

pub fn encode(genome: &FixedAnnGenome) -> GenotypeId {
    GenotypeId(
        genome
            .genes
            .iter()
            .rev()
            .fold(0u64, |acc, g| acc * 3 + g.trit() as u64),
    )
}

pub fn decode(id: u64) -> Result<FixedAnnGenome> {
    let mut rest = GenotypeId::new(id)?.0;
    let mut genes = [Gene::Neutral; GENES];
    for g in genes.iter_mut() {
        *g = Gene::ALL[(rest % 3) as usize];
        rest /= 3;
    }
    Ok(FixedAnnGenome { genes })
}

/// All genomes differing from `genome` in exactly one gene: 36 of them, in
/// gene order, each gene's two alternatives in trit order.
pub fn single_mutation_neighbors(genome: &FixedAnnGenome) -> Vec<FixedAnnGenome> {
    let mut out = Vec::with_capacity(2 * GENES);
    for i in 0..GENES {
        for alt in Gene::ALL {
            if alt != genome.genes[i] {
                let mut n = *genome;
                n.genes[i] = alt;
                out.push(n);
            }
        }
    }
    out
}

/// Which genes may vary; the rest are pinned to neutral.
///
/// Text form is 18 characters, gene 0 first: `*` for a free gene, `0` for a
/// gene pinned to neutral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GeneMask {
    free: [bool; GENES],
}

impl GeneMask {
    pub fn full() -> Self {
        GeneMask { free: [true; GENES] }
    }

    /// 12 free genes (3^12 = 531,441 genotypes): input→hidden, the hidden
    /// self-loops and hidden→output are free; hidden cross-connections and
    /// output recurrence are pinned.
    pub fn desk_default() -> Self {
        "*******00*****0000".parse().expect("valid mask")
    }

    pub fn from_free(free: [bool; GENES]) -> Self {
        GeneMask { free }
    }

    pub fn is_free(&self, gene: usize) -> bool {
        self.free[gene]
    }

    pub fn free_genes(&self) -> Vec<usize> {
        (0..GENES).filter(|&g| self.free[g]).collect()
    }

    pub fn free_count(&self) -> usize {
        self.free.iter().filter(|&&f| f).count()
    }

    pub fn admits(&self, genome: &FixedAnnGenome) -> bool {
        genome
            .genes
            .iter()
            .zip(&self.free)
            .all(|(g, &free)| free || *g == Gene::Neutral)
    }
}

impl Default for GeneMask {
    fn default() -> Self {
        Self::desk_default()
    }
}

impl fmt::Display for GeneMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &free in &self.free {
            f.write_str(if free { "*" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for GeneMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.trim().chars().collect();
        if chars.len() != GENES {
            return Err(Error::config(format!(
                "gene mask needs {GENES} characters, got {}",
                chars.len()
            )));
        }
        let mut free = [false; GENES];
        for (f, c) in free.iter_mut().zip(chars) {
            *f = match c {
                '*' => true,
                '0' => false,
                other => {
                    return Err(Error::config(format!(
                        "gene mask characters are `*` (free) or `0` (pinned), got `{other}`"
                    )))
                }
            };
        }
        Ok(GeneMask { free })
    }
}

impl Serialize for GeneMask {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GeneMask {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The 3^k genotypes admitted by a [`GeneMask`], indexed compactly: the j-th
/// free gene is the base-3 digit of weight `3^j` of the compact index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    mask: GeneMask,
    free: Vec<usize>,
    size: u64,
}

impl Subspace {
    pub fn new(mask: GeneMask) -> Self {
        let free = mask.free_genes();
        let size = 3u64.pow(free.len() as u32);
        Subspace { mask, free, size }
    }

    pub fn full() -> Self {
        Self::new(GeneMask::full())
    }

    pub fn mask(&self) -> GeneMask {
        self.mask
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn free_genes(&self) -> &[usize] {
        &self.free
    }

    /// Neighbors per genotype within the subspace, `2k`.
    pub fn degree(&self) -> usize {
        2 * self.free.len()
    }

    pub fn genome(&self, compact: u64) -> FixedAnnGenome {
        debug_assert!(compact < self.size);
        let mut genome = FixedAnnGenome::default();
        let mut rest = compact;
        for &g in &self.free {
            genome.genes[g] = Gene::ALL[(rest % 3) as usize];
            rest /= 3;
        }
        genome
    }

    pub fn compact_of(&self, genome: &FixedAnnGenome) -> Option<u64> {
        if !self.mask.admits(genome) {
            return None;
        }
        Some(
            self.free
                .iter()
                .rev()
                .fold(0u64, |acc, &g| acc * 3 + genome.genes[g].trit() as u64),
        )
    }

    pub fn compact_of_id(&self, id: GenotypeId) -> Option<u64> {
        self.compact_of(&decode(id.index()).ok()?)
    }

    pub fn id_of(&self, compact: u64) -> GenotypeId {
        encode(&self.genome(compact))
    }

    /// Compact indices of the `2k` single-mutation neighbors, in free-gene
    /// order with each gene's alternatives in trit order.
    #[inline]
    pub fn neighbors(&self, compact: u64, out: &mut Vec<u64>) {
        out.clear();
        let mut place = 1u64;
        let mut rest = compact;
        for _ in 0..self.free.len() {
            let t = rest % 3;
            let base = compact - t * place;
            for alt in 0..3 {
                if alt != t {
                    out.push(base + alt * place);
                }
            }
            rest /= 3;
            place *= 3;
        }
    }

    /// The `which`-th neighbor (`which < 2k`) in [`Subspace::neighbors`] order.
    #[inline]
    pub fn neighbor(&self, compact: u64, which: usize) -> u64 {
        let j = which / 2;
        let place = 3u64.pow(j as u32);
        let t = (compact / place) % 3;
        // alternatives of t in increasing order
        let alt = match (t, which % 2) {
            (0, 0) => 1,
            (0, _) => 2,
            (1, 0) => 0,
            (1, _) => 2,
            (_, 0) => 0,
            (_, _) => 1,
        };
        compact - t * place + alt * place
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn all_neutral_is_zero() {
        assert_eq!(encode(&FixedAnnGenome::default()).index(), 0);
    }

    #[test]
    fn excitatory_first_gene_is_two() {
        let mut g = FixedAnnGenome::default();
        g.genes[0] = Gene::Excitatory;
        assert_eq!(encode(&g).index(), 2);
        g.genes[1] = Gene::Inhibitory;
        assert_eq!(encode(&g).index(), 2 + 3);
    }

    #[test]
    fn decode_rejects_out_of_range() {
        assert!(decode(SPACE_SIZE).is_err());
        assert!(decode(SPACE_SIZE - 1).is_ok());
        assert_eq!(encode(&decode(SPACE_SIZE - 1).unwrap()).index(), SPACE_SIZE - 1);
    }

    #[test]
    fn mask_text_roundtrip() {
        let m = GeneMask::desk_default();
        assert_eq!(m.free_count(), 12);
        assert_eq!(m.to_string().parse::<GeneMask>().unwrap(), m);
        assert!("*****".parse::<GeneMask>().is_err());
        assert!("******************x".parse::<GeneMask>().is_err());
        assert!("*****************1".parse::<GeneMask>().is_err());
    }

    #[test]
    fn subspace_neighbor_order_matches_enumeration() {
        let s = Subspace::new(GeneMask::desk_default());
        let mut buf = Vec::new();
        for c in [0u64, 1, 2, 17, 531_440, 123_456] {
            s.neighbors(c, &mut buf);
            assert_eq!(buf.len(), 24);
            for (k, &n) in buf.iter().enumerate() {
                assert_eq!(s.neighbor(c, k), n);
            }
            // the subspace neighbor set is the full neighbor set restricted to the mask
            let g = s.genome(c);
            let mut full: Vec<u64> = single_mutation_neighbors(&g)
                .iter()
                .filter_map(|n| s.compact_of(n))
                .collect();
            let mut got = buf.clone();
            full.sort_unstable();
            got.sort_unstable();
            assert_eq!(full, got);
        }
    }

    proptest! {
        #[test]
        fn roundtrip(id in 0..SPACE_SIZE) {
            prop_assert_eq!(encode(&decode(id).unwrap()).index(), id);
        }

        #[test]
        fn neighbors_differ_in_one_gene(id in 0..SPACE_SIZE) {
            let g = decode(id).unwrap();
            let ns = single_mutation_neighbors(&g);
            prop_assert_eq!(ns.len(), 36);
            let mut ids: Vec<u64> = ns.iter().map(|n| encode(n).index()).collect();
            for n in &ns {
                let diff = n.genes.iter().zip(&g.genes).filter(|(a, b)| a != b).count();
                prop_assert_eq!(diff, 1);
                prop_assert!(single_mutation_neighbors(n).contains(&g));
            }
            ids.sort_unstable();
            ids.dedup();
            prop_assert_eq!(ids.len(), 36);
        }

        #[test]
        fn compact_roundtrip(c in 0u64..531_441) {
            let s = Subspace::new(GeneMask::desk_default());
            let g = s.genome(c);
            prop_assert!(s.mask().admits(&g));
            prop_assert_eq!(s.compact_of(&g), Some(c));
            prop_assert_eq!(s.compact_of_id(s.id_of(c)), Some(c));
        }
    }
}
