use std::collections::HashMap;
use std::ops::Range;

use rand::Rng;
use rayon::prelude::*;

use super::genome::{FixedAnnGenome, Subspace};
use super::network::FixedAnnController;
use crate::analysis::{pearson, Correlation};
use crate::error::{Error, Result};
use crate::maze::{evaluate_controller, Maze, RobotParams, GRID_CELLS};

/// Tabulated behavior of one genotype.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct LookupRecord {
    /// Behavioral niche cell id in [0, 400).
    pub niche: u16,
    /// Distinct niches among the genotype's single-mutation neighbors.
    pub evolvability: u8,
}

/// Everything needed to turn a fixed-topology genome into a behavioral niche.
#[derive(Debug, Clone)]
pub struct GenotypeEvaluator {
    maze: Maze,
    robot: RobotParams,
    steepness: f64,
}

impl GenotypeEvaluator {
    pub fn new(maze: Maze, robot: RobotParams, steepness: f64) -> Result<Self> {
        robot.validate()?;
        if robot.sensor_angles.len() != super::network::INPUTS {
            return Err(Error::config(format!(
                "fixed-topology robots use {} sensors, got {}",
                super::network::INPUTS,
                robot.sensor_angles.len()
            )));
        }
        if !steepness.is_finite() {
            return Err(Error::config("sigmoid steepness must be finite"));
        }
        Ok(GenotypeEvaluator {
            maze,
            robot,
            steepness,
        })
    }

    pub fn maze(&self) -> &Maze {
        &self.maze
    }

    pub fn robot(&self) -> &RobotParams {
        &self.robot
    }

    pub fn steepness(&self) -> f64 {
        self.steepness
    }

    pub fn niche(&self, genome: &FixedAnnGenome) -> u16 {
        let mut controller = FixedAnnController::new(genome, self.steepness);
        evaluate_controller(&self.maze, &mut controller, &self.robot)
            .expect("fixed-topology controller with three sensors cannot fail")
            .niche
            .id()
    }
}

fn check_space(space: &Subspace) -> Result<()> {
    if space.free_genes().is_empty() {
        return Err(Error::config("gene mask pins every gene; nothing to tabulate"));
    }
    Ok(())
}

fn check_range(space: &Subspace, range: &Range<u64>) -> Result<()> {
    if range.start > range.end || range.end > space.size() {
        return Err(Error::config(format!(
            "id range {}..{} is not inside the {}-genotype space",
            range.start,
            range.end,
            space.size()
        )));
    }
    Ok(())
}

/// Behavioral niches for a contiguous range of compact ids, evaluated in
/// parallel; the output is in id order whatever the schedule.
pub fn compute_niches(
    evaluator: &GenotypeEvaluator,
    space: &Subspace,
    range: Range<u64>,
) -> Result<Vec<u16>> {
    check_range(space, &range)?;
    Ok((range.start as usize..range.end as usize)
        .into_par_iter()
        .with_min_len(256)
        .map(|c| evaluator.niche(&space.genome(c as u64)))
        .collect())
}

#[derive(Default)]
struct NicheSet([u64; GRID_CELLS.div_ceil(64)]);

impl NicheSet {
    #[inline]
    fn insert(&mut self, niche: u16) {
        self.0[niche as usize / 64] |= 1 << (niche % 64);
    }

    fn len(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }
}

fn count_distinct(niches: impl Iterator<Item = u16>) -> u8 {
    let mut set = NicheSet::default();
    for n in niches {
        set.insert(n);
    }
    set.len() as u8
}

/// Second tabulation phase: evolvability of each id in `range` from the
/// niches of the whole space.
pub fn evolvability_from_niches(space: &Subspace, niches: &[u16], range: Range<u64>) -> Vec<u8> {
    assert_eq!(niches.len() as u64, space.size());
    (range.start as usize..range.end as usize)
        .into_par_iter()
        .with_min_len(1024)
        .map_init(Vec::new, |buf, c| {
            space.neighbors(c as u64, buf);
            count_distinct(buf.iter().map(|&n| niches[n as usize]))
        })
        .collect()
}

/// Tabulates an arbitrary id range. Niches of neighbors outside the range are
/// simulated on demand.
pub fn tabulate(
    evaluator: &GenotypeEvaluator,
    space: &Subspace,
    range: Range<u64>,
) -> Result<Vec<LookupRecord>> {
    check_space(space)?;
    check_range(space, &range)?;
    let inside = compute_niches(evaluator, space, range.clone())?;
    let mut outside: HashMap<u64, u16> = HashMap::new();
    let mut buf = Vec::new();
    let mut records = Vec::with_capacity(inside.len());
    for c in range.clone() {
        space.neighbors(c, &mut buf);
        let ns: Vec<u16> = buf
            .iter()
            .map(|&n| {
                if range.contains(&n) {
                    inside[(n - range.start) as usize]
                } else {
                    *outside
                        .entry(n)
                        .or_insert_with(|| evaluator.niche(&space.genome(n)))
                }
            })
            .collect();
        records.push(LookupRecord {
            niche: inside[(c - range.start) as usize],
            evolvability: count_distinct(ns.into_iter()),
        });
    }
    Ok(records)
}

/// Niche and evolvability for every genotype of a subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct LookupTable {
    space: Subspace,
    records: Vec<LookupRecord>,
}

impl LookupTable {
    pub fn from_records(space: Subspace, records: Vec<LookupRecord>) -> Result<Self> {
        if records.len() as u64 != space.size() {
            return Err(Error::Integrity(format!(
                "table has {} records for a {}-genotype space",
                records.len(),
                space.size()
            )));
        }
        if let Some((i, r)) = records
            .iter()
            .enumerate()
            .find(|(_, r)| r.niche as usize >= GRID_CELLS)
        {
            return Err(Error::Integrity(format!(
                "record {i} has niche {} outside the grid",
                r.niche
            )));
        }
        Ok(LookupTable { space, records })
    }

    /// Two-phase build over the whole subspace: all niches first, then every
    /// evolvability count from the stored niches.
    pub fn build(evaluator: &GenotypeEvaluator, space: Subspace) -> Result<Self> {
        check_space(&space)?;
        let niches = compute_niches(evaluator, &space, 0..space.size())?;
        let evo = evolvability_from_niches(&space, &niches, 0..space.size());
        let records = niches
            .into_iter()
            .zip(evo)
            .map(|(niche, evolvability)| LookupRecord {
                niche,
                evolvability,
            })
            .collect();
        Self::from_records(space, records)
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    pub fn records(&self) -> &[LookupRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    #[inline]
    pub fn get_compact(&self, compact: u64) -> LookupRecord {
        self.records[compact as usize]
    }

    pub fn get(&self, genome: &FixedAnnGenome) -> Option<LookupRecord> {
        self.space.compact_of(genome).map(|c| self.get_compact(c))
    }

    /// Pearson correlation between the evolvability of uniformly sampled
    /// parents and of one uniformly chosen single-mutation offspring each.
    pub fn heritability<R: Rng + ?Sized>(&self, sample_size: usize, rng: &mut R) -> Result<Correlation> {
        if sample_size < 3 {
            return Err(Error::invalid("heritability needs at least 3 samples"));
        }
        let degree = self.space.degree();
        let mut parents = Vec::with_capacity(sample_size);
        let mut children = Vec::with_capacity(sample_size);
        for _ in 0..sample_size {
            let p = rng.random_range(0..self.space.size());
            let c = self.space.neighbor(p, rng.random_range(0..degree));
            parents.push(self.get_compact(p).evolvability as f64);
            children.push(self.get_compact(c).evolvability as f64);
        }
        pearson(&parents, &children)
    }
}
