//! Drift and limited-capacity niching over a tabulated genotype space.
//!
//! Organisms are compact genotype ids; niche and evolvability are read from
//! the lookup table.

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use super::table::LookupTable;
use crate::analysis::{Checkpoint, RunRecord, SnapshotStats};
use crate::error::{Error, Result};
use crate::maze::GRID_CELLS;
use crate::niching::NicheReservoir;
use crate::seed::SimRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotDriftParams {
    pub pop_size: usize,
    pub generations: u64,
    /// Probability that a reproduction applies one single-connection mutation.
    pub offspring_mutation_prob: f64,
    pub niche_capacity: usize,
    pub offspring_per_parent: usize,
    pub checkpoint_interval: u64,
}

impl Default for RobotDriftParams {
    fn default() -> Self {
        RobotDriftParams {
            pop_size: 2_000_000,
            generations: 250,
            offspring_mutation_prob: 0.5,
            niche_capacity: 5,
            offspring_per_parent: 2,
            checkpoint_interval: 1,
        }
    }
}

impl RobotDriftParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.offspring_mutation_prob) {
            return Err(Error::config(format!(
                "offspring_mutation_prob must be in [0, 1], got {}",
                self.offspring_mutation_prob
            )));
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

/// Outcome of a robot run: the statistics and the final population as compact ids.
#[derive(Debug, Clone)]
pub struct RobotRun {
    pub record: RunRecord,
    pub population: Vec<u32>,
}

impl RobotRun {
    /// Final organisms as (niche cell, evolvability) pairs.
    pub fn final_pool(&self, table: &LookupTable) -> Vec<(usize, f64)> {
        self.population
            .iter()
            .map(|&c| {
                let r = table.get_compact(c as u64);
                (r.niche as usize, r.evolvability as f64)
            })
            .collect()
    }
}

pub fn robot_stats(table: &LookupTable, population: &[u32]) -> Result<SnapshotStats> {
    SnapshotStats::from_cells(
        population.iter().map(|&c| {
            let r = table.get_compact(c as u64);
            (r.niche as usize, r.evolvability as f64)
        }),
        GRID_CELLS,
    )
}

/// Offspring genotype: with probability `prob`, one uniformly chosen
/// single-connection mutation of `parent`.
#[inline]
pub fn reproduce<R: Rng + ?Sized>(table: &LookupTable, parent: u32, prob: f64, rng: &mut R) -> u32 {
    if prob > 0.0 && rng.random_bool(prob) {
        let space = table.space();
        space.neighbor(parent as u64, rng.random_range(0..space.degree())) as u32
    } else {
        parent
    }
}

fn check_table(table: &LookupTable) -> Result<()> {
    if table.space().size() > u32::MAX as u64 {
        return Err(Error::config("robot dynamics need a space of at most 2^32 genotypes"));
    }
    if table.space().degree() == 0 {
        return Err(Error::config("genotype space has no free genes"));
    }
    Ok(())
}

fn random_genotype(table: &LookupTable, rng: &mut SimRng) -> u32 {
    rng.random_range(0..table.space().size()) as u32
}

/// Passive drift: `pop_size` copies of one random genotype, each leaving one
/// offspring per generation.
pub fn run_robot_drift(table: &LookupTable, params: &RobotDriftParams, seed: u64) -> Result<RobotRun> {
    params.validate()?;
    check_table(table)?;
    let mut rng = SimRng::seed_from_u64(seed);
    let mut population = vec![random_genotype(table, &mut rng); params.pop_size];
    let mut cumulative = population.len() as u64;
    let mut record = RunRecord::new();
    record.push(Checkpoint::new(0, cumulative, robot_stats(table, &population)?));
    for g in 1..=params.generations {
        for org in population.iter_mut() {
            *org = reproduce(table, *org, params.offspring_mutation_prob, &mut rng);
        }
        cumulative += population.len() as u64;
        if g % params.checkpoint_interval == 0 || g == params.generations {
            record.push(Checkpoint::new(g, cumulative, robot_stats(table, &population)?));
        }
    }
    Ok(RobotRun { record, population })
}

/// Limited-capacity niching over the 400 behavioral cells, starting from a
/// single random genotype.
pub fn run_robot_niched(table: &LookupTable, params: &RobotDriftParams, seed: u64) -> Result<RobotRun> {
    params.validate()?;
    check_table(table)?;
    let mut rng = SimRng::seed_from_u64(seed);
    let mut population = vec![random_genotype(table, &mut rng)];
    let mut cumulative = 1u64;
    let mut record = RunRecord::new();
    record.push(Checkpoint::new(0, cumulative, robot_stats(table, &population)?));
    let mut reservoir = NicheReservoir::<u32>::new(GRID_CELLS, params.niche_capacity);
    for g in 1..=params.generations {
        reservoir.clear();
        for &parent in &population {
            for _ in 0..params.offspring_per_parent {
                let child = reproduce(table, parent, params.offspring_mutation_prob, &mut rng);
                let niche = table.get_compact(child as u64).niche as usize;
                reservoir.offer(niche, child, &mut rng);
            }
        }
        cumulative += (population.len() * params.offspring_per_parent) as u64;
        population.clear();
        for cell in reservoir.occupied_sorted() {
            population.extend_from_slice(reservoir.admitted(cell));
        }
        if g % params.checkpoint_interval == 0 || g == params.generations {
            record.push(Checkpoint::new(g, cumulative, robot_stats(table, &population)?));
        }
    }
    Ok(RobotRun { record, population })
}
