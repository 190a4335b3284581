use rand::seq::index;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::genome::{initial_genome, mutate_neat, InnovationCounter, NeatGenome};
use super::network::NeatController;
use crate::analysis::{Checkpoint, RunRecord, SnapshotStats};
use crate::ann_space::DEFAULT_STEEPNESS;
use crate::error::{Error, Result};
use crate::maze::{evaluate_controller, Maze, RobotParams, GRID_CELLS};
use crate::seed::{auxiliary_stream, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlMode {
    /// Niche is the behavior cell reached by the evaluated robot.
    #[default]
    BehaviorNiche,
    /// Niche is a uniform random cell, ignoring behavior.
    RandomNiche,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeatParams {
    pub weight_perturb_prob: f64,
    pub add_connection_prob: f64,
    pub add_node_prob: f64,
    pub weight_perturb_halfwidth: f64,
    pub evaluation_budget: u64,
    pub niche_capacity: usize,
    /// Mutants per evolvability estimate.
    pub evolvability_samples: usize,
    /// Living individuals measured at each checkpoint.
    pub evolvability_sample_cap: usize,
    pub control_mode: ControlMode,
    /// Evaluations between checkpoints.
    pub checkpoint_interval: u64,
    pub steepness: f64,
    pub robot: RobotParams,
}

impl Default for NeatParams {
    fn default() -> Self {
        NeatParams {
            weight_perturb_prob: 0.9,
            add_connection_prob: 0.1,
            add_node_prob: 0.02,
            weight_perturb_halfwidth: 0.5,
            evaluation_budget: 50_000,
            niche_capacity: 5,
            evolvability_samples: 200,
            evolvability_sample_cap: 30,
            control_mode: ControlMode::BehaviorNiche,
            checkpoint_interval: 500,
            steepness: DEFAULT_STEEPNESS,
            robot: RobotParams::six_sensor(),
        }
    }
}

impl NeatParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("weight_perturb_prob", self.weight_perturb_prob),
            ("add_connection_prob", self.add_connection_prob),
            ("add_node_prob", self.add_node_prob),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(format!("{name} must be in [0, 1], got {v}")));
            }
        }
        if !(self.weight_perturb_halfwidth >= 0.0 && self.weight_perturb_halfwidth.is_finite()) {
            return Err(Error::config("weight_perturb_halfwidth must be a finite value >= 0"));
        }
        for (name, v) in [
            ("evaluation_budget", self.evaluation_budget),
            ("niche_capacity", self.niche_capacity as u64),
            ("evolvability_samples", self.evolvability_samples as u64),
            ("evolvability_sample_cap", self.evolvability_sample_cap as u64),
            ("checkpoint_interval", self.checkpoint_interval),
        ] {
            if v < 1 {
                return Err(Error::config(format!("{name} must be at least 1")));
            }
        }
        if !self.steepness.is_finite() {
            return Err(Error::config("steepness must be finite"));
        }
        self.robot.validate()?;
        if self.robot.sensor_angles.len() != super::SENSOR_INPUTS {
            return Err(Error::config(format!(
                "the practical model uses {} sensors",
                super::SENSOR_INPUTS
            )));
        }
        Ok(())
    }
}

/// Behavior cell reached by `genome` in one trial.
pub fn evaluate_neat(genome: &NeatGenome, maze: &Maze, params: &NeatParams) -> Result<u16> {
    let mut controller = NeatController::new(genome, params.steepness)?;
    Ok(evaluate_controller(maze, &mut controller, &params.robot)?.niche.id())
}

/// Distinct behavior cells among `evolvability_samples` independent mutants.
/// Mutant innovations come from a scratch counter and are thrown away.
pub fn estimate_evolvability<R: Rng + ?Sized>(
    genome: &NeatGenome,
    maze: &Maze,
    params: &NeatParams,
    rng: &mut R,
) -> Result<usize> {
    let mut scratch = InnovationCounter::starting_at(genome.max_innovation().map_or(0, |m| m + 1));
    let mut seen = [false; GRID_CELLS];
    let mut distinct = 0;
    for _ in 0..params.evolvability_samples {
        let mutant = mutate_neat(genome, params, &mut scratch, rng);
        let cell = evaluate_neat(&mutant, maze, params)? as usize;
        if !seen[cell] {
            seen[cell] = true;
            distinct += 1;
        }
    }
    Ok(distinct)
}

/// Genomes measured at one checkpoint, kept for audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenomeAudit {
    pub checkpoint: u64,
    pub niches: Vec<u16>,
    pub evolvability: Vec<usize>,
    pub genomes: Vec<NeatGenome>,
}

#[derive(Debug, Clone)]
pub struct NeatRun {
    /// Checkpoints are evaluation counts. Population size and occupied niches
    /// describe the whole population; the two evolvability means are over
    /// the measured sample.
    pub record: RunRecord,
    pub population: Vec<NeatGenome>,
    pub niches: Vec<u16>,
    /// Evaluations charged to the budget.
    pub evaluations: u64,
    /// Evaluations spent on evolvability estimates, outside the budget.
    pub estimation_evaluations: u64,
    pub audits: Vec<GenomeAudit>,
}

struct Living {
    genomes: Vec<NeatGenome>,
    niches: Vec<u16>,
    occupancy: Vec<usize>,
}

impl Living {
    fn occupied(&self) -> u64 {
        self.occupancy.iter().filter(|&&c| c > 0).count() as u64
    }
}

fn measure(
    living: &Living,
    checkpoint: u64,
    maze: &Maze,
    params: &NeatParams,
    aux: &mut SimRng,
) -> Result<(Checkpoint, GenomeAudit, u64)> {
    let n = living.genomes.len();
    let k = params.evolvability_sample_cap.min(n);
    let mut picks = index::sample(aux, n, k).into_vec();
    picks.sort_unstable();
    let jobs: Vec<(usize, u64)> = picks.iter().map(|&i| (i, aux.random())).collect();
    let estimates = jobs
        .par_iter()
        .map(|&(i, seed)| {
            let mut rng = SimRng::seed_from_u64(seed);
            estimate_evolvability(&living.genomes[i], maze, params, &mut rng)
        })
        .collect::<Result<Vec<usize>>>()?;
    let sample = SnapshotStats::from_cells(
        picks
            .iter()
            .zip(&estimates)
            .map(|(&i, &e)| (living.niches[i] as usize, e as f64)),
        GRID_CELLS,
    )?;
    let stats = SnapshotStats {
        pop_size: n as u64,
        occupied: living.occupied(),
        ..sample
    };
    let audit = GenomeAudit {
        checkpoint,
        niches: picks.iter().map(|&i| living.niches[i]).collect(),
        evolvability: estimates,
        genomes: picks.iter().map(|&i| living.genomes[i].clone()).collect(),
    };
    let cost = (k * params.evolvability_samples) as u64;
    Ok((Checkpoint::new(checkpoint, checkpoint, stats), audit, cost))
}

/// Steady-state niched evolution until the evaluation budget is spent.
///
/// Evolution draws from the run's main stream; checkpoint measurements draw
/// from its auxiliary stream, so the measurement schedule never changes the
/// trajectory.
pub fn run_neat_niched(maze: &Maze, params: &NeatParams, seed: u64) -> Result<NeatRun> {
    params.validate()?;
    let mut rng = SimRng::seed_from_u64(seed);
    let mut aux = auxiliary_stream(&rng);
    let mut record = RunRecord::new();
    let mut audits = Vec::new();
    let mut estimation_evaluations = 0;

    let (founder, mut counter) = initial_genome(&mut rng);
    let mut living = Living {
        genomes: Vec::new(),
        niches: Vec::new(),
        occupancy: vec![0; GRID_CELLS],
    };
    let mut evaluations = 0u64;
    let place = |genome: NeatGenome, living: &mut Living, rng: &mut SimRng| -> Result<()> {
        let behavior = evaluate_neat(&genome, maze, params)?;
        let niche = match params.control_mode {
            ControlMode::BehaviorNiche => behavior,
            ControlMode::RandomNiche => rng.random_range(0..GRID_CELLS) as u16,
        };
        if living.occupancy[niche as usize] < params.niche_capacity {
            living.occupancy[niche as usize] += 1;
            living.genomes.push(genome);
            living.niches.push(niche);
        }
        Ok(())
    };

    place(founder, &mut living, &mut rng)?;
    evaluations += 1;
    let (row, audit, cost) = measure(&living, evaluations, maze, params, &mut aux)?;
    record.push(row);
    audits.push(audit);
    estimation_evaluations += cost;

    while evaluations < params.evaluation_budget {
        let parent = rng.random_range(0..living.genomes.len());
        let child = mutate_neat(&living.genomes[parent], params, &mut counter, &mut rng);
        place(child, &mut living, &mut rng)?;
        evaluations += 1;
        if evaluations % params.checkpoint_interval == 0 || evaluations == params.evaluation_budget {
            let (row, audit, cost) = measure(&living, evaluations, maze, params, &mut aux)?;
            record.push(row);
            audits.push(audit);
            estimation_evaluations += cost;
        }
    }
    Ok(NeatRun {
        record,
        population: living.genomes,
        niches: living.niches,
        evaluations,
        estimation_evaluations,
        audits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::seed_stream;

    fn quick() -> NeatParams {
        NeatParams {
            evaluation_budget: 120,
            evolvability_samples: 10,
            evolvability_sample_cap: 4,
            checkpoint_interval: 50,
            robot: RobotParams {
                timesteps: 60,
                ..RobotParams::six_sensor()
            },
            ..Default::default()
        }
    }

    #[test]
    fn estimate_bounds_and_determinism() {
        let maze = Maze::default_maze(4.0);
        let params = quick();
        let (g, _) = initial_genome(&mut seed_stream(1, 0));
        let a = estimate_evolvability(&g, &maze, &params, &mut seed_stream(9, 0)).unwrap();
        let b = estimate_evolvability(&g, &maze, &params, &mut seed_stream(9, 0)).unwrap();
        assert_eq!(a, b);
        assert!((1..=10).contains(&a));
        let frozen = NeatParams {
            weight_perturb_prob: 0.0,
            add_connection_prob: 0.0,
            add_node_prob: 0.0,
            ..params
        };
        assert_eq!(estimate_evolvability(&g, &maze, &frozen, &mut seed_stream(9, 0)).unwrap(), 1);
    }

    #[test]
    fn run_accounting() {
        let maze = Maze::default_maze(4.0);
        let params = quick();
        let run = run_neat_niched(&maze, &params, 17).unwrap();
        assert_eq!(run.evaluations, 120);
        assert_eq!(run.record.schedule(), vec![1, 50, 100, 120]);
        let measured: u64 = run.audits.iter().map(|a| a.genomes.len() as u64 * 10).sum();
        assert_eq!(run.estimation_evaluations, measured);
        let mut occ = vec![0; GRID_CELLS];
        for &n in &run.niches {
            occ[n as usize] += 1;
        }
        assert!(occ.iter().all(|&c| c <= params.niche_capacity));
        for g in &run.population {
            g.validate().unwrap();
        }
        let again = run_neat_niched(&maze, &params, 17).unwrap();
        assert_eq!(again.record, run.record);
        assert_eq!(again.population, run.population);
    }

    #[test]
    fn measurement_schedule_does_not_change_the_trajectory() {
        let maze = Maze::default_maze(4.0);
        let dense = quick();
        let sparse = NeatParams {
            checkpoint_interval: 1000,
            ..quick()
        };
        let a = run_neat_niched(&maze, &dense, 5).unwrap();
        let b = run_neat_niched(&maze, &sparse, 5).unwrap();
        assert_eq!(a.population, b.population);
        assert_eq!(b.record.schedule(), vec![1, 120]);
    }

    #[test]
    fn rejects_three_sensor_robot() {
        let params = NeatParams {
            robot: RobotParams::three_sensor(),
            ..quick()
        };
        assert!(run_neat_niched(&Maze::default_maze(4.0), &params, 0).is_err());
    }
}
