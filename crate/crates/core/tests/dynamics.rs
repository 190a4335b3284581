use evolvability::ann_space::{
    reproduce, run_robot_drift, run_robot_niched, GeneMask, LookupRecord, LookupTable,
    RobotDriftParams, Subspace,
};
use evolvability::maze::{Maze, RobotParams, GRID_CELLS};
use evolvability::neat::{run_neat_niched, ControlMode, NeatParams};
use evolvability::seed::seed_stream;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn chi_square(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
}

fn critical(df: usize) -> f64 {
    ChiSquared::new(df as f64).unwrap().inverse_cdf(0.999)
}

#[test]
fn full_space_neighbor_choice_is_uniform() {
    let space = Subspace::full();
    let mut rng = seed_stream(21, 0);
    let parent = 123_456_789u64;
    let mut neighbors = Vec::new();
    space.neighbors(parent, &mut neighbors);
    assert_eq!(neighbors.len(), 36);
    let mut counts = vec![0u64; 36];
    for _ in 0..72_000 {
        let child = space.neighbor(parent, rng.random_range(0..space.degree()));
        counts[neighbors.iter().position(|&n| n == child).unwrap()] += 1;
    }
    assert!(chi_square(&counts) < critical(35));
}

fn synthetic_table() -> LookupTable {
    let space = Subspace::new("******000000000000".parse::<GeneMask>().unwrap());
    let records = (0..space.size())
        .map(|c| LookupRecord {
            niche: (c * 7 % 400) as u16,
            evolvability: (1 + c % 12) as u8,
        })
        .collect();
    LookupTable::from_records(space, records).unwrap()
}

#[test]
fn single_offspring_is_a_uniform_neighbor() {
    let table = synthetic_table();
    let mut rng = seed_stream(22, 0);
    let parent = 200u32;
    let mut neighbors = Vec::new();
    table.space().neighbors(parent as u64, &mut neighbors);
    let mut counts = vec![0u64; neighbors.len()];
    for _ in 0..24_000 {
        let child = reproduce(&table, parent, 1.0, &mut rng) as u64;
        counts[neighbors.iter().position(|&n| n == child).unwrap()] += 1;
    }
    assert!(chi_square(&counts) < critical(neighbors.len() - 1));
}

#[test]
fn capacity_one_bounds_population_by_cells() {
    let table = synthetic_table();
    let params = RobotDriftParams {
        niche_capacity: 1,
        generations: 60,
        ..Default::default()
    };
    let run = run_robot_niched(&table, &params, 8).unwrap();
    for row in run.record.rows() {
        assert!(row.pop_size <= row.occupied_niches);
        assert!(row.occupied_niches <= GRID_CELLS as u64);
    }
}

#[test]
fn niched_creates_far_fewer_individuals_than_drift() {
    let table = synthetic_table();
    let params = RobotDriftParams {
        pop_size: 20_000,
        generations: 30,
        ..Default::default()
    };
    let drift = run_robot_drift(&table, &params, 1).unwrap();
    let niched = run_robot_niched(&table, &params, 1).unwrap();
    let d = drift.record.last().unwrap().cumulative_individuals;
    let n = niched.record.last().unwrap().cumulative_individuals;
    assert_eq!(d, 20_000 * 31);
    assert!(n * 5 < d, "niched {n} vs drift {d}");
}

#[test]
fn random_niche_admissions_are_uniform_over_cells() {
    let maze = Maze::default_maze(4.0);
    let params = NeatParams {
        control_mode: ControlMode::RandomNiche,
        evaluation_budget: 8_000,
        niche_capacity: 1_000,
        checkpoint_interval: 8_000,
        evolvability_samples: 1,
        evolvability_sample_cap: 1,
        robot: RobotParams {
            timesteps: 5,
            ..RobotParams::six_sensor()
        },
        ..Default::default()
    };
    let run = run_neat_niched(&maze, &params, 31).unwrap();
    assert_eq!(run.niches.len(), 8_000);
    let mut counts = vec![0u64; GRID_CELLS];
    for &n in &run.niches {
        counts[n as usize] += 1;
    }
    assert!(chi_square(&counts) < critical(GRID_CELLS - 1));
}

#[test]
fn neat_population_respects_capacity_and_budget() {
    let maze = Maze::default_maze(4.0);
    let params = NeatParams {
        evaluation_budget: 400,
        niche_capacity: 2,
        checkpoint_interval: 200,
        evolvability_samples: 4,
        evolvability_sample_cap: 2,
        robot: RobotParams {
            timesteps: 80,
            ..RobotParams::six_sensor()
        },
        ..Default::default()
    };
    let run = run_neat_niched(&maze, &params, 4).unwrap();
    assert_eq!(run.evaluations, 400);
    for row in run.record.rows() {
        assert!(row.pop_size <= 2 * row.occupied_niches);
        assert!(row.pop_size <= 2 * GRID_CELLS as u64);
    }
    assert_eq!(run.estimation_evaluations, 4 * (1 + 2 + 2));
}
