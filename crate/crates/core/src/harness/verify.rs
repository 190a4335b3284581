//! Quick oracle checks behind the `verify` command.

use std::collections::HashSet;

use rand::Rng;
use serde::Serialize;

use super::config::TableConfig;
use super::tables::{build_table_in_memory, merged_bytes};
use crate::abstract_models::{mutate_abstract, AbstractOrganism, AbstractParams, NichePoint};
use crate::analysis::pearson;
use crate::ann_space::{
    decode, encode, single_mutation_neighbors, FixedAnnController, GeneMask, GenotypeId,
    Subspace, SPACE_SIZE,
};
use crate::maze::{evaluate_controller, Maze};
use crate::seed::seed_stream;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, result: Result<String, String>) -> CheckResult {
    match result {
        Ok(detail) => CheckResult {
            name,
            passed: true,
            detail,
        },
        Err(detail) => CheckResult {
            name,
            passed: false,
            detail,
        },
    }
}

fn neighborhoods() -> Result<String, String> {
    let mut rng = seed_stream(11, 0);
    for _ in 0..10_000 {
        let g = decode(rng.random_range(0..SPACE_SIZE)).map_err(|e| e.to_string())?;
        let ns = single_mutation_neighbors(&g);
        let distinct: HashSet<u64> = ns.iter().map(|n| encode(n).index()).collect();
        if ns.len() != 36 || distinct.len() != 36 || distinct.contains(&encode(&g).index()) {
            return Err(format!("genome {} has a bad neighborhood", encode(&g).index()));
        }
    }
    Ok("10000 genomes with 36 distinct neighbors".into())
}

fn roundtrip() -> Result<String, String> {
    let mut rng = seed_stream(12, 0);
    for _ in 0..100_000 {
        let id = rng.random_range(0..SPACE_SIZE);
        let back = encode(&decode(id).map_err(|e| e.to_string())?);
        if back != GenotypeId::new(id).map_err(|e| e.to_string())? {
            return Err(format!("id {id} came back as {}", back.index()));
        }
    }
    Ok("100000 ids".into())
}

fn pearson_formula() -> Result<String, String> {
    let x = [1.0, 2.0, 4.0, 4.5, 7.0, 8.0, 9.5, 11.0, 12.0, 15.0];
    let y = [2.1, 2.9, 4.2, 6.0, 6.1, 8.8, 9.0, 10.5, 13.2, 14.0];
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let syy: f64 = y.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    let direct = (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt());
    let r = pearson(&x, &y).map_err(|e| e.to_string())?.r().ok_or("undefined")?;
    if (r - direct).abs() > 1e-12 {
        return Err(format!("r {r} vs direct {direct}"));
    }
    Ok(format!("r = {r:.12}"))
}

fn move_frequency() -> Result<String, String> {
    // central 99.99% interval of Binomial(10^6, 0.05)
    let mut rng = seed_stream(13, 0);
    let params = AbstractParams::default();
    let parent = AbstractOrganism {
        niche: NichePoint::ORIGIN,
        evolvability: 0.05,
    };
    let moved = (0..1_000_000)
        .filter(|_| mutate_abstract(&parent, &params, &mut rng).niche != parent.niche)
        .count();
    if (49_154..=50_850).contains(&moved) {
        Ok(format!("{moved} moves in 10^6"))
    } else {
        Err(format!("{moved} moves in 10^6, outside [49154, 50850]"))
    }
}

fn small_table(mask: &str) -> TableConfig {
    TableConfig {
        mask: mask.parse::<GeneMask>().expect("valid mask"),
        ..Default::default()
    }
}

fn brute_force_tabulation() -> Result<String, String> {
    let cfg = small_table("*0000000000000*000");
    let table = build_table_in_memory(Maze::default_text(), &cfg, 1).map_err(|e| e.to_string())?;
    let maze = Maze::default_maze(cfg.robot.radius);
    let space = Subspace::new(cfg.mask);
    let niche = |g: &crate::ann_space::FixedAnnGenome| {
        let mut c = FixedAnnController::new(g, cfg.steepness);
        evaluate_controller(&maze, &mut c, &cfg.robot).map(|o| o.niche.id())
    };
    for compact in 0..space.size() {
        let g = space.genome(compact);
        let own = niche(&g).map_err(|e| e.to_string())?;
        let mut seen = HashSet::new();
        for n in single_mutation_neighbors(&g).iter().filter(|n| cfg.mask.admits(n)) {
            seen.insert(niche(n).map_err(|e| e.to_string())?);
        }
        let rec = table.get_compact(compact);
        if rec.niche != own || rec.evolvability as usize != seen.len() {
            return Err(format!("genotype {compact}: table {rec:?}, direct ({own}, {})", seen.len()));
        }
    }
    Ok("9 records match direct simulation".into())
}

fn worker_independence() -> Result<String, String> {
    let cfg = small_table("**0000000000**0000");
    let one = build_table_in_memory(Maze::default_text(), &cfg, 1).map_err(|e| e.to_string())?;
    let two = build_table_in_memory(Maze::default_text(), &cfg, 2).map_err(|e| e.to_string())?;
    if merged_bytes(&one) == merged_bytes(&two) {
        Ok("81-record tables identical".into())
    } else {
        Err("one- and two-worker tables differ".into())
    }
}

/// Runs every quick oracle check.
pub fn self_checks() -> Vec<CheckResult> {
    vec![
        check("neighborhood_cardinality", neighborhoods()),
        check("encode_decode_roundtrip", roundtrip()),
        check("pearson_direct_formula", pearson_formula()),
        check("niche_move_frequency", move_frequency()),
        check("brute_force_tabulation", brute_force_tabulation()),
        check("worker_count_independence", worker_independence()),
    ]
}
