use std::path::Path;

use crate::ann_space::{
    compute_niches, encode_shard, evolvability_from_niches, load_table, partition,
    verify_coverage, write_table, GenotypeEvaluator, LookupRecord, LookupTable, Subspace,
    TableManifest, MANIFEST_FILE,
};
use crate::error::{Error, Result};
use crate::maze::Maze;

use super::config::TableConfig;

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::config(format!("cannot start {workers} workers: {e}")))
}

/// Two-phase tabulation with the id range split into one span per worker.
/// Spans are merged in id order, so the result does not depend on `workers`.
pub fn build_table_in_memory(maze_text: &str, cfg: &TableConfig, workers: usize) -> Result<LookupTable> {
    let maze = Maze::parse(maze_text, cfg.robot.radius)?;
    let evaluator = GenotypeEvaluator::new(maze, cfg.robot.clone(), cfg.steepness)?;
    let space = Subspace::new(cfg.mask);
    if space.free_genes().is_empty() {
        return Err(Error::config("gene mask pins every gene; nothing to tabulate"));
    }
    let spans = partition(space.size(), workers);
    verify_coverage(&spans, space.size())?;
    pool(workers)?.install(|| {
        let mut niches = Vec::with_capacity(space.size() as usize);
        for &(start, count) in &spans {
            niches.extend(compute_niches(&evaluator, &space, start..start + count)?);
        }
        let mut records = Vec::with_capacity(niches.len());
        for &(start, count) in &spans {
            let evo = evolvability_from_niches(&space, &niches, start..start + count);
            records.extend(evo.into_iter().enumerate().map(|(k, evolvability)| LookupRecord {
                niche: niches[start as usize + k],
                evolvability,
            }));
        }
        LookupTable::from_records(space.clone(), records)
    })
}

/// Builds a table, writes it as shards plus a manifest under `dir`, then
/// reloads it to confirm the shards cover the space exactly once.
pub fn build_table(
    maze_text: &str,
    cfg: &TableConfig,
    workers: usize,
    dir: &Path,
) -> Result<(TableManifest, LookupTable)> {
    let table = build_table_in_memory(maze_text, cfg, workers)?;
    write_table(dir, &table, cfg.shards, maze_text, &cfg.robot, cfg.steepness)?;
    let (manifest, reloaded) = load_table(&dir.join(MANIFEST_FILE), maze_text)?;
    if reloaded != table {
        return Err(Error::Integrity("reloaded table differs from the built one".into()));
    }
    Ok((manifest, table))
}

/// Loads a table and checks it was built for the configured mask, robot and steepness.
pub fn load_configured_table(manifest: &Path, maze_text: &str, cfg: &TableConfig) -> Result<LookupTable> {
    let (m, table) = load_table(manifest, maze_text)?;
    if m.mask != cfg.mask {
        return Err(Error::config(format!(
            "table mask {} differs from configured mask {}",
            m.mask, cfg.mask
        )));
    }
    if m.robot != cfg.robot || m.steepness != cfg.steepness {
        return Err(Error::config("table was built with different robot parameters"));
    }
    Ok(table)
}

/// The whole table as a single shard; equal bytes mean equal tables.
pub fn merged_bytes(table: &LookupTable) -> Vec<u8> {
    encode_shard(0, table.records())
}
