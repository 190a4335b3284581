use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ModelKind};
use super::tables::{build_table_in_memory, load_configured_table};
use crate::abstract_models::{run_abstract, AbstractVariant, NichePoint};
use crate::analysis::{
    aggregate_runs, distance_profile, grid_heatmap, lattice_heatmap, Correlation, DistanceMetric,
    RunRecord,
};
use crate::ann_space::{run_robot_drift, run_robot_niched, sha256_hex, LookupTable};
use crate::error::{Error, Result};
use crate::maze::{Maze, GRID_SIDE};
use crate::neat::run_neat_niched;
use crate::seed::{auxiliary_stream, run_seed, SimRng};

pub const CONFIG_FILE: &str = "config.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub index: u64,
    pub seed: u64,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub files: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluations: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimation_evaluations: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub index: u64,
    pub seed: u64,
    pub error: String,
}

/// Record of one `run` invocation. Paths are relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub model: ModelKind,
    pub config_file: String,
    pub config_sha256: String,
    pub code_version: String,
    pub base_seed: u64,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub runs: Vec<RunEntry>,
    /// Every file written, except this manifest.
    pub files: Vec<String>,
    pub failures: Vec<RunFailure>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn succeeded(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Final organisms of a run, ready for pooling.
#[derive(Debug, Clone, PartialEq)]
pub enum FinalPool {
    Lattice(Vec<(NichePoint, f64)>),
    Grid(Vec<(usize, f64)>),
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

fn create_file(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path).map_err(|e| Error::io(path, e))?))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn record_name(index: u64) -> String {
    format!("runs/run_{index:03}.csv")
}

fn final_name(index: u64) -> String {
    format!("runs/final_{index:03}.csv")
}

fn write_pool(path: &Path, pool: &FinalPool, genotypes: Option<&[u32]>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create_file(path)?);
    match pool {
        FinalPool::Lattice(orgs) => {
            w.write_record(["niche_x", "niche_y", "evolvability"])?;
            for (p, e) in orgs {
                w.write_record([p.x.to_string(), p.y.to_string(), e.to_string()])?;
            }
        }
        FinalPool::Grid(orgs) => match genotypes {
            Some(ids) => {
                w.write_record(["genotype", "niche", "evolvability"])?;
                for (id, (n, e)) in ids.iter().zip(orgs) {
                    w.write_record([id.to_string(), n.to_string(), e.to_string()])?;
                }
            }
            None => {
                w.write_record(["niche", "evolvability"])?;
                for (n, e) in orgs {
                    w.write_record([n.to_string(), e.to_string()])?;
                }
            }
        },
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a final-population CSV written by a run.
pub fn read_pool(path: &Path) -> Result<FinalPool> {
    let fmt = |m: String| Error::Format {
        path: path.to_path_buf(),
        message: m,
    };
    let mut r = csv::Reader::from_path(path)?;
    let headers: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let rows: Vec<csv::StringRecord> = r.records().collect::<std::result::Result<_, _>>()?;
    let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| fmt(format!("bad number {s:?}"))) };
    match headers.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["niche_x", "niche_y", "evolvability"] => rows
            .iter()
            .map(|row| {
                Ok((
                    NichePoint::new(num(&row[0])? as i32, num(&row[1])? as i32),
                    num(&row[2])?,
                ))
            })
            .collect::<Result<_>>()
            .map(FinalPool::Lattice),
        ["genotype", "niche", "evolvability"] => rows
            .iter()
            .map(|row| Ok((num(&row[1])? as usize, num(&row[2])?)))
            .collect::<Result<_>>()
            .map(FinalPool::Grid),
        ["niche", "evolvability"] => rows
            .iter()
            .map(|row| Ok((num(&row[0])? as usize, num(&row[1])?)))
            .collect::<Result<_>>()
            .map(FinalPool::Grid),
        other => Err(fmt(format!("unrecognized final-population header {other:?}"))),
    }
}

/// Distance correlations written to `correlation.json` for lattice models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceCorrelation {
    pub metric: DistanceMetric,
    pub organisms: usize,
    /// Per-organism distance against evolvability.
    pub organism_correlation: Correlation,
    /// Integer distance bin against the bin's mean evolvability.
    pub profile_correlation: Correlation,
}

/// Writes the pooled analysis outputs and returns their relative paths.
pub fn write_analysis(
    out: &Path,
    metric: DistanceMetric,
    records: &[RunRecord],
    pools: &[FinalPool],
) -> Result<Vec<String>> {
    let mut files = Vec::new();
    if !records.is_empty() {
        let agg = aggregate_runs(records)?;
        agg.write_csv(create_file(&out.join("aggregate.csv"))?)?;
        files.push("aggregate.csv".to_string());
    }
    let mut lattice = Vec::new();
    let mut grid = Vec::new();
    for p in pools {
        match p {
            FinalPool::Lattice(v) => lattice.extend_from_slice(v),
            FinalPool::Grid(v) => grid.extend_from_slice(v),
        }
    }
    let heat = if !lattice.is_empty() {
        Some(lattice_heatmap(&lattice))
    } else if !grid.is_empty() {
        Some(grid_heatmap(&grid, GRID_SIDE)?)
    } else {
        None
    };
    if let Some(h) = heat {
        h.write_csv(create_file(&out.join("heatmap.csv"))?)?;
        h.write_origin_csv(create_file(&out.join("heatmap_origin.csv"))?)?;
        files.push("heatmap.csv".to_string());
        files.push("heatmap_origin.csv".to_string());
    }
    if !lattice.is_empty() {
        let profile = distance_profile(&lattice, NichePoint::ORIGIN, metric)?;
        profile.write_csv(create_file(&out.join("distance_profile.csv"))?)?;
        let summary = DistanceCorrelation {
            metric,
            organisms: lattice.len(),
            organism_correlation: profile.organism_correlation,
            profile_correlation: profile.profile_correlation,
        };
        write_text(&out.join("correlation.json"), &serde_json::to_string_pretty(&summary)?)?;
        files.push("distance_profile.csv".to_string());
        files.push("correlation.json".to_string());
    }
    Ok(files)
}

struct RunOutput {
    record: RunRecord,
    pool: FinalPool,
    files: Vec<String>,
    evaluations: Option<u64>,
    estimation_evaluations: Option<u64>,
}

enum Shared {
    None,
    Table(LookupTable),
    Maze(Maze),
}

fn run_one(config: &ExperimentConfig, shared: &Shared, index: u64, out: &Path) -> Result<RunOutput> {
    let seed = run_seed(config.base_seed, index);
    let mut files = vec![record_name(index)];
    let mut evaluations = None;
    let mut estimation_evaluations = None;
    let mut genotypes = None;
    let (record, pool) = match (config.model, shared) {
        (ModelKind::AbstractDrift | ModelKind::AbstractNiched, _) => {
            let variant = if config.model == ModelKind::AbstractDrift {
                AbstractVariant::Drift
            } else {
                AbstractVariant::Niched
            };
            let run = run_abstract(&config.abstract_params, variant, seed)?;
            let pool = run
                .population
                .organisms
                .iter()
                .map(|o| (o.niche, o.evolvability))
                .collect();
            (run.record, FinalPool::Lattice(pool))
        }
        (ModelKind::RobotDrift | ModelKind::RobotNiched, Shared::Table(table)) => {
            let run = if config.model == ModelKind::RobotDrift {
                run_robot_drift(table, &config.robot, seed)?
            } else {
                run_robot_niched(table, &config.robot, seed)?
            };
            let pool = FinalPool::Grid(run.final_pool(table));
            genotypes = Some(run.population);
            (run.record, pool)
        }
        (ModelKind::NeatNiched | ModelKind::NeatRandomControl, Shared::Maze(maze)) => {
            let run = run_neat_niched(maze, &config.neat_params(), seed)?;
            evaluations = Some(run.evaluations);
            estimation_evaluations = Some(run.estimation_evaluations);
            let last = run.audits.last().expect("every run has a final checkpoint");
            let pool = FinalPool::Grid(
                last.niches
                    .iter()
                    .zip(&last.evolvability)
                    .map(|(&n, &e)| (n as usize, e as f64))
                    .collect(),
            );
            if config.export_populations {
                let name = format!("runs/genomes_{index:03}.json");
                write_text(&out.join(&name), &serde_json::to_string(&run.audits)?)?;
                files.push(name);
            }
            (run.record, pool)
        }
        _ => unreachable!("shared resources match the model"),
    };
    record.save(&out.join(record_name(index)))?;
    if config.export_populations {
        write_pool(&out.join(final_name(index)), &pool, genotypes.as_deref())?;
        files.push(final_name(index));
    }
    Ok(RunOutput {
        record,
        pool,
        files,
        evaluations,
        estimation_evaluations,
    })
}

/// Runs the configured battery into `config.output_dir`.
///
/// Individual run failures are recorded in the manifest and do not stop the
/// battery; configuration problems fail before anything runs.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunManifest> {
    config.validate()?;
    let started = now_ms();
    let out = config.output_dir.clone();
    fs::create_dir_all(out.join("runs")).map_err(|e| Error::io(out.join("runs"), e))?;
    let config_text = config.to_json();
    write_text(&out.join(CONFIG_FILE), &config_text)?;
    let mut files = vec![CONFIG_FILE.to_string()];

    let shared = if config.model.is_robot() {
        let maze_text = config.maze_text()?;
        let table = match &config.table.manifest {
            Some(m) => load_configured_table(m, &maze_text, &config.table)?,
            None => build_table_in_memory(&maze_text, &config.table, rayon::current_num_threads())?,
        };
        // heritability draws from the auxiliary stream of the base seed
        let mut rng = auxiliary_stream(&SimRng::seed_from_u64(config.base_seed));
        let h = table.heritability(config.table.heritability_samples, &mut rng)?;
        write_text(&out.join("heritability.json"), &serde_json::to_string_pretty(&h)?)?;
        files.push("heritability.json".to_string());
        Shared::Table(table)
    } else if config.model.is_neat() {
        Shared::Maze(config.load_maze()?)
    } else {
        Shared::None
    };

    let results: Vec<(u64, u64, u64, Result<RunOutput>)> = (0..config.runs)
        .into_par_iter()
        .map(|i| {
            let t0 = now_ms();
            let r = run_one(config, &shared, i, &out);
            (i, t0, now_ms(), r)
        })
        .collect();

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    let mut records = Vec::new();
    let mut pools = Vec::new();
    for (index, t0, t1, result) in results {
        let seed = run_seed(config.base_seed, index);
        let mut entry = RunEntry {
            index,
            seed,
            status: RunStatus::Ok,
            error: None,
            started_unix_ms: t0,
            finished_unix_ms: t1,
            files: Vec::new(),
            evaluations: None,
            estimation_evaluations: None,
        };
        match result {
            Ok(o) => {
                entry.files = o.files;
                entry.evaluations = o.evaluations;
                entry.estimation_evaluations = o.estimation_evaluations;
                files.extend(entry.files.iter().cloned());
                records.push(o.record);
                pools.push(o.pool);
            }
            Err(e) => {
                entry.status = RunStatus::Failed;
                entry.error = Some(e.to_string());
                failures.push(RunFailure {
                    index,
                    seed,
                    error: e.to_string(),
                });
            }
        }
        runs.push(entry);
    }
    files.extend(write_analysis(&out, config.distance_metric, &records, &pools)?);

    let manifest = RunManifest {
        model: config.model,
        config_file: CONFIG_FILE.to_string(),
        config_sha256: sha256_hex(config_text.as_bytes()),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        base_seed: config.base_seed,
        started_unix_ms: started,
        finished_unix_ms: now_ms(),
        runs,
        files,
        failures,
    };
    write_text(&out.join(MANIFEST_FILE), &serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Recomputes the pooled analysis of an existing output directory from its
/// stored run records and final populations.
pub fn analyze(out: &Path) -> Result<Vec<String>> {
    let config_path = out.join(CONFIG_FILE);
    let config_text = fs::read_to_string(&config_path).map_err(|e| Error::io(&config_path, e))?;
    let manifest = RunManifest::load(&out.join(MANIFEST_FILE))?;
    if sha256_hex(config_text.as_bytes()) != manifest.config_sha256 {
        return Err(Error::Integrity("config.json does not match the manifest digest".into()));
    }
    let config = ExperimentConfig::from_json(&config_text)?;
    let mut records = Vec::new();
    let mut pools = Vec::new();
    for entry in manifest.runs.iter().filter(|r| r.status == RunStatus::Ok) {
        records.push(RunRecord::load(&out.join(record_name(entry.index)))?);
        let final_path: PathBuf = out.join(final_name(entry.index));
        if final_path.is_file() {
            pools.push(read_pool(&final_path)?);
        }
    }
    write_analysis(out, config.distance_metric, &records, &pools)
}
