//! Configuration, run orchestration, table building and persistence.

mod config;
mod experiment;
mod tables;
mod verify;

pub use config::{ExperimentConfig, ModelKind, TableConfig};
pub use experiment::{
    analyze, read_pool, run_experiment, write_analysis, DistanceCorrelation, FinalPool,
    RunEntry, RunFailure, RunManifest, RunStatus, CONFIG_FILE, MANIFEST_FILE,
};
pub use tables::{build_table, build_table_in_memory, load_configured_table, merged_bytes};
pub use verify::{self_checks, CheckResult};

/// Thread count from an explicit value, else the `EVOLVABILITY_THREADS`
/// environment variable; `None` leaves the choice to rayon.
pub fn resolve_threads(explicit: Option<usize>) -> crate::Result<Option<usize>> {
    if let Some(n) = explicit {
        return Ok(Some(n));
    }
    match std::env::var("EVOLVABILITY_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| crate::Error::Config(format!("EVOLVABILITY_THREADS={v:?} is not a count"))),
        _ => Ok(None),
    }
}
