use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use evolvability::ann_space::GeneMask;
use evolvability::harness::{
    analyze, build_table, resolve_threads, run_experiment, self_checks, ExperimentConfig,
};
use evolvability::{Error, Result};

#[derive(Parser)]
#[command(name = "evolvability", version, about = "Evolvability under drift and limited-capacity niches")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment battery.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's base seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        /// 18-character gene mask, `*` free and `0` pinned to neutral.
        #[arg(long)]
        mask: Option<GeneMask>,
    },
    /// Build a lookup table for the fixed-topology genotype space.
    Tabulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "table")]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        mask: Option<GeneMask>,
    },
    /// Recompute pooled analysis from stored run records.
    Analyze {
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the quick oracle checks.
    Verify {
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn init_threads(threads: Option<usize>) -> Result<usize> {
    if let Some(n) = resolve_threads(threads)? {
        if n < 1 {
            return Err(Error::Config("thread count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(rayon::current_num_threads())
}

fn execute(cli: Cli) -> Result<serde_json::Value> {
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            threads,
            mask,
        } => {
            init_threads(threads)?;
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            if let Some(m) = mask {
                cfg.table.mask = m;
            }
            let manifest = run_experiment(&cfg)?;
            let status = if manifest.succeeded() { "ok" } else { "failed" };
            Ok(json!({
                "status": status,
                "output_dir": cfg.output_dir,
                "runs": manifest.runs.len(),
                "failures": manifest.failures,
            }))
        }
        Command::Tabulate {
            config,
            out,
            threads,
            mask,
        } => {
            let workers = init_threads(threads)?;
            let mut cfg = match config {
                Some(p) => ExperimentConfig::load(&p)?,
                None => ExperimentConfig::default(),
            };
            if let Some(m) = mask {
                cfg.table.mask = m;
            }
            let maze_text = cfg.maze_text()?;
            let (manifest, table) = build_table(&maze_text, &cfg.table, workers, &out)?;
            Ok(json!({
                "status": "ok",
                "records": table.len(),
                "mask": manifest.mask,
                "shards": manifest.shards.len(),
                "maze_sha256": manifest.maze_sha256,
                "manifest": out.join(evolvability::ann_space::MANIFEST_FILE),
            }))
        }
        Command::Analyze { out } => {
            let files = analyze(&out)?;
            Ok(json!({ "status": "ok", "files": files }))
        }
        Command::Verify { threads } => {
            init_threads(threads)?;
            let checks = self_checks();
            let passed = checks.iter().all(|c| c.passed);
            Ok(json!({
                "status": if passed { "ok" } else { "failed" },
                "checks": checks,
            }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let summary = execute(cli).unwrap_or_else(|e| {
        json!({
            "status": "failed",
            "error": e.to_string(),
        })
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    if summary["status"] == "ok" {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
