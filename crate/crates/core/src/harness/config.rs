use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::abstract_models::AbstractParams;
use crate::analysis::DistanceMetric;
use crate::ann_space::{GeneMask, RobotDriftParams, DEFAULT_STEEPNESS};
use crate::error::{Error, Result};
use crate::maze::{Maze, RobotParams};
use crate::neat::{ControlMode, NeatParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    AbstractDrift,
    AbstractNiched,
    RobotDrift,
    RobotNiched,
    NeatNiched,
    NeatRandomControl,
}

impl ModelKind {
    pub fn is_abstract(self) -> bool {
        matches!(self, ModelKind::AbstractDrift | ModelKind::AbstractNiched)
    }

    pub fn is_robot(self) -> bool {
        matches!(self, ModelKind::RobotDrift | ModelKind::RobotNiched)
    }

    pub fn is_neat(self) -> bool {
        matches!(self, ModelKind::NeatNiched | ModelKind::NeatRandomControl)
    }
}

/// Lookup-table settings for the fixed-topology robot models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TableConfig {
    /// Existing table to load; built in memory when absent.
    pub manifest: Option<PathBuf>,
    pub mask: GeneMask,
    pub robot: RobotParams,
    pub steepness: f64,
    /// Shard files written by `tabulate`.
    pub shards: usize,
    /// Parent-offspring pairs sampled for the heritability check.
    pub heritability_samples: usize,
}

impl Default for TableConfig {
    fn default() -> Self {
        TableConfig {
            manifest: None,
            mask: GeneMask::desk_default(),
            robot: RobotParams::three_sensor(),
            steepness: DEFAULT_STEEPNESS,
            shards: 4,
            heritability_samples: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub runs: u64,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    /// Maze description file; the built-in maze when absent.
    pub maze: Option<PathBuf>,
    /// Write every run's final population next to its record.
    pub export_populations: bool,
    pub distance_metric: DistanceMetric,
    #[serde(rename = "abstract")]
    pub abstract_params: AbstractParams,
    pub robot: RobotDriftParams,
    pub table: TableConfig,
    pub neat: NeatParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelKind::AbstractDrift,
            runs: 50,
            base_seed: 1,
            output_dir: PathBuf::from("out"),
            maze: None,
            export_populations: true,
            distance_metric: DistanceMetric::Euclidean,
            abstract_params: AbstractParams::default(),
            robot: RobotDriftParams::default(),
            table: TableConfig::default(),
            neat: NeatParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// NEAT parameters with the control mode implied by the model.
    pub fn neat_params(&self) -> NeatParams {
        let mut p = self.neat.clone();
        p.control_mode = match self.model {
            ModelKind::NeatRandomControl => ControlMode::RandomNiche,
            _ => ControlMode::BehaviorNiche,
        };
        p
    }

    /// Maze text, from the configured file or the built-in default.
    pub fn maze_text(&self) -> Result<String> {
        match &self.maze {
            Some(p) => std::fs::read_to_string(p).map_err(|e| Error::io(p, e)),
            None => Ok(Maze::default_text().to_string()),
        }
    }

    pub fn robot_params(&self) -> &RobotParams {
        if self.model.is_neat() {
            &self.neat.robot
        } else {
            &self.table.robot
        }
    }

    pub fn load_maze(&self) -> Result<Maze> {
        Maze::parse(&self.maze_text()?, self.robot_params().radius)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs < 1 {
            return Err(Error::config("runs must be at least 1"));
        }
        if self.base_seed.checked_add(self.runs - 1).is_none() {
            return Err(Error::config("base_seed + run index overflows; run seeds would repeat"));
        }
        if let Some(p) = &self.maze {
            if !p.is_file() {
                return Err(Error::config(format!("maze file {} does not exist", p.display())));
            }
        }
        match self.model {
            ModelKind::AbstractDrift | ModelKind::AbstractNiched => self.abstract_params.validate(),
            ModelKind::RobotDrift | ModelKind::RobotNiched => {
                self.robot.validate()?;
                self.table.robot.validate()?;
                if self.table.shards < 1 {
                    return Err(Error::config("table.shards must be at least 1"));
                }
                if self.table.heritability_samples < 3 {
                    return Err(Error::config("table.heritability_samples must be at least 3"));
                }
                if let Some(m) = &self.table.manifest {
                    if !m.is_file() {
                        return Err(Error::config(format!(
                            "table manifest {} does not exist",
                            m.display()
                        )));
                    }
                }
                if self.table.mask.free_count() == 0 {
                    return Err(Error::config("gene mask pins every gene"));
                }
                self.load_maze().map(|_| ())
            }
            ModelKind::NeatNiched | ModelKind::NeatRandomControl => {
                self.neat.validate()?;
                self.load_maze().map(|_| ())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_json_uses_defaults() {
        let c = ExperimentConfig::from_json(r#"{"model": "robot-niched", "runs": 3}"#).unwrap();
        assert_eq!(c.model, ModelKind::RobotNiched);
        assert_eq!(c.runs, 3);
        assert_eq!(c.table.mask, GeneMask::desk_default());
        assert_eq!(c.robot.generations, 250);
        c.validate().unwrap();
    }

    #[test]
    fn json_roundtrip() {
        let c = ExperimentConfig {
            model: ModelKind::NeatRandomControl,
            ..Default::default()
        };
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
        assert_eq!(c.neat_params().control_mode, ControlMode::RandomNiche);
    }

    #[test]
    fn rejects_unknown_fields_and_bad_values() {
        assert!(ExperimentConfig::from_json(r#"{"modle": "abstract-drift"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"abstract": {"pop": 3}}"#).is_err());
        let c = ExperimentConfig::from_json(r#"{"runs": 0}"#).unwrap();
        assert!(c.validate().is_err());
        let c = ExperimentConfig::from_json(r#"{"base_seed": 18446744073709551615, "runs": 2}"#)
            .unwrap();
        assert!(c.validate().is_err());
        let c = ExperimentConfig::from_json(r#"{"abstract": {"evo_mut_prob": 2.0}}"#).unwrap();
        assert!(c.validate().is_err());
        let c = ExperimentConfig::from_json(r#"{"maze": "/nonexistent/maze.txt"}"#).unwrap();
        assert!(c.validate().is_err());
    }
}
