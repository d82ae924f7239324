//! Experiment configuration: an optional JSON file overlaid by flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Seed used when neither the config file nor `--seed` sets one.
pub const DEFAULT_SEED: u64 = 0x5EED_0000_2718_2818;
pub const DEFAULT_GRID: usize = 256;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;
pub const DEFAULT_EVENTS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Json => "json",
        })
    }
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub grid: Option<usize>,
    pub epsilon: Option<f64>,
    pub tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
    pub events: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::json(path, &e))
    }
}

/// Settings shared by the subcommands after merging file and flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub grid: usize,
    pub epsilon: Option<f64>,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub events: u64,
    pub seed: u64,
    pub out: PathBuf,
    pub format: Option<Format>,
}

/// Flag values; `None` means not given on the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub grid: Option<usize>,
    pub epsilon: Option<f64>,
    pub tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
    pub events: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl ExperimentConfig {
    pub fn resolve(
        command: &str,
        file: Option<&ConfigFile>,
        flags: &Overrides,
    ) -> Result<Self, CliError> {
        let empty = ConfigFile::default();
        let file = file.unwrap_or(&empty);
        if let Some(c) = &file.command {
            if c != command {
                return Err(CliError::Input(format!(
                    "config file is for command `{c}`, not `{command}`"
                )));
            }
        }
        let cfg = Self {
            command: command.to_owned(),
            grid: flags.grid.or(file.grid).unwrap_or(DEFAULT_GRID),
            epsilon: flags.epsilon.or(file.epsilon),
            tolerance: flags
                .tolerance
                .or(file.tolerance)
                .unwrap_or(DEFAULT_TOLERANCE),
            max_iterations: flags
                .max_iterations
                .or(file.max_iterations)
                .unwrap_or(DEFAULT_MAX_ITERATIONS),
            events: flags.events.or(file.events).unwrap_or(DEFAULT_EVENTS),
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            out: flags
                .out
                .clone()
                .or_else(|| file.out.clone())
                .unwrap_or_else(|| PathBuf::from(".")),
            format: flags.format.or(file.format),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.grid < hiddenvar_core::grid::MIN_SAMPLES {
            return Err(CliError::Input(format!(
                "grid must have at least {} points, got {}",
                hiddenvar_core::grid::MIN_SAMPLES,
                self.grid
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(CliError::Input(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(CliError::Input("max-iterations must be positive".into()));
        }
        if let Some(e) = self.epsilon {
            if !(0.0..1.0).contains(&e) {
                return Err(CliError::Input(format!(
                    "epsilon must lie in [0, 1), got {e}"
                )));
            }
        }
        Ok(())
    }

    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = ConfigFile {
            grid: Some(64),
            seed: Some(9),
            events: Some(10),
            ..Default::default()
        };
        let flags = Overrides {
            seed: Some(3),
            ..Default::default()
        };
        let cfg = ExperimentConfig::resolve("chsh", Some(&file), &flags).unwrap();
        assert_eq!((cfg.grid, cfg.seed, cfg.events), (64, 3, 10));
        assert_eq!(cfg.tolerance, DEFAULT_TOLERANCE);
    }

    #[test]
    fn defaults_and_validation() {
        let cfg = ExperimentConfig::resolve("chain", None, &Overrides::default()).unwrap();
        assert_eq!(cfg.seed, DEFAULT_SEED);
        assert_eq!(cfg.grid, DEFAULT_GRID);
        let bad = Overrides {
            epsilon: Some(1.5),
            ..Default::default()
        };
        assert!(ExperimentConfig::resolve("deconvolve", None, &bad).is_err());
        let bad = Overrides {
            grid: Some(4),
            ..Default::default()
        };
        assert!(ExperimentConfig::resolve("deconvolve", None, &bad).is_err());
    }

    #[test]
    fn command_mismatch() {
        let file = ConfigFile {
            command: Some("osc".into()),
            ..Default::default()
        };
        assert!(ExperimentConfig::resolve("chsh", Some(&file), &Overrides::default()).is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<ConfigFile>(r#"{"grid": 64, "gird": 3}"#).is_err());
    }
}
