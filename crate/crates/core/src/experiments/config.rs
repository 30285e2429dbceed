use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{uniform_grid, Thresholds};
use crate::convexity::Sampling;
use crate::error::{Error, Result};
use crate::par::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    Svg,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "svg" => Ok(OutputFormat::Svg),
            other => Err(Error::Parse(format!("unknown format `{other}`"))),
        }
    }
}

/// Everything an experiment needs; the seed alone determines all sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub manifold: Option<String>,
    pub regions: Vec<String>,
    pub p: Option<Vec<f64>>,
    pub lambda: f64,
    pub lambda_grid: Vec<f64>,
    pub seed: u64,
    pub n_pairs: usize,
    pub t_steps: usize,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub execution: Execution,
    pub thresholds: Thresholds,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            manifold: None,
            regions: Vec::new(),
            p: None,
            lambda: 0.5,
            lambda_grid: uniform_grid(20),
            seed: 42,
            n_pairs: 200,
            t_steps: 65,
            out: None,
            format: OutputFormat::Json,
            execution: Execution::default(),
            thresholds: Thresholds::default(),
        }
    }
}

fn numbers(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("`{key}`: bad number `{t}`")))
        })
        .collect()
}

fn scalar<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("`{key}`: bad value `{value}`")))
}

impl ExperimentConfig {
    pub fn sampling(&self) -> Sampling {
        Sampling {
            n_pairs: self.n_pairs,
            t_steps: self.t_steps,
            seed: self.seed,
            execution: self.execution,
            ..Sampling::default()
        }
    }

    /// Applies one `key value` setting. Keys mirror the CLI flags.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().trim_start_matches("--");
        let value = value.trim();
        match key {
            "manifold" => self.manifold = Some(value.to_string()),
            "region" => self.regions.push(value.to_string()),
            "p" => self.p = Some(numbers(key, value)?),
            "lambda" => self.lambda = scalar(key, value)?,
            "grid" => self.lambda_grid = numbers(key, value)?,
            "seed" => self.seed = scalar(key, value)?,
            "pairs" => self.n_pairs = scalar(key, value)?,
            "t-steps" | "t_steps" => self.t_steps = scalar(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = value.parse()?,
            "execution" => {
                self.execution = match value {
                    "sequential" => Execution::Sequential,
                    "parallel" => Execution::Parallel,
                    other => return Err(Error::Parse(format!("unknown execution `{other}`"))),
                }
            }
            other => return Err(Error::Parse(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Flat `key = value` (or `key value`) lines; `#` starts a comment.
    pub fn parse_file_contents(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .or_else(|| line.split_once(char::is_whitespace))
                .ok_or_else(|| {
                    Error::Parse(format!("line {}: expected `key = value`", lineno + 1))
                })?;
            cfg.set(key, value)
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse_file_contents(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = ExperimentConfig::default();
        assert_eq!((c.seed, c.n_pairs, c.t_steps), (42, 200, 65));
        assert_eq!(c.lambda_grid.len(), 20);
        assert_eq!(c.lambda_grid[0], 0.05);
        assert_eq!(c.lambda_grid[19], 1.0);
    }

    #[test]
    fn parses_flat_file() {
        let c = ExperimentConfig::parse_file_contents(
            "# scene\nmanifold = sphere:2\nregion cap 0 0 1 0.5\nregion = hemisphere 0 0 1\np = 0 0 1\nseed = 7\ngrid = 0.25 0.5\nt-steps 33\nformat = csv\n",
        )
        .unwrap();
        assert_eq!(c.manifold.as_deref(), Some("sphere:2"));
        assert_eq!(c.regions.len(), 2);
        assert_eq!(c.p, Some(vec![0.0, 0.0, 1.0]));
        assert_eq!(c.seed, 7);
        assert_eq!(c.lambda_grid, vec![0.25, 0.5]);
        assert_eq!(c.t_steps, 33);
        assert_eq!(c.format, OutputFormat::Csv);
        assert!(ExperimentConfig::parse_file_contents("bogus = 1").is_err());
        assert!(ExperimentConfig::parse_file_contents("seed = x").is_err());
    }
}
