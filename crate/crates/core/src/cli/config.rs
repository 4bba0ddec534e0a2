//! The experiment file read by every subcommand.
//!
//! ```toml
//! task = "graph"              # "grid" (maze side) or "graph" (node count)
//! sizes = [128, 256]          # first size trains; every size gets a test split
//! output_dir = "runs/graph"   # relative paths resolve under $MPVIN_OUTPUT_ROOT
//! seeds = [0, 1, 2]           # one model per seed
//! data_seed = 0
//! k = 6                       # graph only
//! obstacle_frac = 0.1         # graph only
//!
//! [datasets]
//! train = 1000
//! val = 200
//! test = 200
//!
//! [planner]
//! kind = "mpvin"              # or "vin" with { iterations, hidden, q_size }
//! config = { variant = "r2_group", group = "D8", iterations = 20, r_dim = 1, q_size = 8, hidden_dim = 64 }
//!
//! [train]                     # optimizer, learning_rate, batch_size, loss, patience, rollout
//! epochs = 30
//!
//! [rollout]                   # max_steps, starts = "all" | { random = 32 }, seed
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::RolloutConfig;
use crate::planner::ModelSpec;
use crate::training::TrainConfig;
use crate::worlds::{GraphWorldParams, Split, WorldParams};

pub const OUTPUT_ROOT_ENV: &str = "MPVIN_OUTPUT_ROOT";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Grid,
    Graph,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSizes {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    pub sizes: Vec<usize>,
    pub output_dir: PathBuf,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub data_seed: u64,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_obstacles")]
    pub obstacle_frac: f64,
    pub datasets: DatasetSizes,
    pub planner: ModelSpec,
    pub train: TrainConfig,
    #[serde(default)]
    pub rollout: RolloutConfig,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_k() -> usize {
    6
}

fn default_obstacles() -> f64 {
    0.1
}

impl ExperimentConfig {
    /// Parses TOML, or JSON when the extension is `.json`, and validates.
    pub fn parse(text: &str, json: bool) -> Result<Self> {
        let cfg: Self = if json {
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.extension().is_some_and(|e| e == "json"))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.sizes.is_empty() {
            return bad("sizes must name at least one size".into());
        }
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        if self.datasets.train == 0 || self.datasets.test == 0 {
            return bad("datasets.train and datasets.test must be positive".into());
        }
        match self.task {
            Task::Grid => {
                if let Some(s) = self.sizes.iter().find(|&&s| s < 3 || s % 2 == 0) {
                    return bad(format!("maze side {s} must be odd and at least 3"));
                }
            }
            Task::Graph => {
                if self.k == 0 || !(0.0..1.0).contains(&self.obstacle_frac) {
                    return bad("k must be positive and obstacle_frac in [0, 1)".into());
                }
                if let Some(s) = self.sizes.iter().find(|&&s| s <= self.k) {
                    return bad(format!("graph size {s} must exceed k = {}", self.k));
                }
            }
        }
        match self.planner {
            ModelSpec::Mpvin(p) => p.validate()?,
            ModelSpec::Vin(v) => {
                if v.iterations == 0 || v.hidden == 0 || v.q_size == 0 {
                    return bad("vin iterations, hidden and q_size must be positive".into());
                }
            }
        }
        self.train.validate()?;
        if self.rollout.max_steps == Some(0) {
            return bad("rollout.max_steps must be at least 1".into());
        }
        Ok(())
    }

    pub fn world(&self, size: usize) -> WorldParams {
        match self.task {
            Task::Grid => WorldParams::Grid { size },
            Task::Graph => WorldParams::Graph(GraphWorldParams {
                k: self.k,
                obstacle_frac: self.obstacle_frac,
                ..GraphWorldParams::with_nodes(size)
            }),
        }
    }

    pub fn train_size(&self) -> usize {
        self.sizes[0]
    }
}

/// Where a run's files live.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunLayout {
    pub root: PathBuf,
}

impl RunLayout {
    /// `--out` wins; otherwise `output_dir`, placed under `$MPVIN_OUTPUT_ROOT` when relative.
    pub fn resolve(cfg: &ExperimentConfig, out: Option<&Path>) -> Self {
        let root = match out {
            Some(p) => p.to_path_buf(),
            None if cfg.output_dir.is_relative() => match std::env::var_os(OUTPUT_ROOT_ENV) {
                Some(r) => PathBuf::from(r).join(&cfg.output_dir),
                None => cfg.output_dir.clone(),
            },
            None => cfg.output_dir.clone(),
        };
        Self { root }
    }

    pub fn dataset(&self, split: Split, size: usize) -> PathBuf {
        self.root.join("data").join(format!("{}_{size}.mpvn", split.name()))
    }

    pub fn seed_dir(&self, seed: u64) -> PathBuf {
        self.root.join(format!("seed_{seed}"))
    }

    pub fn checkpoint(&self, seed: u64) -> PathBuf {
        self.seed_dir(seed).join("checkpoint.json")
    }

    pub fn metrics(&self, seed: u64) -> PathBuf {
        self.seed_dir(seed).join("metrics.csv")
    }

    pub fn eval_dir(&self) -> PathBuf {
        self.root.join("eval")
    }

    pub fn plot_dir(&self) -> PathBuf {
        self.root.join("plots")
    }
}
