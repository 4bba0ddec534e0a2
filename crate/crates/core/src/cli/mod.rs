//! The `mpvin` command line: `gen`, `train`, `eval`, `audit` and `plot`, each
//! driven by one experiment file.

mod commands;
mod config;

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{cmd_audit, cmd_eval, cmd_gen, cmd_plot, cmd_train, AuditRecord, EvalPolicy};
pub use config::{DatasetSizes, ExperimentConfig, RunLayout, Task, OUTPUT_ROOT_ENV};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "mpvin", version, about = "Equivariant message-passing value iteration for graph navigation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Experiment file (TOML, or JSON by extension).
    pub config: PathBuf,
    /// Output directory; overrides `output_dir` and the output-root variable.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run a single seed instead of the configured list.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overwrite existing outputs.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate dataset archives.
    Gen(CommonArgs),
    /// Train one model per seed.
    Train(CommonArgs),
    /// Roll out trained models (or a reference policy) on the test splits.
    Eval {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = EvalPolicy::Model)]
        policy: EvalPolicy,
    },
    /// Check representations and policy equivariance of trained models.
    Audit(CommonArgs),
    /// Render learning curves and success-rate bars.
    Plot(CommonArgs),
}

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidOrder(_) | Error::InvalidEmbedding(_) | Error::FieldType(_) => 2,
        Error::MissingData(_)
        | Error::MissingCheckpoint(_)
        | Error::Version { .. }
        | Error::Corrupt(_)
        | Error::Generation(_)
        | Error::Graph(_)
        | Error::DegenerateSample => 3,
        Error::Divergence { .. } => 4,
        _ => 1,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let (common, policy) = match &cli.command {
        Command::Gen(c) | Command::Train(c) | Command::Audit(c) | Command::Plot(c) => (c, EvalPolicy::Model),
        Command::Eval { common, policy } => (common, *policy),
    };
    let mut cfg = ExperimentConfig::from_path(&common.config)?;
    if let Some(s) = common.seed {
        cfg.seeds = vec![s];
    }
    let layout = RunLayout::resolve(&cfg, common.out.as_deref());
    fs::create_dir_all(&layout.root)?;
    let ext = common.config.extension().and_then(|e| e.to_str()).unwrap_or("toml");
    fs::copy(&common.config, layout.root.join(format!("config.{ext}")))?;
    match cli.command {
        Command::Gen(_) => cmd_gen(&cfg, &layout, common.force).map(drop),
        Command::Train(_) => cmd_train(&cfg, &layout, common.force).map(drop),
        Command::Eval { .. } => cmd_eval(&cfg, &layout, common.force, policy).map(drop),
        Command::Audit(_) => cmd_audit(&cfg, &layout).map(drop),
        Command::Plot(_) => cmd_plot(&cfg, &layout).map(drop),
    }
}
