//! The full command-line pipeline on a tiny experiment: gen, train, eval, audit, plot.

use clap::Parser;
use mpvin::cli::{run, Cli};

const CONFIG: &str = r#"
task = "graph"
sizes = [40, 80]
output_dir = "tiny"
seeds = [0]

[datasets]
train = 16
val = 4
test = 8

[planner]
kind = "mpvin"
config = { variant = "r2_group", group = "D4", iterations = 8, r_dim = 1, q_size = 4, hidden_dim = 16 }

[train]
epochs = 3
batch_size = 4
"#;

fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    let config = dir.path().join("tiny.toml");
    std::fs::write(&config, CONFIG)?;
    let out = dir.path().join("run");
    for cmd in ["gen", "train", "eval", "audit", "plot"] {
        let args = ["mpvin", cmd, config.to_str().unwrap(), "--out", out.to_str().unwrap()];
        run(Cli::try_parse_from(args)?)?;
    }
    println!("{}", std::fs::read_to_string(out.join("eval/results.csv"))?);
    let mut files: Vec<_> = walk(&out);
    files.sort();
    for f in files {
        println!("{}", f.strip_prefix(&out)?.display());
    }
    Ok(())
}

fn walk(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    std::fs::read_dir(dir)
        .into_iter()
        .flatten()
        .flatten()
        .flat_map(|e| if e.path().is_dir() { walk(&e.path()) } else { vec![e.path()] })
        .collect()
}
