use std::fs;
use std::path::Path;
use std::process::Command;

use mpvin::cli::{cmd_audit, cmd_eval, cmd_gen, cmd_plot, cmd_train, EvalPolicy, ExperimentConfig, RunLayout};
use mpvin::training::Checkpoint;
use mpvin::Error;

const CONFIG: &str = r#"
task = "graph"
sizes = [40, 60]
output_dir = "run"
seeds = [0, 1]

[datasets]
train = 6
val = 3
test = 3

[planner]
kind = "mpvin"
config = { variant = "r2_group", group = "C4", iterations = 3, r_dim = 1, q_size = 2, hidden_dim = 16 }

[train]
epochs = 2
batch_size = 3
"#;

fn setup(dir: &Path, text: &str) -> (ExperimentConfig, RunLayout) {
    let cfg = ExperimentConfig::parse(text, false).unwrap();
    let layout = RunLayout::resolve(&cfg, Some(&dir.join("run")));
    (cfg, layout)
}

#[test]
fn full_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, layout) = setup(dir.path(), CONFIG);

    let files = cmd_gen(&cfg, &layout, false).unwrap();
    assert_eq!(files.len(), 4);
    let first = fs::read(&files[0]).unwrap();
    assert!(matches!(cmd_gen(&cfg, &layout, false), Err(Error::OutputExists(_))));
    cmd_gen(&cfg, &layout, true).unwrap();
    assert_eq!(fs::read(&files[0]).unwrap(), first);

    assert!(matches!(cmd_eval(&cfg, &layout, false, EvalPolicy::Model), Err(Error::MissingCheckpoint(_))));
    let oracle = cmd_eval(&cfg, &layout, false, EvalPolicy::Oracle).unwrap();
    assert!(oracle.iter().all(|r| r.mean == 100.0));

    let outcomes = cmd_train(&cfg, &layout, false).unwrap();
    assert_eq!(outcomes.len(), 2);
    assert!(layout.metrics(1).exists());
    assert!(Checkpoint::load(&layout.checkpoint(0)).is_ok());

    let reports = cmd_eval(&cfg, &layout, true, EvalPolicy::Model).unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[1].graph_size, 60);
    let csv = fs::read_to_string(layout.eval_dir().join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(1).unwrap().starts_with("graph,r2_group,C4,0;1,6,40,"));

    let audit = cmd_audit(&cfg, &layout).unwrap();
    assert!(audit.iter().all(|a| a.policy_f32.unwrap() <= 1e-5 && a.representation <= 1e-10));

    let plots = cmd_plot(&cfg, &layout).unwrap();
    assert!(plots.iter().any(|p| p.ends_with("learning_curve_success_rate.png")));
    assert!(plots.iter().all(|p| image::open(p).is_ok()));
}

#[test]
fn zero_epochs_writes_initial_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, layout) =
        setup(dir.path(), &CONFIG.replace("epochs = 2", "epochs = 0").replace("seeds = [0, 1]", "seeds = [3]"));
    cmd_gen(&cfg, &layout, false).unwrap();
    cmd_train(&cfg, &layout, false).unwrap();
    let ck = Checkpoint::load(&layout.checkpoint(3)).unwrap();
    assert_eq!(ck.epoch, 0);
    assert!(ck.history.is_empty());
    assert_eq!(ck.params, Checkpoint::capture(&cfg.planner.build(3).unwrap(), &ck.train, 0, vec![]).unwrap().params);
}

fn run_bin(args: &[&str], root: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_mpvin"))
        .args(args)
        .env("MPVIN_OUTPUT_ROOT", root)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

#[test]
fn binary_exit_codes_and_output_root() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("exp.toml");
    fs::write(&good, CONFIG).unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, CONFIG.replace("task = \"graph\"", "task = \"graph\"\nunknown = 1")).unwrap();
    let g = good.to_str().unwrap();

    assert_eq!(run_bin(&["gen", bad.to_str().unwrap()], dir.path()), 2);
    assert_eq!(run_bin(&["eval", g], dir.path()), 3);
    assert_eq!(run_bin(&["gen", g], dir.path()), 0);
    assert!(dir.path().join("run/data/test_60.mpvn").exists());
    assert!(dir.path().join("run/config.toml").exists());
    assert_eq!(run_bin(&["gen", g], dir.path()), 1);
    assert_eq!(run_bin(&["eval", g, "--policy", "oracle"], dir.path()), 0);
    assert_eq!(run_bin(&["train", g, "--seed", "4"], dir.path()), 0);
    assert!(dir.path().join("run/seed_4/checkpoint.json").exists());

    let diverge = dir.path().join("diverge.toml");
    fs::write(&diverge, CONFIG.replace("batch_size = 3", "batch_size = 3\nlearning_rate = 1e30")).unwrap();
    assert_eq!(
        run_bin(
            &["train", diverge.to_str().unwrap(), "--out", dir.path().join("run").to_str().unwrap(), "--force"],
            dir.path()
        ),
        4
    );
}
