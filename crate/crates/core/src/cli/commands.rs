use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ExperimentConfig, RunLayout};
use crate::error::{Error, Result};
use crate::evaluation::{
    bar_chart, emit_report, evaluate_oracle, evaluate_random, learning_curve_series, mean_sd, plot_learning_curves,
    success_rate, EvalReport,
};
use crate::planner::{equivariance_audit, max_violation, Planner, PolicyModel};
use crate::symmetry::{check_representation, rep_regular, rep_standard, rep_trivial, GroupSpec};
use crate::training::{read_metric_csv, train_with, Checkpoint, TrainConfig, TrainOutcome};
use crate::worlds::{generate_dataset, Dataset, Split};

/// Policy scored by `eval`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum EvalPolicy {
    #[default]
    Model,
    /// Replays the expert labels.
    Oracle,
    Random,
}

fn guard(path: &Path, force: bool) -> Result<()> {
    if path.exists() && !force {
        return Err(Error::OutputExists(path.to_path_buf()));
    }
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    Ok(fs::write(path, serde_json::to_vec_pretty(value)?)?)
}

/// Generates train/val splits at the training size and a test split at every size.
pub fn cmd_gen(cfg: &ExperimentConfig, layout: &RunLayout, force: bool) -> Result<Vec<PathBuf>> {
    let mut jobs = vec![(Split::Train, cfg.train_size(), cfg.datasets.train)];
    if cfg.datasets.val > 0 {
        jobs.push((Split::Val, cfg.train_size(), cfg.datasets.val));
    }
    jobs.extend(cfg.sizes.iter().map(|&s| (Split::Test, s, cfg.datasets.test)));
    jobs.dedup();
    for &(split, size, _) in &jobs {
        guard(&layout.dataset(split, size), force)?;
    }
    fs::create_dir_all(layout.root.join("data"))?;
    let mut out = Vec::new();
    for (split, size, count) in jobs {
        let path = layout.dataset(split, size);
        generate_dataset(cfg.world(size), split, count, cfg.data_seed)?.save(&path)?;
        eprintln!("wrote {} ({count} samples)", path.display());
        out.push(path);
    }
    Ok(out)
}

fn load_split(layout: &RunLayout, split: Split, size: usize) -> Result<Dataset> {
    Dataset::load(&layout.dataset(split, size))
}

/// Trains one model per seed; writes `seed_<s>/checkpoint.json` and `metrics.csv`.
pub fn cmd_train(cfg: &ExperimentConfig, layout: &RunLayout, force: bool) -> Result<Vec<TrainOutcome>> {
    for &seed in &cfg.seeds {
        guard(&layout.checkpoint(seed), force)?;
    }
    let train = load_split(layout, Split::Train, cfg.train_size())?;
    let val = if cfg.datasets.val > 0 {
        load_split(layout, Split::Val, cfg.train_size())?
    } else {
        Dataset { split: Split::Val, seed: cfg.data_seed, world: train.world, samples: Vec::new() }
    };
    let mut outcomes = Vec::new();
    for &seed in &cfg.seeds {
        let mut model = cfg.planner.build(seed)?;
        let tc = TrainConfig { seed, ..cfg.train.clone() };
        let out = train_with(&mut model, &train, &val, &tc, |m| {
            eprintln!(
                "seed {seed} epoch {:>3}  loss {:.4}  val acc {}  val success {}",
                m.epoch,
                m.train_loss,
                m.val_accuracy.map_or("-".into(), |a| format!("{a:.3}")),
                m.val_success.map_or("-".into(), |s| format!("{s:.1}%")),
            )
        })?;
        fs::create_dir_all(layout.seed_dir(seed))?;
        out.checkpoint.save(&layout.checkpoint(seed))?;
        out.log.write_csv(&layout.metrics(seed))?;
        outcomes.push(out);
    }
    Ok(outcomes)
}

fn load_models(cfg: &ExperimentConfig, layout: &RunLayout) -> Result<Vec<(u64, Planner)>> {
    cfg.seeds.iter().map(|&s| Ok((s, Checkpoint::load(&layout.checkpoint(s))?.restore()?))).collect()
}

/// Success rates at every configured size; writes `eval/results.csv`, `results.png`, `reports.json`.
pub fn cmd_eval(
    cfg: &ExperimentConfig,
    layout: &RunLayout,
    force: bool,
    policy: EvalPolicy,
) -> Result<Vec<EvalReport>> {
    let dir = layout.eval_dir();
    guard(&dir.join("results.csv"), force)?;
    let models = if policy == EvalPolicy::Model { load_models(cfg, layout)? } else { Vec::new() };
    let refs: Vec<(u64, &Planner)> = models.iter().map(|(s, m)| (*s, m)).collect();
    let mut reports = Vec::new();
    for &size in &cfg.sizes {
        let test = load_split(layout, Split::Test, size)?;
        let report = match policy {
            EvalPolicy::Model => success_rate(&refs, &test, cfg.datasets.train, &cfg.rollout)?,
            EvalPolicy::Oracle => {
                let o = evaluate_oracle(&test, &cfg.rollout)?;
                EvalReport::from_outcomes("oracle", vec![], cfg.datasets.train, &test, cfg.rollout, vec![o])
            }
            EvalPolicy::Random => {
                let o = evaluate_random(&test, &cfg.rollout)?;
                EvalReport::from_outcomes(
                    "random",
                    vec![cfg.rollout.seed],
                    cfg.datasets.train,
                    &test,
                    cfg.rollout,
                    vec![o],
                )
            }
        };
        eprintln!("size {size}: {} success {:.2} ± {:.2}%", report.variant, report.mean, report.sd);
        reports.push(report);
    }
    emit_report(&reports, &dir)?;
    write_json(&dir.join("reports.json"), &reports)?;
    Ok(reports)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditRecord {
    pub seed: u64,
    pub model: String,
    pub group: GroupSpec,
    /// Largest homomorphism residual over the trivial, standard and regular reps.
    pub representation: f64,
    /// Largest relative policy violation, single and double precision; absent for the grid VIN.
    pub policy_f32: Option<f64>,
    pub policy_f64: Option<f64>,
}

/// Group checks of every checkpoint on up to five test graphs; writes `audit.json`.
pub fn cmd_audit(cfg: &ExperimentConfig, layout: &RunLayout) -> Result<Vec<AuditRecord>> {
    let test = load_split(layout, Split::Test, cfg.train_size())?;
    let graphs: Vec<_> = test.samples.iter().take(5).map(|s| &s.graph).collect();
    let mut records = Vec::new();
    for (seed, model) in load_models(cfg, layout)? {
        let group = match &model {
            Planner::Mpvin(m) if !m.group().is_trivial() => m.group(),
            _ => GroupSpec::dihedral(4),
        };
        let representation = [rep_trivial(group), rep_standard(group), rep_regular(group)]
            .iter()
            .map(check_representation)
            .fold(0.0, f64::max);
        let (mut p32, mut p64) = (None, None);
        if let Planner::Mpvin(m) = &model {
            let wide = m.params().cast::<f64>();
            let (mut a, mut b) = (0.0f64, 0.0f64);
            for g in &graphs {
                a = a.max(max_violation(&equivariance_audit(m, m.params(), g, group)?));
                b = b.max(max_violation(&equivariance_audit(m, &wide, g, group)?));
            }
            (p32, p64) = (Some(a), Some(b));
        }
        let r = AuditRecord { seed, model: model.name(), group, representation, policy_f32: p32, policy_f64: p64 };
        println!(
            "seed {seed} {} over {group}: representation {:.3e}, policy max violation f32 {} f64 {}",
            r.model,
            r.representation,
            p32.map_or("n/a".into(), |v| format!("{v:.3e}")),
            p64.map_or("n/a".into(), |v| format!("{v:.3e}")),
        );
        records.push(r);
    }
    write_json(&layout.root.join("audit.json"), &records)?;
    Ok(records)
}

/// Learning curves from the per-seed metric CSVs and a bar chart from the eval CSV.
pub fn cmd_plot(cfg: &ExperimentConfig, layout: &RunLayout) -> Result<Vec<PathBuf>> {
    let mut runs = Vec::new();
    for &seed in &cfg.seeds {
        let path = layout.metrics(seed);
        if !path.exists() {
            return Err(Error::MissingData(path));
        }
        runs.push(read_metric_csv(&path)?);
    }
    let dir = layout.plot_dir();
    fs::create_dir_all(&dir)?;
    let label = cfg.planner.build(0)?.name();
    let mut out = Vec::new();
    for (split, metric) in [("train", "loss"), ("val", "action_accuracy"), ("val", "success_rate")] {
        let per_seed: Vec<Vec<(usize, f64)>> = runs
            .iter()
            .map(|rows| {
                rows.iter().filter(|r| r.split == split && r.metric == metric).map(|r| (r.epoch, r.value)).collect()
            })
            .collect();
        if per_seed.iter().all(Vec::is_empty) {
            continue;
        }
        let path = dir.join(format!("learning_curve_{metric}.png"));
        plot_learning_curves(&[learning_curve_series(&label, &per_seed)], &path)?;
        out.push(path);
    }
    let results = layout.eval_dir().join("results.csv");
    if results.exists() {
        let text = fs::read_to_string(&results)?;
        let bars = text
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                let num = |i: usize| f.get(i).and_then(|v| v.parse::<f64>().ok());
                num(6).zip(num(7)).ok_or_else(|| Error::Corrupt(format!("bad results row '{l}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        let path = dir.join("success_rates.png");
        bar_chart(&bars, &path)?;
        out.push(path);
    }
    let finals: Vec<f64> = runs
        .iter()
        .filter_map(|rows| rows.iter().rev().find(|r| r.metric == "success_rate").map(|r| r.value))
        .collect();
    if !finals.is_empty() {
        let (m, sd) = mean_sd(&finals);
        eprintln!("final val success {m:.2} ± {sd:.2}% over {} seeds", finals.len());
    }
    Ok(out)
}
