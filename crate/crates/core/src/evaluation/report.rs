use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::plot::{bar_chart, line_chart, Series};
use super::rollout::{evaluate_model, Outcomes, RolloutConfig};
use crate::error::Result;
use crate::planner::PolicyModel;
use crate::worlds::{Dataset, WorldParams};

/// Success rate of one configuration, aggregated over model seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: String,
    pub variant: String,
    pub seeds: Vec<u64>,
    pub dataset_size: usize,
    pub graph_size: usize,
    /// Percent per seed.
    pub rates: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation over seeds; zero for a single seed.
    pub sd: f64,
    pub rollout: RolloutConfig,
    pub outcomes: Vec<Outcomes>,
}

pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn task_name(world: &WorldParams) -> &'static str {
    match world {
        WorldParams::Grid { .. } => "grid",
        WorldParams::Graph(_) => "graph",
    }
}

pub fn graph_size(world: &WorldParams) -> usize {
    match world {
        WorldParams::Grid { size } => size * size,
        WorldParams::Graph(p) => p.nodes,
    }
}

impl EvalReport {
    pub fn from_outcomes(
        variant: &str,
        seeds: Vec<u64>,
        train_size: usize,
        dataset: &Dataset,
        rollout: RolloutConfig,
        outcomes: Vec<Outcomes>,
    ) -> Self {
        let rates: Vec<f64> = outcomes.iter().map(Outcomes::rate).collect();
        let (mean, sd) = mean_sd(&rates);
        Self {
            task: task_name(&dataset.world).into(),
            variant: variant.into(),
            seeds,
            dataset_size: train_size,
            graph_size: graph_size(&dataset.world),
            rates,
            mean,
            sd,
            rollout,
            outcomes,
        }
    }
}

/// Success rate of each seed's model on `dataset`; `train_size` is echoed in the report.
pub fn success_rate<M: PolicyModel>(
    models: &[(u64, &M)],
    dataset: &Dataset,
    train_size: usize,
    config: &RolloutConfig,
) -> Result<EvalReport> {
    let variant = models.first().map_or_else(String::new, |m| m.1.name());
    let outcomes = models.iter().map(|(_, m)| evaluate_model(*m, dataset, config)).collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_outcomes(
        &variant,
        models.iter().map(|m| m.0).collect(),
        train_size,
        dataset,
        *config,
        outcomes,
    ))
}

/// Evaluates the same models on datasets of other sizes without retraining.
pub fn size_generalization<M: PolicyModel>(
    models: &[(u64, &M)],
    datasets: &[Dataset],
    train_size: usize,
    config: &RolloutConfig,
) -> Result<Vec<EvalReport>> {
    datasets.iter().map(|d| success_rate(models, d, train_size, config)).collect()
}

pub const REPORT_HEADER: &str = "task,variant,group,seed,dataset_size,graph_size,success_rate,sd";

/// Writes `results.csv` (one row per report) and `results.png` (bars with ±sd).
pub fn emit_report(reports: &[EvalReport], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut csv = String::from(REPORT_HEADER);
    csv.push('\n');
    for r in reports {
        let (variant, group) = match r.variant.split_once('(') {
            Some((v, g)) => (v.to_string(), g.trim_end_matches(')').to_string()),
            None => (r.variant.clone(), String::new()),
        };
        let seeds: Vec<String> = r.seeds.iter().map(u64::to_string).collect();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{:.4},{:.4}",
            r.task,
            variant,
            group,
            seeds.join(";"),
            r.dataset_size,
            r.graph_size,
            r.mean,
            r.sd
        );
    }
    let csv_path = dir.join("results.csv");
    fs::write(&csv_path, csv)?;
    let png_path = dir.join("results.png");
    bar_chart(&reports.iter().map(|r| (r.mean, r.sd)).collect::<Vec<_>>(), &png_path)?;
    Ok(vec![csv_path, png_path])
}

/// One line per label: the per-epoch mean of `values` across seeds with a
/// standard-error band.
pub fn learning_curve_series(label: &str, runs: &[Vec<(usize, f64)>]) -> Series {
    let mut by_epoch: std::collections::BTreeMap<usize, Vec<f64>> = Default::default();
    for run in runs {
        for &(e, v) in run {
            by_epoch.entry(e).or_default().push(v);
        }
    }
    let points = by_epoch
        .into_iter()
        .map(|(e, vs)| {
            let (m, sd) = mean_sd(&vs);
            (e as f64, m, sd / (vs.len() as f64).sqrt())
        })
        .collect();
    Series { label: label.into(), points }
}

pub fn plot_learning_curves(series: &[Series], path: &Path) -> Result<()> {
    line_chart(series, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_for_empty_list() {
        let dir = tempfile::tempdir().unwrap();
        let files = emit_report(&[], dir.path()).unwrap();
        assert_eq!(fs::read_to_string(&files[0]).unwrap(), format!("{REPORT_HEADER}\n"));
        assert!(files[1].exists());
    }

    #[test]
    fn two_seed_sd() {
        let (m, sd) = mean_sd(&[60.0, 70.0]);
        assert_eq!(m, 65.0);
        assert!((sd - 50f64.sqrt()).abs() < 1e-12);
        assert_eq!(mean_sd(&[42.0]), (42.0, 0.0));
    }

    #[test]
    fn learning_curve_png() {
        let dir = tempfile::tempdir().unwrap();
        let s = learning_curve_series("a", &[vec![(1, 0.2), (2, 0.5)], vec![(1, 0.4), (2, 0.7)]]);
        assert_eq!(s.points[0].1, 0.30000000000000004);
        let p = dir.path().join("c.png");
        plot_learning_curves(&[s], &p).unwrap();
        assert!(image::open(&p).is_ok());
    }
}
