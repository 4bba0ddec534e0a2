use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    /// Fraction in `[0, 1]`; `None` without a validation set.
    pub val_accuracy: Option<f64>,
    /// Percent.
    pub val_success: Option<f64>,
}

/// One CSV row: `epoch,split,metric,value,seed`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricRow {
    pub epoch: usize,
    pub split: String,
    pub metric: String,
    pub value: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricLog {
    pub seed: u64,
    pub epochs: Vec<EpochMetrics>,
}

pub const METRIC_HEADER: &str = "epoch,split,metric,value,seed";

impl MetricLog {
    pub fn new(seed: u64) -> Self {
        Self { seed, epochs: Vec::new() }
    }

    /// Appends an epoch; indices must increase.
    pub fn push(&mut self, m: EpochMetrics) -> Result<()> {
        if self.epochs.last().is_some_and(|last| last.epoch >= m.epoch) {
            return Err(Error::Model(format!("epoch {} logged out of order", m.epoch)));
        }
        self.epochs.push(m);
        Ok(())
    }

    pub fn rows(&self) -> Vec<MetricRow> {
        let row = |epoch, split: &str, metric: &str, value| MetricRow {
            epoch,
            split: split.into(),
            metric: metric.into(),
            value,
            seed: self.seed,
        };
        let mut out = Vec::new();
        for m in &self.epochs {
            out.push(row(m.epoch, "train", "loss", m.train_loss));
            if let Some(a) = m.val_accuracy {
                out.push(row(m.epoch, "val", "action_accuracy", a));
            }
            if let Some(s) = m.val_success {
                out.push(row(m.epoch, "val", "success_rate", s));
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{METRIC_HEADER}\n");
        for r in self.rows() {
            let _ = writeln!(s, "{},{},{},{},{}", r.epoch, r.split, r.metric, r.value, r.seed);
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        Ok(fs::write(path, self.to_csv())?)
    }
}

pub fn parse_metric_csv(text: &str) -> Result<Vec<MetricRow>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(METRIC_HEADER) {
        return Err(Error::Corrupt(format!("metric CSV must start with '{METRIC_HEADER}'")));
    }
    let bad = |l: &str| Error::Corrupt(format!("bad metric row '{l}'"));
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 5 {
                return Err(bad(l));
            }
            Ok(MetricRow {
                epoch: f[0].parse().map_err(|_| bad(l))?,
                split: f[1].into(),
                metric: f[2].into(),
                value: f[3].parse().map_err(|_| bad(l))?,
                seed: f[4].parse().map_err(|_| bad(l))?,
            })
        })
        .collect()
}

pub fn read_metric_csv(path: &Path) -> Result<Vec<MetricRow>> {
    parse_metric_csv(&fs::read_to_string(path)?)
}
