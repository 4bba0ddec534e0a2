use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::equivariant_nn::Tape;
use crate::error::{Error, Result};

/// Imitation loss on the per-node movement vectors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// Squared distance to the unit label, summed over both components and
    /// averaged over supervised nodes.
    #[default]
    MseUnit,
    /// `1 − cos(pred, label)` averaged over supervised nodes.
    Cosine,
}

/// Loss of a fixed prediction against labels over the masked nodes.
pub fn policy_loss(pred: &[[f64; 2]], labels: &[[f64; 2]], mask: &[bool], kind: LossKind) -> Result<f64> {
    let count = mask.iter().filter(|&&m| m).count();
    if count == 0 {
        return Err(Error::DegenerateSample);
    }
    if pred.len() != labels.len() || mask.len() != labels.len() {
        return Err(Error::Shape { expected: labels.len(), got: pred.len().min(mask.len()) });
    }
    let to_array = |v: &[[f64; 2]]| Array2::from_shape_fn((v.len(), 2), |(i, c)| v[i][c]);
    let w = 1.0 / count as f64;
    let weights = Arc::new(mask.iter().map(|&m| if m { w } else { 0.0 }).collect());
    let mut tape = Tape::new();
    let p = tape.constant(to_array(pred));
    let target = Arc::new(to_array(labels));
    let out = match kind {
        LossKind::MseUnit => tape.masked_mse(p, target, weights),
        LossKind::Cosine => tape.masked_cosine(p, target, weights),
    };
    Ok(tape.scalar(out))
}
