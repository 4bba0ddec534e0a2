use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::checkpoint::Checkpoint;
use super::loss::LossKind;
use super::metrics::{EpochMetrics, MetricLog};
use super::optim::Rmsprop;
use crate::equivariant_nn::Session;
use crate::error::{Error, Result};
use crate::evaluation::{evaluate_fields, snap_to_neighbor, RolloutConfig};
use crate::planner::PolicyModel;
use crate::worlds::{action_discretize, Dataset, NavSample, WorldParams};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    #[default]
    Rmsprop,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    #[serde(default)]
    pub optimizer: Optimizer,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    pub epochs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub loss: LossKind,
    /// Epochs without a better validation success rate before stopping; `None` never stops early.
    #[serde(default = "default_patience")]
    pub patience: Option<usize>,
    /// Rollouts used for the per-epoch validation success rate.
    #[serde(default)]
    pub rollout: RolloutConfig,
}

fn default_lr() -> f64 {
    1e-3
}

fn default_batch() -> usize {
    32
}

fn default_patience() -> Option<usize> {
    Some(10)
}

impl TrainConfig {
    pub fn new(epochs: usize, seed: u64) -> Self {
        Self {
            optimizer: Optimizer::Rmsprop,
            learning_rate: default_lr(),
            batch_size: default_batch(),
            epochs,
            seed,
            loss: LossKind::MseUnit,
            patience: default_patience(),
            rollout: RolloutConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning_rate must be positive, got {}", self.learning_rate)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if self.patience == Some(0) {
            return Err(Error::Config("patience must be positive".into()));
        }
        if self.rollout.max_steps == Some(0) {
            return Err(Error::Config("rollout max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Best-validation parameters (the last epoch without a validation set).
    pub checkpoint: Checkpoint,
    pub log: MetricLog,
}

fn matches_label(sample: &NavSample, node: usize, pred: [f64; 2], grid: bool) -> bool {
    let label = sample.labels[node];
    if grid {
        match (action_discretize(pred), action_discretize(label)) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        }
    } else {
        let p = snap_to_neighbor(&sample.graph, node, pred);
        p.is_some() && p == snap_to_neighbor(&sample.graph, node, label)
    }
}

/// `(matches, supervised nodes)` of a policy field on one sample: the nearest
/// move (NEWS on grids, best-aligned neighbor on graphs) must equal the label's.
pub fn field_matches(sample: &NavSample, policy: &[[f64; 2]], grid: bool) -> (usize, usize) {
    let mask = sample.loss_mask();
    let nodes: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    let hits = nodes.iter().filter(|&&i| matches_label(sample, i, policy[i], grid)).count();
    (hits, nodes.len())
}

/// Masked per-node action match rate over a dataset.
pub fn action_accuracy<M: PolicyModel>(model: &M, dataset: &Dataset) -> Result<f64> {
    let grid = matches!(dataset.world, WorldParams::Grid { .. });
    let (mut hits, mut total) = (0, 0);
    for sample in &dataset.samples {
        if sample.n_supervised() == 0 {
            continue;
        }
        let inputs = model.prepare(sample)?;
        let (h, t) = field_matches(sample, &model.policy(model.params(), &inputs), grid);
        hits += h;
        total += t;
    }
    Ok(if total == 0 { 0.0 } else { hits as f64 / total as f64 })
}

/// Mean loss and averaged gradients of one mini-batch.
fn batch_gradients<M: PolicyModel>(model: &M, batch: &[&M::Inputs], loss: LossKind) -> (f64, Vec<Vec<f32>>) {
    let mut total = 0.0;
    let mut acc: Vec<Vec<f32>> = Vec::new();
    for inputs in batch {
        let mut s = Session::new(model.params(), true);
        let l = model.record_loss(&mut s, inputs, loss);
        total += f64::from(s.tape.scalar(l));
        let grads = s.gradients(l);
        if acc.is_empty() {
            acc = grads;
        } else {
            for (a, g) in acc.iter_mut().zip(&grads) {
                a.iter_mut().zip(g).for_each(|(x, y)| *x += y);
            }
        }
    }
    let k = batch.len() as f32;
    acc.iter_mut().flatten().for_each(|x| *x /= k);
    (total / batch.len() as f64, acc)
}

/// [`train_with`] without a progress callback.
pub fn train<M: PolicyModel>(
    model: &mut M,
    train: &Dataset,
    val: &Dataset,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    train_with(model, train, val, config, |_| {})
}

/// Imitation training with shuffled mini-batches and RMSprop. After each epoch
/// the model is scored on `val`; the best parameters by rollout success (ties
/// keep the earlier epoch) are restored into `model` at the end. Samples without
/// supervised nodes are skipped.
pub fn train_with<M: PolicyModel>(
    model: &mut M,
    train: &Dataset,
    val: &Dataset,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochMetrics),
) -> Result<TrainOutcome> {
    config.validate()?;
    let mut log = MetricLog::new(config.seed);
    let mut best = Checkpoint::capture(model, config, 0, Vec::new())?;
    if config.epochs == 0 {
        return Ok(TrainOutcome { checkpoint: best, log });
    }
    let inputs: Vec<M::Inputs> =
        train.samples.iter().filter(|s| s.n_supervised() > 0).map(|s| model.prepare(s)).collect::<Result<_>>()?;
    if inputs.is_empty() {
        return Err(Error::DegenerateSample);
    }
    let val_inputs: Vec<Option<M::Inputs>> = val
        .samples
        .iter()
        .map(|s| if s.n_supervised() > 0 { model.prepare(s).map(Some) } else { Ok(None) })
        .collect::<Result<_>>()?;
    let grid = matches!(val.world, WorldParams::Grid { .. });
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut opt = Rmsprop::new(config.learning_rate as f32);
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut best_score = f64::NEG_INFINITY;
    let mut since_best = 0;
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&M::Inputs> = chunk.iter().map(|&i| &inputs[i]).collect();
            let (loss, grads) = batch_gradients(model, &batch, config.loss);
            if !loss.is_finite() || grads.iter().flatten().any(|g| !g.is_finite()) {
                return Err(Error::Divergence { epoch, detail: format!("non-finite loss {loss} or gradient") });
            }
            loss_sum += loss * chunk.len() as f64;
            opt.step(model.params_mut(), &grads);
        }
        let mut metrics =
            EpochMetrics { epoch, train_loss: loss_sum / inputs.len() as f64, val_accuracy: None, val_success: None };
        if !val.is_empty() {
            let mut fields = Vec::with_capacity(val.len());
            let (mut hits, mut total) = (0, 0);
            for (sample, inp) in val.samples.iter().zip(&val_inputs) {
                let field = match inp {
                    Some(i) => model.policy(model.params(), i),
                    None => vec![[0.0; 2]; sample.labels.len()],
                };
                let (h, t) = field_matches(sample, &field, grid);
                hits += h;
                total += t;
                fields.push(field);
            }
            let outcomes = evaluate_fields(val, &config.rollout, |i, _| Ok(fields[i].clone()))?;
            metrics.val_accuracy = Some(if total == 0 { 0.0 } else { hits as f64 / total as f64 });
            metrics.val_success = Some(outcomes.rate());
        }
        log.push(metrics)?;
        on_epoch(&metrics);
        let score = metrics.val_success.unwrap_or(f64::INFINITY);
        if score > best_score || metrics.val_success.is_none() {
            best_score = score;
            since_best = 0;
            best = Checkpoint::capture(model, config, epoch, Vec::new())?;
        } else {
            since_best += 1;
            if config.patience.is_some_and(|p| since_best >= p) {
                break;
            }
        }
    }
    best.history = log.epochs.clone();
    model.set_params(best.param_store())?;
    Ok(TrainOutcome { checkpoint: best, log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::{MpVin, PlannerConfig, Variant};
    use crate::symmetry::GroupSpec;
    use crate::worlds::{generate_dataset, GraphWorldParams, Split};

    fn small() -> (MpVin, Dataset, Dataset) {
        let mut cfg = PlannerConfig::graph(Variant::R2Group, Some(GroupSpec::cyclic(4)));
        cfg.iterations = 3;
        cfg.hidden_dim = 16;
        let world = WorldParams::Graph(GraphWorldParams::with_nodes(24));
        let tr = generate_dataset(world, Split::Train, 10, 3).unwrap();
        let va = generate_dataset(world, Split::Val, 4, 3).unwrap();
        (MpVin::new(cfg, 1).unwrap(), tr, va)
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let (mut m, tr, va) = small();
        let before = m.params().flatten();
        let out = train(&mut m, &tr, &va, &TrainConfig::new(0, 5)).unwrap();
        assert!(out.log.epochs.is_empty() && out.checkpoint.history.is_empty());
        assert_eq!(out.checkpoint.epoch, 0);
        assert_eq!(out.checkpoint.param_store().flatten(), before);
    }

    #[test]
    fn one_epoch_and_determinism() {
        let (mut a, tr, va) = small();
        let mut b = a.clone();
        let cfg = TrainConfig { batch_size: 4, ..TrainConfig::new(1, 9) };
        let ra = train(&mut a, &tr, &va, &cfg).unwrap();
        let rb = train(&mut b, &tr, &va, &cfg).unwrap();
        assert_eq!(ra.log.epochs.len(), 1);
        assert!(ra.log.epochs[0].train_loss.is_finite());
        assert_eq!(ra.log, rb.log);
        assert_eq!(a.params().flatten(), b.params().flatten());
    }

    #[test]
    fn checkpoint_reload_is_bit_exact() {
        let (mut m, tr, va) = small();
        let out = train(&mut m, &tr, &va, &TrainConfig::new(2, 4)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        out.checkpoint.save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap();
        assert_eq!(back, out.checkpoint);
        let restored = back.restore().unwrap();
        let g = &va.samples[0].graph;
        let inputs = restored.prepare(&va.samples[0]).unwrap();
        let p1 = restored.policy(restored.params(), &inputs);
        let p0: Vec<[f64; 2]> =
            m.plan(g).unwrap().policy.rows().into_iter().map(|r| [f64::from(r[0]), f64::from(r[1])]).collect();
        assert_eq!(p0, p1);
    }

    #[test]
    fn accuracy_of_labels_and_their_opposites() {
        let world = WorldParams::Grid { size: 7 };
        let d = generate_dataset(world, Split::Test, 3, 2).unwrap();
        for s in &d.samples {
            let (h, t) = field_matches(s, &s.labels, true);
            assert_eq!(h, t);
            let neg: Vec<_> = s.labels.iter().map(|l| [-l[0], -l[1]]).collect();
            assert_eq!(field_matches(s, &neg, true).0, 0);
        }
    }

    #[test]
    fn invalid_config() {
        let mut c = TrainConfig::new(1, 0);
        c.batch_size = 0;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }
}
