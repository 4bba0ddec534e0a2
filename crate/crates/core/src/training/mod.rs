//! Imitation training: losses, RMSprop, checkpoints and metric logs.

mod checkpoint;
mod loss;
mod metrics;
mod optim;
mod trainer;

pub use checkpoint::{Checkpoint, NamedArray, CHECKPOINT_VERSION};
pub use loss::{policy_loss, LossKind};
pub use metrics::{parse_metric_csv, read_metric_csv, EpochMetrics, MetricLog, MetricRow, METRIC_HEADER};
pub use optim::Rmsprop;
pub use trainer::{action_accuracy, field_matches, train, train_with, Optimizer, TrainConfig, TrainOutcome};
