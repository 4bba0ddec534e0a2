//! Equivariant message-passing value iteration networks (MP-VIN) for planning
//! on 2D geometric graphs.
//!
//! The crate is organized bottom-up:
//!
//! - [`symmetry`]: the groups `C_n`/`D_n`, their representations, and
//!   intertwiner bases for equivariant linear maps.
//! - [`equivariant_nn`]: a small reverse-mode tape plus equivariant linear layers, MLPs,
//!   message passing, and the `C_K → G` lifting layer.
//! - [`worlds`]: maze and random-graph environments, Dijkstra expert labels,
//!   and the dataset archive format.
//! - [`planner`]: the MP-VIN planner, the grid VIN baseline, an exact tabular
//!   value-iteration oracle, and equivariance audits.
//! - [`training`]: imitation losses, RMSprop, checkpoints and metric logs.
//! - [`evaluation`]: closed-loop rollouts, success rates, and reports.
//! - [`cli`]: experiment configs and the `gen/train/eval/audit/plot` commands.

pub mod cli;
pub mod equivariant_nn;
pub mod error;
pub mod evaluation;
pub mod planner;
pub mod scalar;
pub mod symmetry;
pub mod training;
pub mod worlds;

pub use error::{Error, Result};
pub use scalar::Real;
