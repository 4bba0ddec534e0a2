//! The MP-VIN planner, the grid VIN baseline, and a tabular value-iteration oracle.

mod audit;
mod config;
mod mpvin;
mod oracle;
mod policy;
mod vin;

pub use audit::{equivariance_audit, max_violation, transform_graph, AuditEntry};
pub use config::{PlannerConfig, Variant};
pub use mpvin::{GraphInputs, MpVin, PlanOutput};
pub use oracle::{exact_vi_oracle, TabularMdp, ValueTable};
pub use policy::{sample_grid, ModelSpec, MpVinInputs, Planner, PlannerInputs, PolicyModel, VinInputs};
pub use vin::{GridInputs, GridVin, VinConfig};
