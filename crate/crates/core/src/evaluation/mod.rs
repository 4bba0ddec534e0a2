//! Closed-loop rollouts, success rates over seeds, and CSV/PNG reports.

mod plot;
mod report;
mod rollout;

pub use plot::{bar_chart, line_chart, Series};
pub use report::{
    emit_report, graph_size, learning_curve_series, mean_sd, plot_learning_curves, size_generalization, success_rate,
    task_name, EvalReport, REPORT_HEADER,
};
pub use rollout::{
    cosine, evaluate_fields, evaluate_model, evaluate_oracle, evaluate_random, rollout, rollout_with, sample_starts,
    snap_to_neighbor, Outcomes, Rollout, RolloutConfig, StartSampling,
};
