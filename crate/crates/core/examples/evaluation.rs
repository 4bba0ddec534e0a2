//! Rollout success rates for a planner, the expert and a random policy, written as a report.

use mpvin::evaluation::{emit_report, evaluate_oracle, evaluate_random, success_rate, EvalReport, RolloutConfig};
use mpvin::planner::{MpVin, PlannerConfig, Variant};
use mpvin::worlds::{generate_dataset, Split, WorldParams};

fn main() -> mpvin::Result<()> {
    let world = WorldParams::Grid { size: 11 };
    let test = generate_dataset(world, Split::Test, 20, 3)?;
    let rollout = RolloutConfig::default();
    println!("budget {} steps, starts {:?}", rollout.budget(&world), rollout.sampling(&world));

    let model = MpVin::new(PlannerConfig::grid(Variant::NoSym, None), 0)?;
    let untrained = success_rate(&[(0, &model)], &test, 0, &rollout)?;
    let expert =
        EvalReport::from_outcomes("expert", vec![0], 0, &test, rollout, vec![evaluate_oracle(&test, &rollout)?]);
    let random =
        EvalReport::from_outcomes("random", vec![0], 0, &test, rollout, vec![evaluate_random(&test, &rollout)?]);
    for r in [&untrained, &expert, &random] {
        println!("{:>8}: {:.1}%", r.variant, r.mean);
    }

    let dir = tempfile::tempdir()?;
    for path in emit_report(&[untrained, expert, random], dir.path())? {
        println!("wrote {}", path.file_name().unwrap().to_string_lossy());
    }
    Ok(())
}
