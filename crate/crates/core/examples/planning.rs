//! Planning with an equivariant MP-VIN, checking its symmetry, and exact value iteration.

use mpvin::planner::{equivariance_audit, exact_vi_oracle, max_violation, MpVin, PlannerConfig, TabularMdp, Variant};
use mpvin::symmetry::GroupSpec;
use mpvin::worlds::{generate_graph_world, shortest_paths, GraphWorldParams};

fn main() -> mpvin::Result<()> {
    let graph = generate_graph_world(&GraphWorldParams::with_nodes(100), 2)?;
    let d8 = GroupSpec::dihedral(8);

    for variant in [Variant::R2Group, Variant::NoSym] {
        let group = variant.uses_group().then_some(d8);
        let model = MpVin::new(PlannerConfig::graph(variant, group), 0)?;
        let plan = model.plan(&graph)?;
        let audit = equivariance_audit(&model, &model.params().cast::<f64>(), &graph, d8)?;
        println!(
            "{variant}: policy {:?}, value range [{:.3}, {:.3}], D8 violation {:.1e}",
            plan.policy.dim(),
            plan.value.iter().copied().fold(f32::INFINITY, f32::min),
            plan.value.iter().copied().fold(f32::NEG_INFINITY, f32::max),
            max_violation(&audit)
        );
    }

    // Untrained planners are arbitrary; the tabular oracle gives the true values.
    // Without discount, nodes cut off from the goal never settle, so cap the sweeps.
    let mdp = TabularMdp::from_graph(&graph, 1.0, false);
    let table = exact_vi_oracle(&mdp, 1.0, 5_000, 0.0);
    let paths = shortest_paths(&graph);
    let gap = (0..graph.n_nodes())
        .filter(|&i| paths.dist[i].is_finite())
        .map(|i| (table.values[i] + paths.dist[i]).abs())
        .fold(0.0, f64::max);
    println!("exact value iteration after {} sweeps: max |V + shortest distance| = {gap:.1e}", table.iterations);
    Ok(())
}
