use std::sync::Arc;

use ndarray::Array2;

use mpvin::equivariant_nn::{ParamStore, Session};
use mpvin::planner::{GridInputs, GridVin, MpVin, PlannerConfig, Variant, VinConfig};
use mpvin::symmetry::GroupSpec;
use mpvin::worlds::{dijkstra_labels, generate_graph_world, generate_maze, GraphWorldParams};

pub const EPS: f64 = 1e-5;

/// Worst per-group relative error between the tape gradient and central differences.
fn check(store: &ParamStore<f64>, loss: impl Fn(&ParamStore<f64>, bool) -> (f64, Vec<Vec<f64>>)) -> Vec<(String, f64)> {
    let (_, grads) = loss(store, true);
    let mut report = Vec::new();
    for (k, (name, values)) in store.iter().enumerate() {
        let mut fd = vec![0.0; values.len()];
        for i in 0..values.len() {
            let mut plus = store.clone();
            let mut minus = store.clone();
            plus.values_mut().nth(k).unwrap()[i] += EPS;
            minus.values_mut().nth(k).unwrap()[i] -= EPS;
            fd[i] = (loss(&plus, false).0 - loss(&minus, false).0) / (2.0 * EPS);
        }
        let diff = fd.iter().zip(&grads[k]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale =
            fd.iter().map(|a| a * a).sum::<f64>().sqrt().max(grads[k].iter().map(|a| a * a).sum::<f64>().sqrt());
        report.push((name.to_string(), if scale < 1e-12 { diff } else { diff / scale }));
    }
    report
}

/// Per-parameter-group relative errors of a small MP-VIN under the masked MSE.
pub fn mpvin_errors(variant: Variant, group: Option<GroupSpec>) -> Vec<(String, f64)> {
    let mut cfg = PlannerConfig::graph(variant, group);
    cfg.iterations = 3;
    cfg.hidden_dim = 8;
    cfg.q_size = 2;
    let model = MpVin::new(cfg, 11).unwrap();
    let store = model.params().cast::<f64>();
    let graph = generate_graph_world(&GraphWorldParams::with_nodes(14), 5).unwrap();
    let sample = dijkstra_labels(&graph);
    let inputs = model.inputs::<f64>(&graph).unwrap();
    let mask = sample.loss_mask();
    let count = mask.iter().filter(|&&m| m).count() as f64;
    let weights = Arc::new(mask.iter().map(|&m| if m { 1.0 / count } else { 0.0 }).collect::<Vec<_>>());
    let target = Arc::new(Array2::from_shape_fn((graph.n_nodes(), 2), |(i, c)| sample.labels[i][c]));
    check(&store, |p, grad| {
        let mut s = Session::new(p, grad);
        let (pi, _, _) = model.record(&mut s, &inputs);
        let l = s.tape.masked_mse(pi, target.clone(), weights.clone());
        (s.tape.scalar(l), if grad { s.gradients(l) } else { Vec::new() })
    })
}

/// Per-parameter-group relative errors of a small grid VIN under cross-entropy.
pub fn vin_errors() -> Vec<(String, f64)> {
    let model = GridVin::new(VinConfig { iterations: 3, hidden: 4, q_size: 3 }, 2).unwrap();
    let store = model.params().cast::<f64>();
    let grid = generate_maze(5, 3).unwrap();
    let inputs = GridInputs::<f64>::new(&grid);
    let target = Arc::new((0..25).map(|i| i % 4).collect::<Vec<_>>());
    let weights = Arc::new(grid.free().iter().map(|&f| if f { 0.1 } else { 0.0 }).collect::<Vec<_>>());
    check(&store, |p, grad| {
        let mut s = Session::new(p, grad);
        let logits = model.record(&mut s, &inputs);
        let l = s.tape.softmax_xent(logits, target.clone(), weights.clone());
        (s.tape.scalar(l), if grad { s.gradients(l) } else { Vec::new() })
    })
}
