use ndarray::Array2;

use super::mpvin::MpVin;
use crate::equivariant_nn::ParamStore;
use crate::error::Result;
use crate::scalar::Real;
use crate::symmetry::{orthogonal_2d, GroupSpec};
use crate::worlds::GeometricGraph;

/// Relative equivariance violation of the policy for one group element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuditEntry {
    pub element: usize,
    pub violation: f64,
}

/// Rotates/reflects all positions by element `g` about the centroid.
pub fn transform_graph(graph: &GeometricGraph, group: GroupSpec, g: usize) -> GeometricGraph {
    if g == group.identity() {
        return graph.clone();
    }
    let (angle, reflect) = group.angle(g);
    let m = orthogonal_2d(angle, reflect);
    let c = graph.centroid();
    graph.map_positions(|p| {
        let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
        [c[0] + m[0][0] * dx + m[0][1] * dy, c[1] + m[1][0] * dx + m[1][1] * dy]
    })
}

/// `‖ρ(g)Π(M) − Π(g·M)‖ / ‖Π(M)‖` for every element of `group`.
pub fn equivariance_audit<T: Real>(
    model: &MpVin,
    store: &ParamStore<T>,
    graph: &GeometricGraph,
    group: GroupSpec,
) -> Result<Vec<AuditEntry>> {
    let base = model.plan_with(store, graph)?.policy;
    let norm = base.iter().map(|v| v.as_f64().powi(2)).sum::<f64>().sqrt();
    let mut out = Vec::with_capacity(group.order());
    for g in 0..group.order() {
        let (angle, reflect) = group.angle(g);
        let m = orthogonal_2d(angle, reflect);
        let moved = model.plan_with(store, &transform_graph(graph, group, g))?.policy;
        let expected = Array2::from_shape_fn(base.dim(), |(i, r)| {
            m[r][0] * base[[i, 0]].as_f64() + m[r][1] * base[[i, 1]].as_f64()
        });
        let diff = expected.iter().zip(moved.iter()).map(|(a, b)| (a - b.as_f64()).powi(2)).sum::<f64>().sqrt();
        out.push(AuditEntry { element: g, violation: diff / norm.max(f64::MIN_POSITIVE) });
    }
    Ok(out)
}

pub fn max_violation(entries: &[AuditEntry]) -> f64 {
    entries.iter().map(|e| e.violation).fold(0.0, f64::max)
}
