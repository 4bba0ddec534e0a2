#![allow(dead_code)]

pub mod finite_diff;
pub mod labels;
pub mod rank;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mpvin::planner::{exact_vi_oracle, TabularMdp};
use mpvin::worlds::GeometricGraph;

/// A graph invariant under the quarter turn `(x, y) ↦ (−y, x)` about the origin:
/// `orbits` random points copied into all four quadrants plus a central goal.
/// Returns the graph and the node permutation `σ` of the quarter turn.
pub fn quarter_turn_graph(orbits: usize, seed: u64) -> (GeometricGraph, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 4 * orbits + 1;
    let mut positions = vec![[0.0, 0.0]; n];
    for o in 0..orbits {
        let mut p = [rng.gen_range(0.2..4.0), rng.gen_range(0.0..4.0)];
        for q in 0..4 {
            positions[1 + 4 * o + q] = p;
            p = [-p[1], p[0]];
        }
    }
    let sigma: Vec<usize> = (0..n).map(|i| if i == 0 { 0 } else { i - (i - 1) % 4 + ((i - 1) % 4 + 1) % 4 }).collect();
    let mut edges = Vec::new();
    let push_orbit = |a: usize, b: usize, edges: &mut Vec<(usize, usize)>| {
        let (mut a, mut b) = (a, b);
        for _ in 0..4 {
            if a != b && !edges.contains(&(a, b)) && !edges.contains(&(b, a)) {
                edges.push((a, b));
            }
            a = sigma[a];
            b = sigma[b];
        }
    };
    for o in 0..orbits {
        let a = 1 + 4 * o;
        if rng.gen_bool(0.6) || o == 0 {
            push_orbit(0, a, &mut edges);
        }
        for _ in 0..2 {
            let b = rng.gen_range(1..n);
            push_orbit(a, b, &mut edges);
        }
    }
    let obstacle = vec![false; n];
    (GeometricGraph::new(positions, &edges, obstacle, 0).unwrap(), sigma)
}

/// Max over states of `|V(σ(s)) − V(s)|` for the exact values, and max over
/// `iters` Bellman steps of `|T(V∘σ⁻¹) − T(V)∘σ⁻¹|` from a random start.
pub fn bellman_symmetry_residuals(graph: &GeometricGraph, sigma: &[usize], gamma: f64, seed: u64) -> (f64, f64) {
    let mdp = TabularMdp::from_graph(graph, 1.0, false);
    let v = exact_vi_oracle(&mdp, gamma, 10_000, 0.0).values;
    let inv = v.iter().enumerate().map(|(s, &x)| (v[sigma[s]] - x).abs()).fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur: Vec<f64> = (0..graph.n_nodes()).map(|_| rng.gen_range(-5.0..0.0)).collect();
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let mut moved = vec![0.0; cur.len()];
        for (s, &x) in cur.iter().enumerate() {
            moved[sigma[s]] = x;
        }
        let a = mdp.bellman(gamma, &moved);
        let b = mdp.bellman(gamma, &cur);
        for s in 0..cur.len() {
            worst = worst.max((a[sigma[s]] - b[s]).abs());
        }
        cur = b;
    }
    (inv, worst)
}
