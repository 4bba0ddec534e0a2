use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mpvin::evaluation::rollout;
use mpvin::worlds::{dijkstra_labels, generate_graph_world, GeometricGraph, GraphWorldParams, GridWorld};

pub fn random_grid(seed: u64) -> GridWorld {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut free: Vec<bool> = (0..64).map(|_| rng.gen_bool(0.7)).collect();
    let goal = rng.gen_range(0..64);
    free[goal] = true;
    GridWorld::new(8, free, (goal / 8, goal % 8)).unwrap()
}

pub fn bfs_hops(g: &GeometricGraph) -> Vec<Option<usize>> {
    let mut hops = vec![None; g.n_nodes()];
    hops[g.goal()] = Some(0);
    let mut queue = VecDeque::from([g.goal()]);
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if hops[v].is_none() {
                hops[v] = Some(hops[u].unwrap() + 1);
                queue.push_back(v);
            }
        }
    }
    hops
}

pub fn bellman_ford(g: &GeometricGraph) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; g.n_nodes()];
    d[g.goal()] = 0.0;
    for _ in 0..g.n_nodes() {
        let mut changed = false;
        for u in 0..g.n_nodes() {
            for &v in g.neighbors(u) {
                let via = d[v] + g.distance(u, v);
                if via < d[u] {
                    d[u] = via;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    d
}

fn unit(g: &GeometricGraph, i: usize, j: usize) -> [f64; 2] {
    let (p, q) = (g.positions()[i], g.positions()[j]);
    let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
    let n = dx.hypot(dy);
    [dx / n, dy / n]
}

/// Labels of a random 8×8 grid against breadth-first search: exact labels,
/// and label-following reaches the goal in the minimal number of hops.
pub fn check_grid_labels(seed: u64) -> Result<(), String> {
    let grid = random_grid(seed);
    let sample = dijkstra_labels(&grid.to_graph());
    let g = &sample.graph;
    let hops = bfs_hops(g);
    for i in 0..64 {
        let reachable = hops[i].is_some() && !g.obstacle()[i];
        if sample.reachable[i] != reachable {
            return Err(format!("seed {seed} node {i}: reachability"));
        }
        if !reachable || i == g.goal() {
            if sample.labels[i] != [0.0, 0.0] {
                return Err(format!("seed {seed} node {i}: nonzero label"));
            }
            continue;
        }
        let next = *g.neighbors(i).iter().filter(|&&j| hops[j] == Some(hops[i].unwrap() - 1)).min().unwrap();
        let u = unit(g, i, next);
        if sample.labels[i] != [f64::from(u[0] as f32), f64::from(u[1] as f32)] {
            return Err(format!("seed {seed} node {i}: label {:?} vs {u:?}", sample.labels[i]));
        }
        let r = rollout(g, &sample.labels, i, 64).map_err(|e| e.to_string())?;
        if !r.success || r.path.len() - 1 != hops[i].unwrap() {
            return Err(format!("seed {seed} start {i}: rollout took {} hops", r.path.len() - 1));
        }
    }
    Ok(())
}

/// Labels of a random 64-node graph against Bellman-Ford: directions within
/// 1e-6, and label-following walks a shortest path.
pub fn check_graph_labels(seed: u64) -> Result<(), String> {
    let graph = generate_graph_world(&GraphWorldParams::with_nodes(64), seed).map_err(|e| e.to_string())?;
    let sample = dijkstra_labels(&graph);
    let g = &sample.graph;
    let d = bellman_ford(g);
    for i in 0..64 {
        let reachable = d[i].is_finite() && !g.obstacle()[i];
        if sample.reachable[i] != reachable {
            return Err(format!("seed {seed} node {i}: reachability"));
        }
        if !reachable || i == g.goal() {
            if sample.labels[i] != [0.0, 0.0] {
                return Err(format!("seed {seed} node {i}: nonzero label"));
            }
            continue;
        }
        let costs: Vec<(usize, f64)> = g.neighbors(i).iter().map(|&j| (j, d[j] + g.distance(i, j))).collect();
        let best = costs.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        let next = costs.iter().filter(|c| c.1 - best <= 1e-9).map(|c| c.0).min().unwrap();
        let u = unit(g, i, next);
        let l = sample.labels[i];
        if (l[0] - u[0]).abs() > 1e-6 || (l[1] - u[1]).abs() > 1e-6 {
            return Err(format!("seed {seed} node {i}: label {l:?} vs {u:?}"));
        }
        let r = rollout(g, &sample.labels, i, 64).map_err(|e| e.to_string())?;
        let length: f64 = r.path.windows(2).map(|w| g.distance(w[0], w[1])).sum();
        if !r.success || (length - d[i]).abs() > 1e-9 {
            return Err(format!("seed {seed} start {i}: path length {length} vs {}", d[i]));
        }
    }
    Ok(())
}
