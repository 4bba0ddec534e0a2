use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planner::PolicyModel;
use crate::worlds::{sample_seed, Dataset, GeometricGraph, NavSample, Split, WorldParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StartSampling {
    /// Every reachable free node other than the goal.
    All,
    /// Up to this many distinct reachable starts per sample, drawn at random.
    Random(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[derive(Default)]
pub struct RolloutConfig {
    /// Step budget; `None` picks `4·m` for grids and `2·√N·k` for graphs.
    #[serde(default)]
    pub max_steps: Option<usize>,
    /// `None` picks all starts on grids and 32 random starts on graphs.
    #[serde(default)]
    pub starts: Option<StartSampling>,
    #[serde(default)]
    pub seed: u64,
}

impl RolloutConfig {
    pub fn budget(&self, world: &WorldParams) -> usize {
        self.max_steps.unwrap_or(match world {
            WorldParams::Grid { size } => 4 * size,
            WorldParams::Graph(p) => (2.0 * (p.nodes as f64).sqrt() * p.k as f64).round() as usize,
        })
    }

    pub fn sampling(&self, world: &WorldParams) -> StartSampling {
        self.starts.unwrap_or(match world {
            WorldParams::Grid { .. } => StartSampling::All,
            WorldParams::Graph(_) => StartSampling::Random(32),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rollout {
    pub success: bool,
    /// Visited nodes, starting with the start node.
    pub path: Vec<usize>,
}

/// Cosine of the angle between `a` and `b`; zero if either vanishes.
pub fn cosine(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (na, nb) = (a[0].hypot(a[1]), b[0].hypot(b[1]));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (a[0] * b[0] + a[1] * b[1]) / (na * nb)
}

/// The neighbor of `node` best aligned with `direction`; ties go to the smallest index.
pub fn snap_to_neighbor(graph: &GeometricGraph, node: usize, direction: [f64; 2]) -> Option<usize> {
    if direction[0] == 0.0 && direction[1] == 0.0 {
        return None;
    }
    let p = graph.positions()[node];
    let mut best: Option<(f64, usize)> = None;
    for &j in graph.neighbors(node) {
        let q = graph.positions()[j];
        let c = cosine(direction, [q[0] - p[0], q[1] - p[1]]);
        if best.is_none_or(|(b, _)| c > b) {
            best = Some((c, j));
        }
    }
    best.map(|(_, j)| j)
}

/// Follows `policy` from `start`, moving to the best-aligned neighbor each step.
/// A zero action or a node without neighbors ends the rollout.
pub fn rollout_with(
    graph: &GeometricGraph,
    start: usize,
    max_steps: usize,
    mut policy: impl FnMut(usize) -> [f64; 2],
) -> Result<Rollout> {
    if start >= graph.n_nodes() || graph.obstacle()[start] {
        return Err(Error::InvalidStart(start));
    }
    let mut path = vec![start];
    let mut cur = start;
    for _ in 0..max_steps {
        if cur == graph.goal() {
            break;
        }
        match snap_to_neighbor(graph, cur, policy(cur)) {
            Some(next) => {
                cur = next;
                path.push(cur);
            }
            None => break,
        }
    }
    Ok(Rollout { success: cur == graph.goal(), path })
}

pub fn rollout(graph: &GeometricGraph, policy: &[[f64; 2]], start: usize, max_steps: usize) -> Result<Rollout> {
    rollout_with(graph, start, max_steps, |i| policy[i])
}

/// Starts evaluated on one sample, deterministic in `(seed, sample index)`.
pub fn sample_starts(sample: &NavSample, sampling: StartSampling, seed: u64, index: usize) -> Vec<usize> {
    let goal = sample.graph.goal();
    let mut all: Vec<usize> = (0..sample.reachable.len()).filter(|&i| sample.reachable[i] && i != goal).collect();
    if let StartSampling::Random(k) = sampling {
        if all.len() > k {
            let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(seed, Split::Test, index));
            all.shuffle(&mut rng);
            all.truncate(k);
            all.sort_unstable();
        }
    }
    all
}

/// Successes and attempts of one policy over a dataset.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Outcomes {
    /// `(successes, starts)` per sample.
    pub per_sample: Vec<(usize, usize)>,
}

impl Outcomes {
    pub fn successes(&self) -> usize {
        self.per_sample.iter().map(|p| p.0).sum()
    }

    pub fn attempts(&self) -> usize {
        self.per_sample.iter().map(|p| p.1).sum()
    }

    /// Percentage of successful rollouts.
    pub fn rate(&self) -> f64 {
        if self.attempts() == 0 {
            return 0.0;
        }
        100.0 * self.successes() as f64 / self.attempts() as f64
    }
}

/// Evaluates a per-sample policy field over a dataset.
pub fn evaluate_fields(
    dataset: &Dataset,
    config: &RolloutConfig,
    mut field: impl FnMut(usize, &NavSample) -> Result<Vec<[f64; 2]>>,
) -> Result<Outcomes> {
    let budget = config.budget(&dataset.world);
    let sampling = config.sampling(&dataset.world);
    let mut per_sample = Vec::with_capacity(dataset.len());
    for (idx, sample) in dataset.samples.iter().enumerate() {
        let starts = sample_starts(sample, sampling, config.seed, idx);
        let policy = field(idx, sample)?;
        let mut ok = 0;
        for &s in &starts {
            if rollout(&sample.graph, &policy, s, budget)?.success {
                ok += 1;
            }
        }
        per_sample.push((ok, starts.len()));
    }
    Ok(Outcomes { per_sample })
}

pub fn evaluate_model<M: PolicyModel>(model: &M, dataset: &Dataset, config: &RolloutConfig) -> Result<Outcomes> {
    evaluate_fields(dataset, config, |_, s| {
        let inputs = model.prepare(s)?;
        Ok(model.policy(model.params(), &inputs))
    })
}

/// Policy that replays the expert labels.
pub fn evaluate_oracle(dataset: &Dataset, config: &RolloutConfig) -> Result<Outcomes> {
    evaluate_fields(dataset, config, |_, s| Ok(s.labels.clone()))
}

/// A fresh uniformly random direction at every step.
pub fn evaluate_random(dataset: &Dataset, config: &RolloutConfig) -> Result<Outcomes> {
    let budget = config.budget(&dataset.world);
    let sampling = config.sampling(&dataset.world);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed);
    let mut per_sample = Vec::with_capacity(dataset.len());
    for (idx, sample) in dataset.samples.iter().enumerate() {
        let starts = sample_starts(sample, sampling, config.seed, idx);
        let mut ok = 0;
        for &s in &starts {
            let r = rollout_with(&sample.graph, s, budget, |_| {
                let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                [a.cos(), a.sin()]
            })?;
            ok += usize::from(r.success);
        }
        per_sample.push((ok, starts.len()));
    }
    Ok(Outcomes { per_sample })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worlds::{dijkstra_labels, shortest_paths, GridWorld};

    #[test]
    fn start_at_goal_and_isolated_start() {
        let g = GeometricGraph::new(vec![[0.0, 0.0], [1.0, 0.0], [3.0, 3.0]], &[(0, 1)], vec![false; 3], 0).unwrap();
        let pol = vec![[1.0, 0.0]; 3];
        let r = rollout(&g, &pol, 0, 10).unwrap();
        assert!(r.success && r.path == vec![0]);
        let r = rollout(&g, &pol, 2, 10).unwrap();
        assert!(!r.success && r.path == vec![2]);
        let g = GeometricGraph::new(vec![[0.0, 0.0], [1.0, 0.0]], &[], vec![false, true], 0).unwrap();
        assert!(matches!(rollout(&g, &pol, 1, 5), Err(Error::InvalidStart(1))));
    }

    #[test]
    fn oracle_follows_shortest_paths() {
        let grid = GridWorld::new(4, vec![true; 16], (0, 0)).unwrap();
        let s = dijkstra_labels(&grid.to_graph());
        let sp = shortest_paths(&s.graph);
        for start in 1..16 {
            let r = rollout(&s.graph, &s.labels, start, 100).unwrap();
            assert!(r.success);
            assert_eq!(r.path.len() - 1, sp.hops(start).unwrap());
        }
    }

    #[test]
    fn ties_go_to_smallest_index() {
        let g = GeometricGraph::new(vec![[0.0, 0.0], [1.0, 1.0], [1.0, -1.0]], &[(0, 1), (0, 2)], vec![false; 3], 1)
            .unwrap();
        assert_eq!(snap_to_neighbor(&g, 0, [1.0, 0.0]), Some(1));
    }
}
