use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Columns of the default node features: position, obstacle flag, goal flag.
pub const NODE_FEATURES: usize = 4;

/// Nodes in the plane with a symmetric adjacency list, obstacle flags and a goal.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricGraph {
    positions: Vec<[f64; 2]>,
    features: Array2<f64>,
    neighbors: Vec<Vec<usize>>,
    obstacle: Vec<bool>,
    goal: usize,
}

impl GeometricGraph {
    /// Builds a graph with the default `[x, y, obstacle, goal]` features.
    /// `edges` may list each undirected edge once or twice.
    pub fn new(positions: Vec<[f64; 2]>, edges: &[(usize, usize)], obstacle: Vec<bool>, goal: usize) -> Result<Self> {
        let n = positions.len();
        let mut neighbors = vec![Vec::new(); n];
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::Graph(format!("edge ({i}, {j}) out of range for {n} nodes")));
            }
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        let features = default_features(&positions, &obstacle, goal);
        Self::from_parts(positions, features, neighbors, obstacle, goal)
    }

    /// Validates and assembles a graph from stored parts.
    pub fn from_parts(
        positions: Vec<[f64; 2]>,
        features: Array2<f64>,
        neighbors: Vec<Vec<usize>>,
        obstacle: Vec<bool>,
        goal: usize,
    ) -> Result<Self> {
        let n = positions.len();
        if features.nrows() != n || neighbors.len() != n || obstacle.len() != n {
            return Err(Error::Graph("per-node arrays disagree on the node count".into()));
        }
        if goal >= n {
            return Err(Error::Graph(format!("goal {goal} out of range for {n} nodes")));
        }
        if obstacle[goal] {
            return Err(Error::Graph("goal node is an obstacle".into()));
        }
        for (i, list) in neighbors.iter().enumerate() {
            if obstacle[i] && !list.is_empty() {
                return Err(Error::Graph(format!("obstacle node {i} has edges")));
            }
            for &j in list {
                if j == i {
                    return Err(Error::Graph(format!("self-loop at {i}")));
                }
                if j >= n || neighbors[j].binary_search(&i).is_err() {
                    return Err(Error::Graph(format!("edge ({i}, {j}) is not symmetric")));
                }
            }
        }
        Ok(Self { positions, features, neighbors, obstacle, goal })
    }

    pub fn n_nodes(&self) -> usize {
        self.positions.len()
    }

    /// Number of undirected edges.
    pub fn n_edges(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.neighbors
    }

    pub fn obstacle(&self) -> &[bool] {
        &self.obstacle
    }

    pub fn goal(&self) -> usize {
        self.goal
    }

    /// Every edge in both directions as `(i, j)`, sorted.
    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        self.neighbors.iter().enumerate().flat_map(|(i, l)| l.iter().map(move |&j| (i, j))).collect()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.positions[i], self.positions[j]);
        (a[0] - b[0]).hypot(a[1] - b[1])
    }

    pub fn centroid(&self) -> [f64; 2] {
        let n = self.n_nodes().max(1) as f64;
        let (sx, sy) = self.positions.iter().fold((0.0, 0.0), |(x, y), p| (x + p[0], y + p[1]));
        [sx / n, sy / n]
    }

    /// Moves every node by `f`, keeping the position columns of the features in sync.
    pub fn map_positions(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        let positions: Vec<_> = self.positions.iter().map(|&p| f(p)).collect();
        let mut features = self.features.clone();
        for (i, p) in positions.iter().enumerate() {
            features[[i, 0]] = p[0];
            features[[i, 1]] = p[1];
        }
        Self { positions, features, ..self.clone() }
    }

    /// Nodes connected to the goal through free nodes (the goal included).
    pub fn reachable_from_goal(&self) -> Vec<bool> {
        let mut seen = vec![false; self.n_nodes()];
        let mut stack = vec![self.goal];
        seen[self.goal] = true;
        while let Some(i) = stack.pop() {
            for &j in &self.neighbors[i] {
                if !seen[j] && !self.obstacle[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen
    }
}

pub(crate) fn default_features(positions: &[[f64; 2]], obstacle: &[bool], goal: usize) -> Array2<f64> {
    Array2::from_shape_fn((positions.len(), NODE_FEATURES), |(i, c)| match c {
        0 | 1 => positions[i][c],
        2 => f64::from(u8::from(obstacle[i])),
        _ => f64::from(u8::from(i == goal)),
    })
}

/// Parameters of the random geometric graph generator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphWorldParams {
    pub nodes: usize,
    /// Side length of the square that positions are drawn from.
    pub map_size: f64,
    pub k: usize,
    pub obstacle_frac: f64,
}

impl GraphWorldParams {
    /// Unit node density, `k = 6`, 10% obstacles.
    pub fn with_nodes(nodes: usize) -> Self {
        Self { nodes, map_size: (nodes as f64).sqrt().ceil(), k: 6, obstacle_frac: 0.1 }
    }
}

const GRAPH_RETRIES: usize = 20;

/// Uniform positions in `[0, map_size)²`, symmetric k-nearest-neighbor edges,
/// `⌊obstacle_frac·N⌋` obstacle nodes with their edges removed, and a free goal
/// from which at least one other free node is reachable.
pub fn generate_graph_world(params: &GraphWorldParams, seed: u64) -> Result<GeometricGraph> {
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};

    let GraphWorldParams { nodes: n, map_size, k, obstacle_frac } = *params;
    if n < k + 1 || k == 0 {
        return Err(Error::Generation(format!("need more than k = {k} nodes, got {n}")));
    }
    if !(0.0..1.0).contains(&obstacle_frac) || map_size <= 0.0 {
        return Err(Error::Generation("obstacle fraction must lie in [0, 1) and the map must be nonempty".into()));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n_obstacles = (obstacle_frac * n as f64).floor() as usize;
    for _ in 0..GRAPH_RETRIES {
        // positions are drawn at single precision so archives round-trip exactly
        let side = map_size as f32;
        let positions: Vec<[f64; 2]> =
            (0..n).map(|_| [f64::from(rng.gen_range(0.0..side)), f64::from(rng.gen_range(0.0..side))]).collect();
        let mut edges = Vec::with_capacity(n * k);
        let mut order: Vec<usize> = Vec::with_capacity(n);
        for i in 0..n {
            order.clear();
            order.extend((0..n).filter(|&j| j != i));
            let d = |j: usize| {
                let (a, b) = (positions[i], positions[j]);
                (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
            };
            order.select_nth_unstable_by(k - 1, |&a, &b| d(a).total_cmp(&d(b)).then(a.cmp(&b)));
            edges.extend(order[..k].iter().map(|&j| (i, j)));
        }
        let mut ids: Vec<usize> = (0..n).collect();
        ids.shuffle(&mut rng);
        let mut obstacle = vec![false; n];
        for &i in &ids[..n_obstacles] {
            obstacle[i] = true;
        }
        edges.retain(|&(i, j)| !obstacle[i] && !obstacle[j]);
        let free: Vec<usize> = ids[n_obstacles..].to_vec();
        let goal = free[rng.gen_range(0..free.len())];
        let graph = GeometricGraph::new(positions, &edges, obstacle, goal)?;
        if graph.reachable_from_goal().iter().filter(|&&r| r).count() > 1 {
            return Ok(graph);
        }
    }
    Err(Error::Generation(format!("goal isolated in {GRAPH_RETRIES} attempts")))
}
