use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::graph::GeometricGraph;
use crate::error::{Error, Result};

/// Grid moves. Their vectors live in `(row, col)` position space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    North,
    East,
    West,
    South,
}

impl Action {
    /// Tie-break order of [`action_discretize`].
    pub const ALL: [Action; 4] = [Action::North, Action::East, Action::West, Action::South];

    pub fn vector(self) -> [f64; 2] {
        match self {
            Action::North => [1.0, 0.0],
            Action::East => [0.0, 1.0],
            Action::West => [0.0, -1.0],
            Action::South => [-1.0, 0.0],
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

/// Nearest of the four unit moves; exact ties go to the earlier of N, E, W, S.
pub fn action_discretize(v: [f64; 2]) -> Result<Action> {
    if v[0] == 0.0 && v[1] == 0.0 || !v[0].is_finite() || !v[1].is_finite() {
        return Err(Error::UndefinedAction);
    }
    let mut best = Action::North;
    let mut best_d = f64::INFINITY;
    for a in Action::ALL {
        let u = a.vector();
        let d = (v[0] - u[0]).powi(2) + (v[1] - u[1]).powi(2);
        if d < best_d {
            best = a;
            best_d = d;
        }
    }
    Ok(best)
}

/// Shortest paths to the goal over free nodes, with Euclidean edge lengths.
#[derive(Clone, Debug, PartialEq)]
pub struct ShortestPaths {
    /// `∞` for nodes that cannot reach the goal.
    pub dist: Vec<f64>,
    /// Next node on the chosen shortest path; `None` at the goal and unreachable nodes.
    pub next: Vec<Option<usize>>,
}

impl ShortestPaths {
    /// Edge count along the chosen path, or `None` if unreachable.
    pub fn hops(&self, mut i: usize) -> Option<usize> {
        if !self.dist[i].is_finite() {
            return None;
        }
        let mut n = 0;
        while let Some(j) = self.next[i] {
            i = j;
            n += 1;
        }
        Some(n)
    }
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// Dijkstra from the goal. Each node's successor is the neighbor minimizing
/// `dist[j] + |x_i − x_j|`, the smallest index winning exact ties.
pub fn shortest_paths(graph: &GeometricGraph) -> ShortestPaths {
    let n = graph.n_nodes();
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    dist[graph.goal()] = 0.0;
    heap.push(Entry(0.0, graph.goal()));
    while let Some(Entry(d, i)) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        for &j in graph.neighbors(i) {
            if graph.obstacle()[j] {
                continue;
            }
            let nd = d + graph.distance(i, j);
            if nd < dist[j] {
                dist[j] = nd;
                heap.push(Entry(nd, j));
            }
        }
    }
    let next = (0..n)
        .map(|i| {
            if i == graph.goal() || !dist[i].is_finite() {
                return None;
            }
            graph
                .neighbors(i)
                .iter()
                .filter(|&&j| dist[j].is_finite())
                .map(|&j| (dist[j] + graph.distance(i, j), j))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .map(|(_, j)| j)
        })
        .collect();
    ShortestPaths { dist, next }
}

/// A graph with expert actions: the unit step toward each node's successor.
#[derive(Clone, Debug, PartialEq)]
pub struct NavSample {
    pub graph: GeometricGraph,
    /// Rounded to single precision; zero at the goal, obstacles and unreachable nodes.
    pub labels: Vec<[f64; 2]>,
    /// Free nodes connected to the goal, the goal included.
    pub reachable: Vec<bool>,
}

impl NavSample {
    /// Nodes that carry a supervised action: reachable and not the goal.
    pub fn loss_mask(&self) -> Vec<bool> {
        let g = self.graph.goal();
        self.reachable.iter().enumerate().map(|(i, &r)| r && i != g).collect()
    }

    pub fn n_supervised(&self) -> usize {
        self.loss_mask().iter().filter(|&&m| m).count()
    }
}

pub fn dijkstra_labels(graph: &GeometricGraph) -> NavSample {
    let sp = shortest_paths(graph);
    let labels = (0..graph.n_nodes())
        .map(|i| match sp.next[i] {
            Some(j) => {
                let (a, b) = (graph.positions()[i], graph.positions()[j]);
                let len = graph.distance(i, j);
                [((b[0] - a[0]) / len) as f32 as f64, ((b[1] - a[1]) / len) as f32 as f64]
            }
            None => [0.0, 0.0],
        })
        .collect();
    let reachable = sp.dist.iter().map(|d| d.is_finite()).collect();
    NavSample { graph: graph.clone(), labels, reachable }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worlds::GridWorld;

    #[test]
    fn discretize_examples() {
        assert_eq!(action_discretize([0.9, 0.1]).unwrap(), Action::North);
        assert_eq!(action_discretize([1.0, 1.0]).unwrap(), Action::North);
        assert_eq!(action_discretize([0.0, 1.0]).unwrap(), Action::East);
        assert_eq!(action_discretize([-0.2, -3.0]).unwrap(), Action::West);
        assert_eq!(action_discretize([-1.0, 0.0]).unwrap(), Action::South);
        assert!(matches!(action_discretize([0.0, 0.0]), Err(Error::UndefinedAction)));
    }

    #[test]
    fn empty_grid_labels() {
        let grid = GridWorld::new(3, vec![true; 9], (0, 0)).unwrap();
        let s = dijkstra_labels(&grid.to_graph());
        assert_eq!(s.labels[1], [0.0, -1.0]);
        assert_eq!(s.labels[0], [0.0, 0.0]);
        assert!(s.reachable.iter().all(|&r| r));
        assert_eq!(s.n_supervised(), 8);
    }

    #[test]
    fn path_graph_hops() {
        let g = GeometricGraph::new(
            vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [5.0, 5.0]],
            &[(0, 1), (1, 2)],
            vec![false; 4],
            0,
        )
        .unwrap();
        let sp = shortest_paths(&g);
        assert_eq!(sp.dist[..3], [0.0, 1.0, 2.0]);
        assert_eq!(sp.hops(2), Some(2));
        assert_eq!(sp.hops(3), None);
        let s = dijkstra_labels(&g);
        assert_eq!(s.labels[2], [-1.0, 0.0]);
        assert!(!s.reachable[3]);
    }
}
