use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::graph::GeometricGraph;
use crate::error::{Error, Result};

/// An `m × m` occupancy map with a goal. Cell `(row, col)` sits at position `(row, col)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridWorld {
    size: usize,
    free: Vec<bool>,
    goal: (usize, usize),
}

/// Fraction of remaining wall cells knocked out after carving the maze.
pub const WALL_REMOVAL: f64 = 0.1;

impl GridWorld {
    /// `free` is row-major.
    pub fn new(size: usize, free: Vec<bool>, goal: (usize, usize)) -> Result<Self> {
        if free.len() != size * size {
            return Err(Error::Shape { expected: size * size, got: free.len() });
        }
        if goal.0 >= size || goal.1 >= size || !free[goal.0 * size + goal.1] {
            return Err(Error::Graph(format!("goal {goal:?} is not a free cell")));
        }
        Ok(Self { size, free, goal })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn goal(&self) -> (usize, usize) {
        self.goal
    }

    pub fn is_free(&self, row: usize, col: usize) -> bool {
        self.free[row * self.size + col]
    }

    pub fn free(&self) -> &[bool] {
        &self.free
    }

    pub fn n_free(&self) -> usize {
        self.free.iter().filter(|&&f| f).count()
    }

    /// Quarter turn counterclockwise in position space: `(x, y) ↦ (m−1−y, x)`.
    pub fn rotate90(&self) -> Self {
        let m = self.size;
        let mut free = vec![false; m * m];
        for r in 0..m {
            for c in 0..m {
                free[(m - 1 - c) * m + r] = self.free[r * m + c];
            }
        }
        let (gr, gc) = self.goal;
        Self { size: m, free, goal: (m - 1 - gc, gr) }
    }

    /// One node per cell at integer coordinates; edges join 4-adjacent free cells.
    pub fn to_graph(&self) -> GeometricGraph {
        let m = self.size;
        let positions = (0..m * m).map(|i| [(i / m) as f64, (i % m) as f64]).collect();
        let mut edges = Vec::new();
        for r in 0..m {
            for c in 0..m {
                if !self.is_free(r, c) {
                    continue;
                }
                if r + 1 < m && self.is_free(r + 1, c) {
                    edges.push((r * m + c, (r + 1) * m + c));
                }
                if c + 1 < m && self.is_free(r, c + 1) {
                    edges.push((r * m + c, r * m + c + 1));
                }
            }
        }
        let obstacle = self.free.iter().map(|f| !f).collect();
        GeometricGraph::new(positions, &edges, obstacle, self.goal.0 * m + self.goal.1)
            .expect("grid graphs satisfy the graph invariants")
    }
}

pub fn grid_to_graph(grid: &GridWorld) -> GeometricGraph {
    grid.to_graph()
}

/// Randomized depth-first carving of the odd lattice inside a solid border,
/// then [`WALL_REMOVAL`] of the interior walls opened at random, then a goal
/// drawn among free cells connected to the carved lattice.
pub fn generate_maze(m: usize, seed: u64) -> Result<GridWorld> {
    if m < 3 {
        return Err(Error::Generation(format!("maze size {m} is below 3")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut free = vec![false; m * m];
    let cells = (m - 1) / 2;
    let at = |r: usize, c: usize| (2 * r + 1) * m + 2 * c + 1;
    let mut visited = vec![false; cells * cells];
    let start = (rng.gen_range(0..cells), rng.gen_range(0..cells));
    let mut stack = vec![start];
    visited[start.0 * cells + start.1] = true;
    free[at(start.0, start.1)] = true;
    while let Some(&(r, c)) = stack.last() {
        let mut options = Vec::with_capacity(4);
        if r > 0 {
            options.push((r - 1, c));
        }
        if r + 1 < cells {
            options.push((r + 1, c));
        }
        if c > 0 {
            options.push((r, c - 1));
        }
        if c + 1 < cells {
            options.push((r, c + 1));
        }
        options.retain(|&(a, b)| !visited[a * cells + b]);
        match options.choose(&mut rng) {
            Some(&(a, b)) => {
                visited[a * cells + b] = true;
                free[(r + a + 1) * m + (c + b + 1)] = true;
                free[at(a, b)] = true;
                stack.push((a, b));
            }
            None => {
                stack.pop();
            }
        }
    }
    let interior = |i: usize| (1..m - 1).contains(&(i / m)) && (1..m - 1).contains(&(i % m));
    let mut walls: Vec<usize> = (0..m * m).filter(|&i| !free[i] && interior(i)).collect();
    walls.shuffle(&mut rng);
    let removed = (WALL_REMOVAL * walls.len() as f64).round() as usize;
    for &i in &walls[..removed] {
        free[i] = true;
    }
    let probe = GridWorld::new(m, free, (2 * start.0 + 1, 2 * start.1 + 1))?;
    let reach = probe.to_graph().reachable_from_goal();
    let candidates: Vec<usize> = (0..m * m).filter(|&i| reach[i]).collect();
    let goal = candidates[rng.gen_range(0..candidates.len())];
    GridWorld::new(m, probe.free, (goal / m, goal % m))
}

/// Cells by flooring node coordinates. A cell is occupied when any node in it
/// is an obstacle; cells without nodes are free, and the goal's cell is always free.
pub fn discretize_graph_to_grid(graph: &GeometricGraph, m: usize) -> Result<(GridWorld, Vec<(usize, usize)>)> {
    let mut free = vec![true; m * m];
    let mut cells = Vec::with_capacity(graph.n_nodes());
    for (i, p) in graph.positions().iter().enumerate() {
        let (r, c) = (p[0].floor(), p[1].floor());
        if r < 0.0 || c < 0.0 || r >= m as f64 || c >= m as f64 {
            return Err(Error::Graph(format!("node {i} at {p:?} lies outside the {m}×{m} map")));
        }
        let cell = (r as usize, c as usize);
        if graph.obstacle()[i] {
            free[cell.0 * m + cell.1] = false;
        }
        cells.push(cell);
    }
    let goal = cells[graph.goal()];
    free[goal.0 * m + goal.1] = true;
    Ok((GridWorld::new(m, free, goal)?, cells))
}
