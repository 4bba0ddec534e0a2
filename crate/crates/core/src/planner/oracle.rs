//! Exact tabular value iteration, used to check the Bellman operator's symmetry.

use crate::error::{Error, Result};
use crate::worlds::GeometricGraph;

/// A finite MDP with `R(s, a)` and sparse rows `P(· | s, a)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TabularMdp {
    n_states: usize,
    n_actions: usize,
    reward: Vec<f64>,
    transition: Vec<Vec<(usize, f64)>>,
}

impl TabularMdp {
    /// `reward[s·A + a]`, `transition[s·A + a]` lists `(next state, probability)`.
    pub fn new(
        n_states: usize,
        n_actions: usize,
        reward: Vec<f64>,
        transition: Vec<Vec<(usize, f64)>>,
    ) -> Result<Self> {
        let rows = n_states * n_actions;
        if reward.len() != rows || transition.len() != rows {
            return Err(Error::Model(format!("expected {rows} state-action rows")));
        }
        for (k, row) in transition.iter().enumerate() {
            let total: f64 = row.iter().map(|e| e.1).sum();
            if row.iter().any(|&(t, p)| t >= n_states || !(0.0..=1.0).contains(&p)) || (total - 1.0).abs() > 1e-9 {
                return Err(Error::Model(format!(
                    "row (s={}, a={}) is not a probability distribution",
                    k / n_actions,
                    k % n_actions
                )));
            }
        }
        Ok(Self { n_states, n_actions, reward, transition })
    }

    /// Moves along graph edges at cost `step_cost` per unit length (or per hop when
    /// `per_hop`); the goal is absorbing with zero reward. Action `a` moves to the
    /// `a`-th neighbor; missing neighbors and the last action stay in place.
    pub fn from_graph(graph: &GeometricGraph, step_cost: f64, per_hop: bool) -> Self {
        let n = graph.n_nodes();
        let a_count = (0..n).map(|i| graph.neighbors(i).len()).max().unwrap_or(0) + 1;
        let mut reward = Vec::with_capacity(n * a_count);
        let mut transition = Vec::with_capacity(n * a_count);
        for s in 0..n {
            for a in 0..a_count {
                if s == graph.goal() {
                    reward.push(0.0);
                    transition.push(vec![(s, 1.0)]);
                    continue;
                }
                match graph.neighbors(s).get(a) {
                    Some(&t) => {
                        reward.push(-step_cost * if per_hop { 1.0 } else { graph.distance(s, t) });
                        transition.push(vec![(t, 1.0)]);
                    }
                    None => {
                        reward.push(-step_cost);
                        transition.push(vec![(s, 1.0)]);
                    }
                }
            }
        }
        Self { n_states: n, n_actions: a_count, reward, transition }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward[s * self.n_actions + a]
    }

    pub fn transition(&self, s: usize, a: usize) -> &[(usize, f64)] {
        &self.transition[s * self.n_actions + a]
    }

    /// Relabels states by `sigma` and actions by `tau`: the returned MDP has
    /// `R'(σ(s), τ(a)) = R(s, a)` and `P'(σ(t) | σ(s), τ(a)) = P(t | s, a)`.
    pub fn permuted(&self, sigma: &[usize], tau: &[usize]) -> Self {
        let (n, a_count) = (self.n_states, self.n_actions);
        let mut reward = vec![0.0; n * a_count];
        let mut transition = vec![Vec::new(); n * a_count];
        for s in 0..n {
            for a in 0..a_count {
                let k = sigma[s] * a_count + tau[a];
                reward[k] = self.reward(s, a);
                transition[k] = self.transition(s, a).iter().map(|&(t, p)| (sigma[t], p)).collect();
            }
        }
        Self { n_states: n, n_actions: a_count, reward, transition }
    }

    /// `Q(s, a) = R(s, a) + γ Σ_t P(t | s, a) V(t)`.
    pub fn q_values(&self, gamma: f64, v: &[f64]) -> Vec<f64> {
        self.reward
            .iter()
            .zip(&self.transition)
            .map(|(r, row)| r + gamma * row.iter().map(|&(t, p)| p * v[t]).sum::<f64>())
            .collect()
    }

    /// One application of the Bellman optimality operator.
    pub fn bellman(&self, gamma: f64, v: &[f64]) -> Vec<f64> {
        self.q_values(gamma, v)
            .chunks(self.n_actions)
            .map(|q| q.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValueTable {
    pub values: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Value iteration from `V = 0` until the sup-norm change is at most `tol`
/// or `max_iters` sweeps have run.
pub fn exact_vi_oracle(mdp: &TabularMdp, gamma: f64, max_iters: usize, tol: f64) -> ValueTable {
    let mut v = vec![0.0; mdp.n_states()];
    for it in 0..max_iters {
        let next = mdp.bellman(gamma, &v);
        let delta = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if delta <= tol {
            return ValueTable { values: v, iterations: it + 1, converged: true };
        }
    }
    ValueTable { values: v, iterations: max_iters, converged: false }
}
