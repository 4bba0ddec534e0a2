//! The grid value iteration network baseline: 3×3 convolutions on an occupancy
//! map, a max over action channels per iteration, and a per-cell linear head
//! producing logits over the four moves.

use std::sync::Arc;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::equivariant_nn::tape::PAD;
use crate::equivariant_nn::{EquivariantLinear, ParamStore, Session, Var};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::symmetry::{FieldType, GroupSpec};
use crate::worlds::{Action, GridWorld};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VinConfig {
    pub iterations: usize,
    pub hidden: usize,
    pub q_size: usize,
}

impl Default for VinConfig {
    fn default() -> Self {
        Self { iterations: 20, hidden: 150, q_size: 10 }
    }
}

#[derive(Clone, Debug)]
pub struct GridVin {
    config: VinConfig,
    h: EquivariantLinear,
    r: EquivariantLinear,
    q: EquivariantLinear,
    policy: EquivariantLinear,
    params: ParamStore<f32>,
}

/// Occupancy and goal channels plus the 3×3 neighborhood index of every cell.
#[derive(Clone, Debug)]
pub struct GridInputs<T> {
    pub size: usize,
    pub input: Array2<T>,
    pub taps: Vec<Arc<Vec<usize>>>,
    pub free: Arc<Vec<T>>,
}

impl<T: Real> GridInputs<T> {
    pub fn new(grid: &GridWorld) -> Self {
        let m = grid.size();
        let (gr, gc) = grid.goal();
        let input = Array2::from_shape_fn((m * m, 2), |(i, c)| match c {
            0 => T::of(f64::from(u8::from(!grid.free()[i]))),
            _ => T::of(f64::from(u8::from(i == gr * m + gc))),
        });
        let taps = (-1i64..=1)
            .flat_map(|dr| (-1i64..=1).map(move |dc| (dr, dc)))
            .map(|(dr, dc)| {
                Arc::new(
                    (0..m * m)
                        .map(|i| {
                            let (r, c) = ((i / m) as i64 + dr, (i % m) as i64 + dc);
                            if (0..m as i64).contains(&r) && (0..m as i64).contains(&c) {
                                (r as usize) * m + c as usize
                            } else {
                                PAD
                            }
                        })
                        .collect::<Vec<_>>(),
                )
            })
            .collect();
        let free = Arc::new(grid.free().iter().map(|&f| if f { T::one() } else { T::zero() }).collect());
        Self { size: m, input, taps, free }
    }
}

impl GridVin {
    pub fn new(config: VinConfig, seed: u64) -> Result<Self> {
        let t = GroupSpec::trivial();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamStore::new();
        let dense = |d| FieldType::trivial(t, d);
        let h = EquivariantLinear::new(&mut params, "vin.h", dense(18), dense(config.hidden), true, &mut rng)?;
        let r = EquivariantLinear::new(&mut params, "vin.r", dense(config.hidden), dense(1), false, &mut rng)?;
        let q = EquivariantLinear::new(&mut params, "vin.q", dense(18), dense(config.q_size), false, &mut rng)?;
        let policy =
            EquivariantLinear::new(&mut params, "vin.policy", dense(config.q_size), dense(4), false, &mut rng)?;
        Ok(Self { config, h, r, q, policy, params })
    }

    pub fn config(&self) -> &VinConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore<f32> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore<f32> {
        &mut self.params
    }

    pub fn set_params(&mut self, params: ParamStore<f32>) -> Result<()> {
        let same = params.len() == self.params.len()
            && params.iter().zip(self.params.iter()).all(|((a, x), (b, y))| a == b && x.len() == y.len());
        if !same {
            return Err(Error::Model("parameter layout does not match the VIN".into()));
        }
        self.params = params;
        Ok(())
    }

    fn conv<T: Real>(s: &mut Session<T>, x: Var, taps: &[Arc<Vec<usize>>], layer: &EquivariantLinear) -> Var {
        let cols: Vec<Var> = taps.iter().map(|t| s.tape.gather_rows(x, t.clone())).collect();
        let patches = s.tape.concat(&cols);
        layer.apply(s, patches)
    }

    /// Records the network; returns `m² × 4` logits, zero on occupied cells.
    pub fn record<T: Real>(&self, s: &mut Session<T>, inputs: &GridInputs<T>) -> Var {
        let x = s.tape.constant(inputs.input.clone());
        let h = Self::conv(s, x, &inputs.taps, &self.h);
        let r = self.r.apply(s, h);
        let mut v = s.tape.constant(Array2::zeros((inputs.size * inputs.size, 1)));
        let mut q = v;
        for _ in 0..self.config.iterations {
            let rv = s.tape.concat(&[r, v]);
            q = Self::conv(s, rv, &inputs.taps, &self.q);
            v = s.tape.channel_max(q, self.config.q_size);
        }
        let logits = self.policy.apply(s, q);
        s.tape.mul_rows(logits, inputs.free.clone())
    }

    pub fn logits_with<T: Real>(&self, store: &ParamStore<T>, grid: &GridWorld) -> Array2<T> {
        let inputs = GridInputs::new(grid);
        let mut s = Session::new(store, false);
        let out = self.record(&mut s, &inputs);
        s.tape.value(out).clone()
    }

    /// Per-cell logits over the moves in [`Action::ALL`] order.
    pub fn vin_grid_plan(&self, grid: &GridWorld) -> Array2<f32> {
        self.logits_with(&self.params, grid)
    }

    /// Unit move of the largest logit per cell; ties go to the earlier action.
    pub fn policy_vectors(logits: &Array2<f32>) -> Vec<[f64; 2]> {
        logits
            .rows()
            .into_iter()
            .map(|row| {
                let best = (0..4).fold(0, |b, a| if row[a] > row[b] { a } else { b });
                Action::from_index(best).expect("four actions").vector()
            })
            .collect()
    }
}
