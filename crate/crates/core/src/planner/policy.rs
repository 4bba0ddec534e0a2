use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::config::PlannerConfig;
use super::mpvin::{GraphInputs, MpVin};
use super::vin::{GridInputs, GridVin, VinConfig};
use crate::equivariant_nn::{ParamStore, Session, Var};
use crate::error::{Error, Result};
use crate::symmetry::FieldTypeDescriptor;
use crate::training::LossKind;
use crate::worlds::{action_discretize, dijkstra_labels, discretize_graph_to_grid, GridWorld, NavSample};

/// A trainable planner that maps a navigation sample to a movement per node.
pub trait PolicyModel {
    type Inputs;

    fn name(&self) -> String;
    fn spec(&self) -> ModelSpec;
    /// Named field types of the inputs, hidden state and outputs.
    fn field_types(&self) -> Result<Vec<(String, FieldTypeDescriptor)>>;
    fn params(&self) -> &ParamStore<f32>;
    fn params_mut(&mut self) -> &mut ParamStore<f32>;
    /// Replaces all parameters; names and lengths must match.
    fn set_params(&mut self, params: ParamStore<f32>) -> Result<()>;
    /// Precomputes the tensors for one sample. Fails on samples without supervised nodes.
    fn prepare(&self, sample: &NavSample) -> Result<Self::Inputs>;
    /// Records the mean per-node loss of one sample.
    fn record_loss(&self, s: &mut Session<f32>, inputs: &Self::Inputs, loss: LossKind) -> Var;
    /// Movement vector per graph node.
    fn policy(&self, store: &ParamStore<f32>, inputs: &Self::Inputs) -> Vec<[f64; 2]>;
}

fn mean_weights(mask: &[bool]) -> Result<Arc<Vec<f32>>> {
    let count = mask.iter().filter(|&&m| m).count();
    if count == 0 {
        return Err(Error::DegenerateSample);
    }
    let w = 1.0 / count as f32;
    Ok(Arc::new(mask.iter().map(|&m| if m { w } else { 0.0 }).collect()))
}

#[derive(Clone, Debug)]
pub struct MpVinInputs {
    pub graph: GraphInputs<f32>,
    pub target: Arc<Array2<f32>>,
    pub weights: Arc<Vec<f32>>,
}

impl PolicyModel for MpVin {
    type Inputs = MpVinInputs;

    fn name(&self) -> String {
        match self.config().group {
            Some(g) => format!("{}({g})", self.config().variant),
            None => self.config().variant.to_string(),
        }
    }

    fn spec(&self) -> ModelSpec {
        ModelSpec::Mpvin(*self.config())
    }

    fn field_types(&self) -> Result<Vec<(String, FieldTypeDescriptor)>> {
        let named = [
            ("node_in", self.r_mp().node_in()),
            ("edge_in", self.r_mp().edge_in()),
            ("reward", self.r_mp().rep_out()),
            ("q", self.q_mp().rep_out()),
            ("policy", self.policy_head().rep_out()),
        ];
        named.into_iter().map(|(n, f)| Ok((n.to_string(), f.descriptor()?))).collect()
    }

    fn params(&self) -> &ParamStore<f32> {
        MpVin::params(self)
    }

    fn params_mut(&mut self) -> &mut ParamStore<f32> {
        MpVin::params_mut(self)
    }

    fn set_params(&mut self, params: ParamStore<f32>) -> Result<()> {
        MpVin::set_params(self, params)
    }

    fn prepare(&self, sample: &NavSample) -> Result<MpVinInputs> {
        let weights = mean_weights(&sample.loss_mask())?;
        let target = Array2::from_shape_fn((sample.labels.len(), 2), |(i, c)| sample.labels[i][c] as f32);
        Ok(MpVinInputs { graph: self.inputs(&sample.graph)?, target: Arc::new(target), weights })
    }

    fn record_loss(&self, s: &mut Session<f32>, inputs: &MpVinInputs, loss: LossKind) -> Var {
        let (pi, _, _) = self.record(s, &inputs.graph);
        match loss {
            LossKind::MseUnit => s.tape.masked_mse(pi, inputs.target.clone(), inputs.weights.clone()),
            LossKind::Cosine => s.tape.masked_cosine(pi, inputs.target.clone(), inputs.weights.clone()),
        }
    }

    fn policy(&self, store: &ParamStore<f32>, inputs: &MpVinInputs) -> Vec<[f64; 2]> {
        let out = self.plan_inputs(store, &inputs.graph);
        out.policy.rows().into_iter().map(|r| [f64::from(r[0]), f64::from(r[1])]).collect()
    }
}

#[derive(Clone, Debug)]
pub struct VinInputs {
    pub grid: GridInputs<f32>,
    /// Move index per cell, supervised where the weight is nonzero.
    pub target: Arc<Vec<usize>>,
    pub weights: Arc<Vec<f32>>,
    /// Cell (row-major index) of each graph node.
    pub cell_of_node: Vec<usize>,
}

/// The occupancy grid behind a sample: the sample itself when its nodes are the
/// cells of a square grid, otherwise the floor discretization of its positions.
pub fn sample_grid(sample: &NavSample) -> Result<(GridWorld, Vec<usize>, NavSample)> {
    let g = &sample.graph;
    let n = g.n_nodes();
    let m = (n as f64).sqrt().round() as usize;
    let is_grid =
        m * m == n && g.positions().iter().enumerate().all(|(i, p)| p[0] == (i / m) as f64 && p[1] == (i % m) as f64);
    if is_grid {
        let goal = g.goal();
        let grid = GridWorld::new(m, g.obstacle().iter().map(|o| !o).collect(), (goal / m, goal % m))?;
        return Ok((grid, (0..n).collect(), sample.clone()));
    }
    let extent = g.positions().iter().flat_map(|p| [p[0], p[1]]).fold(0.0, f64::max);
    let m = extent.floor() as usize + 1;
    let (grid, cells) = discretize_graph_to_grid(g, m)?;
    let labels = dijkstra_labels(&grid.to_graph());
    Ok((grid, cells.iter().map(|&(r, c)| r * m + c).collect(), labels))
}

impl PolicyModel for GridVin {
    type Inputs = VinInputs;

    fn name(&self) -> String {
        "vin".into()
    }

    fn spec(&self) -> ModelSpec {
        ModelSpec::Vin(*self.config())
    }

    fn field_types(&self) -> Result<Vec<(String, FieldTypeDescriptor)>> {
        let t = crate::symmetry::GroupSpec::trivial();
        let c = self.config();
        [("input", 18), ("hidden", c.hidden), ("q", c.q_size), ("logits", 4)]
            .into_iter()
            .map(|(n, d)| Ok((n.to_string(), crate::symmetry::FieldType::trivial(t, d).descriptor()?)))
            .collect()
    }

    fn params(&self) -> &ParamStore<f32> {
        GridVin::params(self)
    }

    fn params_mut(&mut self) -> &mut ParamStore<f32> {
        GridVin::params_mut(self)
    }

    fn set_params(&mut self, params: ParamStore<f32>) -> Result<()> {
        GridVin::set_params(self, params)
    }

    fn prepare(&self, sample: &NavSample) -> Result<VinInputs> {
        let (grid, cell_of_node, cell_sample) = sample_grid(sample)?;
        let mask = cell_sample.loss_mask();
        let weights = mean_weights(&mask)?;
        let target = cell_sample
            .labels
            .iter()
            .zip(&mask)
            .map(|(l, &m)| if m { action_discretize(*l).map(|a| a.index()) } else { Ok(0) })
            .collect::<Result<Vec<_>>>()?;
        Ok(VinInputs { grid: GridInputs::new(&grid), target: Arc::new(target), weights, cell_of_node })
    }

    fn record_loss(&self, s: &mut Session<f32>, inputs: &VinInputs, _loss: LossKind) -> Var {
        let logits = self.record(s, &inputs.grid);
        s.tape.softmax_xent(logits, inputs.target.clone(), inputs.weights.clone())
    }

    fn policy(&self, store: &ParamStore<f32>, inputs: &VinInputs) -> Vec<[f64; 2]> {
        let mut s = Session::new(store, false);
        let out = self.record(&mut s, &inputs.grid);
        let per_cell = GridVin::policy_vectors(s.tape.value(out));
        inputs.cell_of_node.iter().map(|&c| per_cell[c]).collect()
    }
}

/// What to build: enough to reconstruct a model before loading its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "config", rename_all = "snake_case")]
pub enum ModelSpec {
    Mpvin(PlannerConfig),
    Vin(VinConfig),
}

impl ModelSpec {
    pub fn build(&self, seed: u64) -> Result<Planner> {
        Ok(match self {
            ModelSpec::Mpvin(c) => Planner::Mpvin(MpVin::new(*c, seed)?),
            ModelSpec::Vin(c) => Planner::Vin(GridVin::new(*c, seed)?),
        })
    }
}

/// Either planner behind one type, for code that picks the model at run time.
#[derive(Clone, Debug)]
pub enum Planner {
    Mpvin(MpVin),
    Vin(GridVin),
}

#[derive(Clone, Debug)]
pub enum PlannerInputs {
    Mpvin(MpVinInputs),
    Vin(VinInputs),
}

macro_rules! dispatch {
    ($self:expr, $m:ident => $body:expr) => {
        match $self {
            Planner::Mpvin($m) => $body,
            Planner::Vin($m) => $body,
        }
    };
}

impl PolicyModel for Planner {
    type Inputs = PlannerInputs;

    fn name(&self) -> String {
        dispatch!(self, m => m.name())
    }

    fn spec(&self) -> ModelSpec {
        dispatch!(self, m => m.spec())
    }

    fn field_types(&self) -> Result<Vec<(String, FieldTypeDescriptor)>> {
        dispatch!(self, m => m.field_types())
    }

    fn params(&self) -> &ParamStore<f32> {
        dispatch!(self, m => PolicyModel::params(m))
    }

    fn params_mut(&mut self) -> &mut ParamStore<f32> {
        dispatch!(self, m => PolicyModel::params_mut(m))
    }

    fn set_params(&mut self, params: ParamStore<f32>) -> Result<()> {
        dispatch!(self, m => PolicyModel::set_params(m, params))
    }

    fn prepare(&self, sample: &NavSample) -> Result<PlannerInputs> {
        Ok(match self {
            Planner::Mpvin(m) => PlannerInputs::Mpvin(m.prepare(sample)?),
            Planner::Vin(m) => PlannerInputs::Vin(m.prepare(sample)?),
        })
    }

    fn record_loss(&self, s: &mut Session<f32>, inputs: &PlannerInputs, loss: LossKind) -> Var {
        match (self, inputs) {
            (Planner::Mpvin(m), PlannerInputs::Mpvin(i)) => m.record_loss(s, i, loss),
            (Planner::Vin(m), PlannerInputs::Vin(i)) => m.record_loss(s, i, loss),
            _ => panic!("inputs were prepared by a different planner"),
        }
    }

    fn policy(&self, store: &ParamStore<f32>, inputs: &PlannerInputs) -> Vec<[f64; 2]> {
        match (self, inputs) {
            (Planner::Mpvin(m), PlannerInputs::Mpvin(i)) => m.policy(store, i),
            (Planner::Vin(m), PlannerInputs::Vin(i)) => m.policy(store, i),
            _ => panic!("inputs were prepared by a different planner"),
        }
    }
}
