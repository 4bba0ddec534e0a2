use std::sync::Arc;

use ndarray::{s, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::PlannerConfig;
use crate::equivariant_nn::{EdgeIndex, EquivariantLinear, MessagePassing, ParamStore, Session, Var};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::symmetry::{FieldType, GroupSpec};
use crate::worlds::{GeometricGraph, NODE_FEATURES};

/// Value iteration as repeated message passing on a geometric graph.
#[derive(Clone, Debug)]
pub struct MpVin {
    config: PlannerConfig,
    group: GroupSpec,
    r_mp: MessagePassing,
    q_mp: MessagePassing,
    policy: EquivariantLinear,
    params: ParamStore<f32>,
}

/// Per-graph tensors consumed by [`MpVin::record`].
#[derive(Clone, Debug)]
pub struct GraphInputs<T> {
    pub node: Array2<T>,
    pub edge: Array2<T>,
    pub edges: EdgeIndex<T>,
    /// 1 on free nodes, 0 on obstacles.
    pub free: Arc<Vec<T>>,
}

#[derive(Clone, Debug)]
pub struct PlanOutput<T> {
    /// `N × 2` movement per node, zero on obstacles.
    pub policy: Array2<T>,
    /// Final `N × (q_size·|G|)` Q field.
    pub q: Array2<T>,
    /// Final `N × |G|` value field.
    pub value: Array2<T>,
}

impl MpVin {
    pub fn new(config: PlannerConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let g = config.symmetry();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamStore::new();
        let hidden = FieldType::regular(g, config.hidden_dim / g.order());
        let flags = FieldType::trivial(g, 2);
        let (node_in, edge_in) = if config.variant.relative() {
            (flags, FieldType::standard(g))
        } else {
            (FieldType::standard(g).concat(&flags)?, FieldType::standard(g).concat(&FieldType::standard(g))?)
        };
        let r_field = FieldType::regular(g, config.r_dim);
        let v_field = FieldType::regular(g, 1);
        let q_field = FieldType::regular(g, config.q_size);
        let r_mp = MessagePassing::new(
            &mut params,
            "r_mp",
            node_in,
            edge_in.clone(),
            hidden.clone(),
            hidden.clone(),
            r_field.clone(),
            &mut rng,
        )?;
        let q_mp = MessagePassing::new(
            &mut params,
            "q_mp",
            r_field.concat(&v_field)?,
            edge_in,
            hidden.clone(),
            hidden,
            q_field.clone(),
            &mut rng,
        )?;
        let policy = EquivariantLinear::new(&mut params, "policy", q_field, FieldType::standard(g), true, &mut rng)?;
        Ok(Self { config, group: g, r_mp, q_mp, policy, params })
    }

    pub fn config(&self) -> &PlannerConfig {
        &self.config
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn params(&self) -> &ParamStore<f32> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore<f32> {
        &mut self.params
    }

    pub fn r_mp(&self) -> &MessagePassing {
        &self.r_mp
    }

    pub fn q_mp(&self) -> &MessagePassing {
        &self.q_mp
    }

    pub fn policy_head(&self) -> &EquivariantLinear {
        &self.policy
    }

    /// Node and edge features as the variant sees them: flags plus relative
    /// offsets `x_i − x_j`, or flags plus absolute positions.
    pub fn inputs<T: Real>(&self, graph: &GeometricGraph) -> Result<GraphInputs<T>> {
        let f = graph.features();
        if f.ncols() != NODE_FEATURES {
            return Err(Error::FieldType(format!(
                "graph has {} node features, the planner reads {NODE_FEATURES}",
                f.ncols()
            )));
        }
        let relative = self.config.variant.relative();
        let node = if relative { f.slice(s![.., 2..]).mapv(T::of) } else { f.mapv(T::of) };
        let directed = graph.directed_edges();
        let pos = graph.positions();
        let edge = Array2::from_shape_fn((directed.len(), if relative { 2 } else { 4 }), |(e, c)| {
            let (i, j) = directed[e];
            T::of(match (relative, c) {
                (true, _) => pos[i][c] - pos[j][c],
                (false, 0 | 1) => pos[i][c],
                (false, _) => pos[j][c - 2],
            })
        });
        let edges = EdgeIndex::new(graph.n_nodes(), directed)?;
        let free = Arc::new(graph.obstacle().iter().map(|&o| if o { T::zero() } else { T::one() }).collect());
        Ok(GraphInputs { node, edge, edges, free })
    }

    /// Records a full planning pass; returns `(policy, q, value)` variables.
    pub fn record<T: Real>(&self, s: &mut Session<T>, inputs: &GraphInputs<T>) -> (Var, Var, Var) {
        let node = s.tape.constant(inputs.node.clone());
        let edge = s.tape.constant(inputs.edge.clone());
        let r_cache = self.r_mp.prepare(s, edge);
        let r = self.r_mp.apply(s, node, &inputs.edges, &r_cache);
        let q_cache = self.q_mp.prepare(s, edge);
        let mut v = s.tape.constant(Array2::zeros((inputs.edges.n_nodes(), self.group.order())));
        let mut q = v;
        for _ in 0..self.config.iterations {
            let rv = s.tape.concat(&[r, v]);
            q = self.q_mp.apply(s, rv, &inputs.edges, &q_cache);
            v = s.tape.channel_max(q, self.config.q_size);
        }
        let pi = self.policy.apply(s, q);
        let pi = s.tape.mul_rows(pi, inputs.free.clone());
        (pi, q, v)
    }

    pub fn plan_with<T: Real>(&self, store: &ParamStore<T>, graph: &GeometricGraph) -> Result<PlanOutput<T>> {
        let inputs = self.inputs(graph)?;
        Ok(self.plan_inputs(store, &inputs))
    }

    pub fn plan_inputs<T: Real>(&self, store: &ParamStore<T>, inputs: &GraphInputs<T>) -> PlanOutput<T> {
        let mut s = Session::new(store, false);
        let (pi, q, v) = self.record(&mut s, inputs);
        PlanOutput { policy: s.tape.value(pi).clone(), q: s.tape.value(q).clone(), value: s.tape.value(v).clone() }
    }

    /// Plans with the model's own single-precision parameters.
    pub fn plan(&self, graph: &GeometricGraph) -> Result<PlanOutput<f32>> {
        self.plan_with(&self.params, graph)
    }

    /// Replaces the parameters, checking names and lengths.
    pub fn set_params(&mut self, params: ParamStore<f32>) -> Result<()> {
        let same = params.len() == self.params.len()
            && params.iter().zip(self.params.iter()).all(|((a, x), (b, y))| a == b && x.len() == y.len());
        if !same {
            return Err(Error::Model("parameter layout does not match the planner".into()));
        }
        self.params = params;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::Variant;
    use crate::worlds::{generate_graph_world, GraphWorldParams};

    #[test]
    fn zero_parameters_give_zero_policy() {
        let mut cfg = PlannerConfig::graph(Variant::R2Group, Some(GroupSpec::dihedral(4)));
        cfg.iterations = 1;
        let mut m = MpVin::new(cfg, 0).unwrap();
        m.params_mut().fill(0.0);
        let g = generate_graph_world(&GraphWorldParams::with_nodes(30), 1).unwrap();
        let out = m.plan(&g).unwrap();
        assert!(out.policy.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shapes_and_obstacle_mask() {
        let g = generate_graph_world(&GraphWorldParams::with_nodes(40), 2).unwrap();
        for variant in Variant::ALL {
            let group = variant.uses_group().then(|| GroupSpec::cyclic(4));
            let mut cfg = PlannerConfig::graph(variant, group);
            cfg.iterations = 3;
            let m = MpVin::new(cfg, 1).unwrap();
            let out = m.plan(&g).unwrap();
            assert_eq!(out.policy.dim(), (40, 2));
            assert_eq!(out.q.ncols(), 8 * m.group().order());
            for i in 0..40 {
                if g.obstacle()[i] {
                    assert!(out.policy.row(i).iter().all(|&v| v == 0.0));
                }
            }
        }
    }

    #[test]
    fn translation_invariance() {
        let g = generate_graph_world(&GraphWorldParams::with_nodes(40), 3).unwrap();
        let m = MpVin::new(PlannerConfig::graph(Variant::R2, None), 4).unwrap();
        let a = m.plan(&g).unwrap().policy;
        let b = m.plan(&g.map_positions(|p| [p[0] + 7.0, p[1] - 3.0])).unwrap().policy;
        assert_eq!(a, b);
        let c = m.plan_with(&m.params().cast::<f64>(), &g.map_positions(|p| [p[0] + 5.3, p[1] - 2.1])).unwrap();
        let d = m.plan_with(&m.params().cast::<f64>(), &g).unwrap();
        for (x, y) in c.policy.iter().zip(d.policy.iter()) {
            assert!((x - y).abs() <= 1e-6);
        }
    }

    #[test]
    fn value_is_max_of_q() {
        let g = generate_graph_world(&GraphWorldParams::with_nodes(30), 5).unwrap();
        let m = MpVin::new(PlannerConfig::graph(Variant::R2Group, Some(GroupSpec::cyclic(4))), 2).unwrap();
        let out = m.plan(&g).unwrap();
        for n in 0..30 {
            for j in 0..4 {
                let best = (0..8).map(|c| out.q[[n, c * 4 + j]]).fold(f32::NEG_INFINITY, f32::max);
                assert_eq!(out.value[[n, j]], best);
            }
        }
    }
}
