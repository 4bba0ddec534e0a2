//! Equivariant message passing:
//! `m_ij = propagate(h_i, h_j, e_ij)`, `h'_i = update(h_i, Σ_{j∈N(i)} m_ij)`.

use std::sync::Arc;

use ndarray::Array2;
use rand::Rng;

use super::mlp::EquivariantMlp;
use super::params::{ParamStore, Session};
use super::tape::Var;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::symmetry::FieldType;

/// Directed edge list `(dst ← src)` with cached in-degrees.
#[derive(Clone, Debug)]
pub struct EdgeIndex<T> {
    n_nodes: usize,
    dst: Arc<Vec<usize>>,
    src: Arc<Vec<usize>>,
    degree: Arc<Vec<T>>,
}

impl<T: Real> EdgeIndex<T> {
    /// `edges` are `(receiver, sender)` pairs.
    pub fn new(n_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let (mut dst, mut src) = (Vec::new(), Vec::new());
        let mut degree = vec![T::zero(); n_nodes];
        for (i, j) in edges {
            if i >= n_nodes || j >= n_nodes {
                return Err(Error::Graph(format!("edge ({i}, {j}) out of range for {n_nodes} nodes")));
            }
            dst.push(i);
            src.push(j);
            degree[i] += T::one();
        }
        Ok(Self { n_nodes, dst: Arc::new(dst), src: Arc::new(src), degree: Arc::new(degree) })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.dst.len()
    }

    pub fn dst(&self) -> &Arc<Vec<usize>> {
        &self.dst
    }

    pub fn src(&self) -> &Arc<Vec<usize>> {
        &self.src
    }

    pub fn degree(&self) -> &Arc<Vec<T>> {
        &self.degree
    }
}

#[derive(Clone, Debug)]
pub struct MessagePassing {
    node_in: FieldType,
    edge_in: FieldType,
    propagate: EquivariantMlp,
    update: EquivariantMlp,
}

/// Per-session quantities that do not change across repeated applications on
/// one graph: the split first-layer weights and the edge-feature term.
#[derive(Clone, Copy, Debug)]
pub struct MpCache {
    w_dst: Var,
    w_src: Var,
    edge_term: Var,
}

impl MessagePassing {
    /// One hidden layer of type `hidden` in both `propagate` and `update`.
    #[allow(clippy::too_many_arguments)]
    pub fn new<T: Real, R: Rng>(
        store: &mut ParamStore<T>,
        name: &str,
        node_in: FieldType,
        edge_in: FieldType,
        hidden: FieldType,
        message: FieldType,
        out: FieldType,
        rng: &mut R,
    ) -> Result<Self> {
        let prop_in = node_in.concat(&node_in)?.concat(&edge_in)?;
        let propagate = EquivariantMlp::new(
            store,
            &format!("{name}.propagate"),
            prop_in,
            std::slice::from_ref(&hidden),
            message.clone(),
            true,
            rng,
        )?;
        let update = EquivariantMlp::new(
            store,
            &format!("{name}.update"),
            node_in.concat(&message)?,
            &[hidden],
            out,
            true,
            rng,
        )?;
        Ok(Self { node_in, edge_in, propagate, update })
    }

    pub fn node_in(&self) -> &FieldType {
        &self.node_in
    }

    pub fn edge_in(&self) -> &FieldType {
        &self.edge_in
    }

    pub fn rep_out(&self) -> &FieldType {
        self.update.rep_out()
    }

    pub fn propagate(&self) -> &EquivariantMlp {
        &self.propagate
    }

    pub fn update(&self) -> &EquivariantMlp {
        &self.update
    }

    pub fn prepare<T: Real>(&self, s: &mut Session<T>, edge_features: Var) -> MpCache {
        let first = &self.propagate.layers()[0];
        let d = self.node_in.total_dim();
        let w1 = s.expanded(first.weight_id(), first.layout());
        let w_dst = s.tape.slice_rows(w1, 0, d);
        let w_src = s.tape.slice_rows(w1, d, 2 * d);
        let w_edge = s.tape.slice_rows(w1, 2 * d, 2 * d + self.edge_in.total_dim());
        let edge_term = s.tape.matmul(edge_features, w_edge);
        let edge_term = first.add_bias(s, edge_term, None);
        MpCache { w_dst, w_src, edge_term }
    }

    /// Records one message-passing step on the tape. `h` is `n_nodes × node_in`.
    pub fn apply<T: Real>(&self, s: &mut Session<T>, h: Var, edges: &EdgeIndex<T>, cache: &MpCache) -> Var {
        let a = s.tape.matmul(h, cache.w_dst);
        let b = s.tape.matmul(h, cache.w_src);
        let hidden = s.tape.edge_relu(a, b, Some(cache.edge_term), edges.dst.clone(), edges.src.clone());
        // the output layer is linear, so Σ_j (W z_ij + c) = W Σ_j z_ij + deg_i c
        let summed = s.tape.scatter_add_rows(hidden, edges.dst.clone(), edges.n_nodes);
        let last = &self.propagate.layers()[1];
        let w2 = s.expanded(last.weight_id(), last.layout());
        let msg = s.tape.matmul(summed, w2);
        let msg = last.add_bias(s, msg, Some(edges.degree.clone()));
        let u = s.tape.concat(&[h, msg]);
        self.update.apply(s, u)
    }

    /// Reference evaluation that runs the full propagate MLP on every edge.
    pub fn forward_per_edge<T: Real>(
        &self,
        store: &ParamStore<T>,
        h: &Array2<T>,
        edge_features: &Array2<T>,
        edges: &EdgeIndex<T>,
    ) -> Result<Array2<T>> {
        self.check(h, edge_features, edges)?;
        let width = self.propagate.rep_out().total_dim();
        let mut agg = Array2::zeros((edges.n_nodes, width));
        for (e, (&i, &j)) in edges.dst.iter().zip(edges.src.iter()).enumerate() {
            let input = ndarray::concatenate(ndarray::Axis(0), &[h.row(i), h.row(j), edge_features.row(e)])
                .expect("edge input")
                .insert_axis(ndarray::Axis(0));
            let m = self.propagate.forward_rows(store, &input);
            let mut row = agg.row_mut(i);
            row += &m.row(0);
        }
        let u = ndarray::concatenate(ndarray::Axis(1), &[h.view(), agg.view()]).expect("update input");
        Ok(self.update.forward_rows(store, &u))
    }

    pub fn forward<T: Real>(
        &self,
        store: &ParamStore<T>,
        h: &Array2<T>,
        edge_features: &Array2<T>,
        edges: &EdgeIndex<T>,
    ) -> Result<Array2<T>> {
        self.check(h, edge_features, edges)?;
        let mut s = Session::new(store, false);
        let hv = s.tape.constant(h.clone());
        let ev = s.tape.constant(edge_features.clone());
        let cache = self.prepare(&mut s, ev);
        let out = self.apply(&mut s, hv, edges, &cache);
        Ok(s.tape.value(out).clone())
    }

    fn check<T: Real>(&self, h: &Array2<T>, e: &Array2<T>, edges: &EdgeIndex<T>) -> Result<()> {
        if h.nrows() != edges.n_nodes || h.ncols() != self.node_in.total_dim() {
            return Err(Error::FieldType(format!(
                "node features are {}×{}, expected {}×{}",
                h.nrows(),
                h.ncols(),
                edges.n_nodes,
                self.node_in.total_dim()
            )));
        }
        if e.nrows() != edges.n_edges() || e.ncols() != self.edge_in.total_dim() {
            return Err(Error::FieldType(format!(
                "edge features are {}×{}, expected {}×{}",
                e.nrows(),
                e.ncols(),
                edges.n_edges(),
                self.edge_in.total_dim()
            )));
        }
        Ok(())
    }
}
