//! A minimal reverse-mode autodiff tape over dense 2D arrays.
//!
//! Every value is an `Array2<T>`; row vectors are `1 × n`. Ops are recorded in
//! execution order and [`Tape::backward`] sweeps them in reverse. Leaves are
//! either parameters (gradients tracked) or constants (not tracked).

use std::sync::Arc;

use ndarray::{s, Array2, ArrayView2, Axis, Zip};

use super::layout::CoeffMap;
use crate::scalar::Real;

/// Row index used by [`Tape::gather_rows`] to produce a zero row.
pub const PAD: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

enum Op<T> {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    AddRow { x: Var, row: Var, scale: Option<Arc<Vec<T>>> },
    Relu(Var),
    Concat(Vec<Var>),
    SliceRows(Var, usize),
    SliceCols(Var, usize),
    Gather(Var, Arc<Vec<usize>>),
    ScatterAdd(Var, Arc<Vec<usize>>),
    EdgeRelu { a: Var, b: Var, c: Option<Var>, dst: Arc<Vec<usize>>, src: Arc<Vec<usize>> },
    MulRows(Var, Arc<Vec<T>>),
    Scale(Var, T),
    ExpandWeight(Var, Arc<CoeffMap>),
    ChannelMax { x: Var, argmax: Vec<u32>, fields: usize },
    SumAll(Var),
    MaskedMse { pred: Var, target: Arc<Array2<T>>, weights: Arc<Vec<T>> },
    MaskedCosine { pred: Var, target: Arc<Array2<T>>, weights: Arc<Vec<T>> },
    SoftmaxXent { logits: Var, target: Arc<Vec<usize>>, weights: Arc<Vec<T>> },
}

struct Node<T> {
    value: Array2<T>,
    op: Op<T>,
    tracked: bool,
}

pub struct Tape<T: Real> {
    nodes: Vec<Node<T>>,
}

impl<T: Real> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

pub struct Gradients<T> {
    grads: Vec<Option<Array2<T>>>,
}

impl<T: Real> Gradients<T> {
    pub fn get(&self, v: Var) -> Option<&Array2<T>> {
        self.grads[v.0].as_ref()
    }

    pub fn take(&mut self, v: Var) -> Option<Array2<T>> {
        self.grads[v.0].take()
    }
}

fn accumulate<T: Real>(slot: &mut Option<Array2<T>>, g: Array2<T>) {
    match slot {
        Some(acc) => *acc += &g,
        None => *slot = Some(g),
    }
}

impl<T: Real> Tape<T> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Array2<T>, op: Op<T>, tracked: bool) -> Var {
        self.nodes.push(Node { value, op, tracked });
        Var(self.nodes.len() - 1)
    }

    fn tracked(&self, v: Var) -> bool {
        self.nodes[v.0].tracked
    }

    pub fn value(&self, v: Var) -> &Array2<T> {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> T {
        self.nodes[v.0].value[[0, 0]]
    }

    pub fn constant(&mut self, value: Array2<T>) -> Var {
        self.push(value, Op::Leaf, false)
    }

    pub fn param(&mut self, value: Array2<T>) -> Var {
        self.push(value, Op::Leaf, true)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).dot(self.value(b));
        let t = self.tracked(a) || self.tracked(b);
        self.push(v, Op::MatMul(a, b), t)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) + self.value(b);
        let t = self.tracked(a) || self.tracked(b);
        self.push(v, Op::Add(a, b), t)
    }

    /// `x + row`, broadcasting a `1 × d` row over every row of `x`.
    pub fn add_row(&mut self, x: Var, row: Var) -> Var {
        let v = self.value(x) + self.value(row);
        let t = self.tracked(x) || self.tracked(row);
        self.push(v, Op::AddRow { x, row, scale: None }, t)
    }

    /// `x_i + s_i · row` with a fixed per-row scale.
    pub fn add_scaled_row(&mut self, x: Var, row: Var, scale: Arc<Vec<T>>) -> Var {
        let mut v = self.value(x).clone();
        let r = self.value(row).row(0).to_owned();
        for (mut out, &s) in v.rows_mut().into_iter().zip(scale.iter()) {
            out.scaled_add(s, &r);
        }
        let t = self.tracked(x) || self.tracked(row);
        self.push(v, Op::AddRow { x, row, scale: Some(scale) }, t)
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let v = self.value(x).mapv(|a| if a > T::zero() { a } else { T::zero() });
        let t = self.tracked(x);
        self.push(v, Op::Relu(x), t)
    }

    /// Column-wise concatenation.
    pub fn concat(&mut self, parts: &[Var]) -> Var {
        let views: Vec<ArrayView2<T>> = parts.iter().map(|&p| self.value(p).view()).collect();
        let v = ndarray::concatenate(Axis(1), &views).expect("concat: row counts differ");
        let t = parts.iter().any(|&p| self.tracked(p));
        self.push(v, Op::Concat(parts.to_vec()), t)
    }

    pub fn slice_rows(&mut self, x: Var, start: usize, end: usize) -> Var {
        let v = self.value(x).slice(s![start..end, ..]).to_owned();
        let t = self.tracked(x);
        self.push(v, Op::SliceRows(x, start), t)
    }

    pub fn slice_cols(&mut self, x: Var, start: usize, end: usize) -> Var {
        let v = self.value(x).slice(s![.., start..end]).to_owned();
        let t = self.tracked(x);
        self.push(v, Op::SliceCols(x, start), t)
    }

    /// `out[e] = x[index[e]]`, with [`PAD`] producing a zero row.
    pub fn gather_rows(&mut self, x: Var, index: Arc<Vec<usize>>) -> Var {
        let src = self.value(x);
        let mut v = Array2::zeros((index.len(), src.ncols()));
        for (mut row, &i) in v.rows_mut().into_iter().zip(index.iter()) {
            if i != PAD {
                row.assign(&src.row(i));
            }
        }
        let t = self.tracked(x);
        self.push(v, Op::Gather(x, index), t)
    }

    /// `out[index[e]] += x[e]` into `rows` output rows.
    pub fn scatter_add_rows(&mut self, x: Var, index: Arc<Vec<usize>>, rows: usize) -> Var {
        let src = self.value(x);
        let mut v = Array2::zeros((rows, src.ncols()));
        for (row, &i) in src.rows().into_iter().zip(index.iter()) {
            let mut dst = v.row_mut(i);
            dst += &row;
        }
        let t = self.tracked(x);
        self.push(v, Op::ScatterAdd(x, index), t)
    }

    /// Fused per-edge hidden layer `relu(a[dst_e] + b[src_e] + c_e)`.
    pub fn edge_relu(&mut self, a: Var, b: Var, c: Option<Var>, dst: Arc<Vec<usize>>, src: Arc<Vec<usize>>) -> Var {
        let (av, bv) = (self.value(a), self.value(b));
        let width = av.ncols();
        let mut v = match c {
            Some(c) => self.value(c).clone(),
            None => Array2::zeros((dst.len(), width)),
        };
        for (e, mut row) in v.rows_mut().into_iter().enumerate() {
            let (ra, rb) = (av.row(dst[e]), bv.row(src[e]));
            Zip::from(&mut row).and(&ra).and(&rb).for_each(|o, &x, &y| {
                let s = *o + x + y;
                *o = if s > T::zero() { s } else { T::zero() };
            });
        }
        let t = self.tracked(a) || self.tracked(b) || c.is_some_and(|c| self.tracked(c));
        self.push(v, Op::EdgeRelu { a, b, c, dst, src }, t)
    }

    /// Multiplies row `i` by the constant `scale[i]`.
    pub fn mul_rows(&mut self, x: Var, scale: Arc<Vec<T>>) -> Var {
        let mut v = self.value(x).clone();
        for (mut row, &s) in v.rows_mut().into_iter().zip(scale.iter()) {
            row.mapv_inplace(|a| a * s);
        }
        let t = self.tracked(x);
        self.push(v, Op::MulRows(x, scale), t)
    }

    pub fn scale(&mut self, x: Var, k: T) -> Var {
        let v = self.value(x) * k;
        let t = self.tracked(x);
        self.push(v, Op::Scale(x, k), t)
    }

    /// Expands a `1 × n_coeffs` coefficient row through a [`CoeffMap`] (a weight or a bias).
    pub fn expand_weight(&mut self, coeffs: Var, layout: Arc<CoeffMap>) -> Var {
        let v = layout.expand(self.value(coeffs).row(0).as_slice().expect("contiguous coefficients"));
        let t = self.tracked(coeffs);
        self.push(v, Op::ExpandWeight(coeffs, layout), t)
    }

    /// Max over `fields` blocks of width `w = ncols / fields`, independently at
    /// each in-block coordinate: `out[n, j] = max_f x[n, f·w + j]`.
    pub fn channel_max(&mut self, x: Var, fields: usize) -> Var {
        let xv = self.value(x);
        let w = xv.ncols() / fields;
        assert_eq!(w * fields, xv.ncols(), "channel_max: width not divisible by field count");
        let n = xv.nrows();
        let mut v = Array2::zeros((n, w));
        let mut argmax = vec![0u32; n * w];
        for r in 0..n {
            let row = xv.row(r);
            for j in 0..w {
                let mut best = row[j];
                let mut arg = 0u32;
                for f in 1..fields {
                    let c = row[f * w + j];
                    if c > best {
                        best = c;
                        arg = f as u32;
                    }
                }
                v[[r, j]] = best;
                argmax[r * w + j] = arg;
            }
        }
        let t = self.tracked(x);
        self.push(v, Op::ChannelMax { x, argmax, fields }, t)
    }

    pub fn sum_all(&mut self, x: Var) -> Var {
        let s = self.value(x).sum();
        let t = self.tracked(x);
        self.push(Array2::from_elem((1, 1), s), Op::SumAll(x), t)
    }

    /// `Σ_i w_i ‖pred_i − target_i‖²`.
    pub fn masked_mse(&mut self, pred: Var, target: Arc<Array2<T>>, weights: Arc<Vec<T>>) -> Var {
        let p = self.value(pred);
        let mut total = T::zero();
        for ((pr, tr), &w) in p.rows().into_iter().zip(target.rows()).zip(weights.iter()) {
            if w != T::zero() {
                let d: T = pr.iter().zip(tr.iter()).map(|(&a, &b)| (a - b) * (a - b)).sum();
                total += w * d;
            }
        }
        let t = self.tracked(pred);
        self.push(Array2::from_elem((1, 1), total), Op::MaskedMse { pred, target, weights }, t)
    }

    /// `Σ_i w_i (1 − cos(pred_i, target_i))`.
    pub fn masked_cosine(&mut self, pred: Var, target: Arc<Array2<T>>, weights: Arc<Vec<T>>) -> Var {
        let p = self.value(pred);
        let mut total = T::zero();
        for ((pr, tr), &w) in p.rows().into_iter().zip(target.rows()).zip(weights.iter()) {
            if w != T::zero() {
                total += w * (T::one() - cosine(pr.as_slice().unwrap(), tr.as_slice().unwrap()));
            }
        }
        let t = self.tracked(pred);
        self.push(Array2::from_elem((1, 1), total), Op::MaskedCosine { pred, target, weights }, t)
    }

    /// `Σ_i w_i · (−log softmax(logits_i)[target_i])`.
    pub fn softmax_xent(&mut self, logits: Var, target: Arc<Vec<usize>>, weights: Arc<Vec<T>>) -> Var {
        let l = self.value(logits);
        let mut total = T::zero();
        for ((row, &y), &w) in l.rows().into_iter().zip(target.iter()).zip(weights.iter()) {
            if w != T::zero() {
                let m = row.fold(T::neg_infinity(), |a, &b| a.max(b));
                let lse = row.iter().map(|&x| (x - m).exp()).sum::<T>().ln() + m;
                total += w * (lse - row[y]);
            }
        }
        let t = self.tracked(logits);
        self.push(Array2::from_elem((1, 1), total), Op::SoftmaxXent { logits, target, weights }, t)
    }

    /// Reverse sweep from the scalar `out`.
    pub fn backward(&self, out: Var) -> Gradients<T> {
        let mut grads: Vec<Option<Array2<T>>> = (0..self.nodes.len()).map(|_| None).collect();
        let shape = self.value(out).raw_dim();
        grads[out.0] = Some(Array2::ones(shape));
        for idx in (0..=out.0).rev() {
            let node = &self.nodes[idx];
            if !node.tracked {
                continue;
            }
            let Some(g) = grads[idx].take() else { continue };
            self.propagate(node, &g, &mut grads);
            grads[idx] = Some(g);
        }
        Gradients { grads }
    }

    fn propagate(&self, node: &Node<T>, g: &Array2<T>, grads: &mut [Option<Array2<T>>]) {
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                if self.tracked(*a) {
                    accumulate(&mut grads[a.0], g.dot(&self.value(*b).t()));
                }
                if self.tracked(*b) {
                    accumulate(&mut grads[b.0], self.value(*a).t().dot(g));
                }
            }
            Op::Add(a, b) => {
                for v in [a, b] {
                    if self.tracked(*v) {
                        accumulate(&mut grads[v.0], g.clone());
                    }
                }
            }
            Op::AddRow { x, row, scale } => {
                if self.tracked(*x) {
                    accumulate(&mut grads[x.0], g.clone());
                }
                if self.tracked(*row) {
                    let gr = match scale {
                        None => g.sum_axis(Axis(0)).insert_axis(Axis(0)),
                        Some(s) => {
                            let sv = ndarray::ArrayView2::from_shape((1, s.len()), s.as_slice()).unwrap();
                            sv.dot(g)
                        }
                    };
                    accumulate(&mut grads[row.0], gr);
                }
            }
            Op::Relu(x) => {
                if self.tracked(*x) {
                    let mut gx = g.clone();
                    Zip::from(&mut gx).and(&node.value).for_each(|d, &y| {
                        if y <= T::zero() {
                            *d = T::zero();
                        }
                    });
                    accumulate(&mut grads[x.0], gx);
                }
            }
            Op::Concat(parts) => {
                let mut off = 0;
                for p in parts {
                    let w = self.value(*p).ncols();
                    if self.tracked(*p) {
                        accumulate(&mut grads[p.0], g.slice(s![.., off..off + w]).to_owned());
                    }
                    off += w;
                }
            }
            Op::SliceRows(x, start) => {
                if self.tracked(*x) {
                    let mut gx = Array2::zeros(self.value(*x).raw_dim());
                    gx.slice_mut(s![*start..*start + g.nrows(), ..]).assign(g);
                    accumulate(&mut grads[x.0], gx);
                }
            }
            Op::SliceCols(x, start) => {
                if self.tracked(*x) {
                    let mut gx = Array2::zeros(self.value(*x).raw_dim());
                    gx.slice_mut(s![.., *start..*start + g.ncols()]).assign(g);
                    accumulate(&mut grads[x.0], gx);
                }
            }
            Op::Gather(x, index) => {
                if self.tracked(*x) {
                    let mut gx = Array2::zeros(self.value(*x).raw_dim());
                    for (row, &i) in g.rows().into_iter().zip(index.iter()) {
                        if i != PAD {
                            let mut dst = gx.row_mut(i);
                            dst += &row;
                        }
                    }
                    accumulate(&mut grads[x.0], gx);
                }
            }
            Op::ScatterAdd(x, index) => {
                if self.tracked(*x) {
                    let mut gx = Array2::zeros(self.value(*x).raw_dim());
                    for (mut row, &i) in gx.rows_mut().into_iter().zip(index.iter()) {
                        row.assign(&g.row(i));
                    }
                    accumulate(&mut grads[x.0], gx);
                }
            }
            Op::EdgeRelu { a, b, c, dst, src } => {
                let mut ge = g.clone();
                Zip::from(&mut ge).and(&node.value).for_each(|d, &y| {
                    if y <= T::zero() {
                        *d = T::zero();
                    }
                });
                if self.tracked(*a) {
                    let mut ga = Array2::zeros(self.value(*a).raw_dim());
                    for (row, &i) in ge.rows().into_iter().zip(dst.iter()) {
                        let mut d = ga.row_mut(i);
                        d += &row;
                    }
                    accumulate(&mut grads[a.0], ga);
                }
                if self.tracked(*b) {
                    let mut gb = Array2::zeros(self.value(*b).raw_dim());
                    for (row, &i) in ge.rows().into_iter().zip(src.iter()) {
                        let mut d = gb.row_mut(i);
                        d += &row;
                    }
                    accumulate(&mut grads[b.0], gb);
                }
                if let Some(c) = c {
                    if self.tracked(*c) {
                        accumulate(&mut grads[c.0], ge);
                    }
                }
            }
            Op::MulRows(x, scale) => {
                if self.tracked(*x) {
                    let mut gx = g.clone();
                    for (mut row, &s) in gx.rows_mut().into_iter().zip(scale.iter()) {
                        row.mapv_inplace(|a| a * s);
                    }
                    accumulate(&mut grads[x.0], gx);
                }
            }
            Op::Scale(x, k) => {
                if self.tracked(*x) {
                    accumulate(&mut grads[x.0], g * *k);
                }
            }
            Op::ExpandWeight(c, layout) => {
                if self.tracked(*c) {
                    accumulate(&mut grads[c.0], layout.pullback(g));
                }
            }
            Op::ChannelMax { x, argmax, fields } => {
                if self.tracked(*x) {
                    let xv = self.value(*x);
                    let w = xv.ncols() / fields;
                    let mut gx = Array2::zeros(xv.raw_dim());
                    for r in 0..g.nrows() {
                        for j in 0..w {
                            let f = argmax[r * w + j] as usize;
                            gx[[r, f * w + j]] = g[[r, j]];
                        }
                    }
                    accumulate(&mut grads[x.0], gx);
                }
            }
            Op::SumAll(x) => {
                if self.tracked(*x) {
                    accumulate(&mut grads[x.0], Array2::from_elem(self.value(*x).raw_dim(), g[[0, 0]]));
                }
            }
            Op::MaskedMse { pred, target, weights } => {
                if self.tracked(*pred) {
                    let two = T::of(2.0) * g[[0, 0]];
                    let mut gp = self.value(*pred) - &**target;
                    for (mut row, &w) in gp.rows_mut().into_iter().zip(weights.iter()) {
                        row.mapv_inplace(|d| d * w * two);
                    }
                    accumulate(&mut grads[pred.0], gp);
                }
            }
            Op::MaskedCosine { pred, target, weights } => {
                if self.tracked(*pred) {
                    let p = self.value(*pred);
                    let mut gp = Array2::zeros(p.raw_dim());
                    for (((mut out, pr), tr), &w) in
                        gp.rows_mut().into_iter().zip(p.rows()).zip(target.rows()).zip(weights.iter())
                    {
                        if w == T::zero() {
                            continue;
                        }
                        let (pr, tr) = (pr.as_slice().unwrap(), tr.as_slice().unwrap());
                        let pn = norm(pr).max(T::of(1e-12));
                        let tn = norm(tr).max(T::of(1e-12));
                        let cos = cosine(pr, tr);
                        for k in 0..pr.len() {
                            let d = tr[k] / (pn * tn) - cos * pr[k] / (pn * pn);
                            out[k] = -w * d * g[[0, 0]];
                        }
                    }
                    accumulate(&mut grads[pred.0], gp);
                }
            }
            Op::SoftmaxXent { logits, target, weights } => {
                if self.tracked(*logits) {
                    let l = self.value(*logits);
                    let mut gl = Array2::zeros(l.raw_dim());
                    for (((mut out, row), &y), &w) in
                        gl.rows_mut().into_iter().zip(l.rows()).zip(target.iter()).zip(weights.iter())
                    {
                        if w == T::zero() {
                            continue;
                        }
                        let m = row.fold(T::neg_infinity(), |a, &b| a.max(b));
                        let z: T = row.iter().map(|&x| (x - m).exp()).sum();
                        for (k, o) in out.iter_mut().enumerate() {
                            let p = (row[k] - m).exp() / z;
                            let onehot = if k == y { T::one() } else { T::zero() };
                            *o = w * (p - onehot) * g[[0, 0]];
                        }
                    }
                    accumulate(&mut grads[logits.0], gl);
                }
            }
        }
    }
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

pub(crate) fn cosine<T: Real>(a: &[T], b: &[T]) -> T {
    let eps = T::of(1e-12);
    let d: T = a.iter().zip(b).map(|(&x, &y)| x * y).sum();
    d / (norm(a).max(eps) * norm(b).max(eps))
}
