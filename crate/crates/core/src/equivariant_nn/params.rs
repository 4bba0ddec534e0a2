use std::collections::HashMap;
use std::sync::Arc;

use ndarray::Array2;
use rand::Rng;

use super::layout::CoeffMap;
use super::tape::{Tape, Var};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParamId(pub(crate) usize);

/// Named flat parameter arrays owned by a model. Layers refer to entries by [`ParamId`].
#[derive(Clone, Debug, PartialEq)]
pub struct ParamStore<T> {
    entries: Vec<(String, Vec<T>)>,
}

impl<T: Real> Default for ParamStore<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> ParamStore<T> {
    pub fn new() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn add(&mut self, name: impl Into<String>, values: Vec<T>) -> ParamId {
        self.entries.push((name.into(), values));
        ParamId(self.entries.len() - 1)
    }

    /// Uniform in `[-bound, bound]`.
    pub fn add_uniform<R: Rng>(&mut self, name: impl Into<String>, len: usize, bound: f64, rng: &mut R) -> ParamId {
        let values =
            (0..len).map(|_| if bound > 0.0 { T::of(rng.gen_range(-bound..=bound)) } else { T::zero() }).collect();
        self.add(name, values)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_len(&self) -> usize {
        self.entries.iter().map(|(_, v)| v.len()).sum()
    }

    pub fn get(&self, id: ParamId) -> &[T] {
        &self.entries[id.0].1
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Vec<T> {
        &mut self.entries[id.0].1
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[T])> {
        self.entries.iter().map(|(n, v)| (n.as_str(), v.as_slice()))
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut Vec<T>> {
        self.entries.iter_mut().map(|(_, v)| v)
    }

    pub fn by_name(&self, name: &str) -> Option<&[T]> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn cast<U: Real>(&self) -> ParamStore<U> {
        ParamStore {
            entries: self
                .entries
                .iter()
                .map(|(n, v)| (n.clone(), v.iter().map(|x| U::of(x.as_f64())).collect()))
                .collect(),
        }
    }

    pub fn fill(&mut self, value: T) {
        for (_, v) in &mut self.entries {
            v.iter_mut().for_each(|x| *x = value);
        }
    }

    /// Flattened copy of every parameter in store order.
    pub fn flatten(&self) -> Vec<T> {
        self.entries.iter().flat_map(|(_, v)| v.iter().copied()).collect()
    }
}

/// One forward pass: a tape plus the parameter leaves bound onto it.
pub struct Session<T: Real> {
    pub tape: Tape<T>,
    params: Vec<Var>,
    expanded: HashMap<usize, Var>,
}

impl<T: Real> Session<T> {
    /// Binds every parameter as a leaf; `track` selects whether gradients flow to them.
    pub fn new(store: &ParamStore<T>, track: bool) -> Self {
        let mut tape = Tape::new();
        let params = store
            .entries
            .iter()
            .map(|(_, v)| {
                let a = Array2::from_shape_vec((1, v.len()), v.clone()).expect("row");
                if track {
                    tape.param(a)
                } else {
                    tape.constant(a)
                }
            })
            .collect();
        Self { tape, params, expanded: HashMap::new() }
    }

    pub fn param(&self, id: ParamId) -> Var {
        self.params[id.0]
    }

    /// Expanded dense matrix for a coefficient parameter, computed once per session.
    pub fn expanded(&mut self, id: ParamId, layout: &Arc<CoeffMap>) -> Var {
        if let Some(&v) = self.expanded.get(&id.0) {
            return v;
        }
        let c = self.params[id.0];
        let v = self.tape.expand_weight(c, layout.clone());
        self.expanded.insert(id.0, v);
        v
    }

    /// Gradient of `loss` for every parameter, in store order.
    pub fn gradients(&self, loss: Var) -> Vec<Vec<T>> {
        let mut grads = self.tape.backward(loss);
        self.params
            .iter()
            .map(|&p| match grads.take(p) {
                Some(g) => g.into_raw_vec_and_offset().0,
                None => vec![T::zero(); self.tape.value(p).len()],
            })
            .collect()
    }
}
