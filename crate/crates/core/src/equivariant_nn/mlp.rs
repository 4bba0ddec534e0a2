use ndarray::Array2;
use rand::Rng;

use super::linear::EquivariantLinear;
use super::params::{ParamStore, Session};
use super::tape::Var;
use super::FieldVector;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::symmetry::FieldType;

/// Equivariant linear layers interleaved with element-wise ReLU; the last layer is linear.
///
/// Hidden field types must act by permutations (regular representations), so
/// that the element-wise nonlinearity commutes with the group action.
#[derive(Clone, Debug)]
pub struct EquivariantMlp {
    layers: Vec<EquivariantLinear>,
}

impl EquivariantMlp {
    pub fn new<T: Real, R: Rng>(
        store: &mut ParamStore<T>,
        name: &str,
        rep_in: FieldType,
        hidden: &[FieldType],
        rep_out: FieldType,
        bias: bool,
        rng: &mut R,
    ) -> Result<Self> {
        if let Some(h) = hidden.iter().find(|h| !h.is_permutation()) {
            return Err(Error::Config(format!(
                "hidden field type over {} has non-regular parts; element-wise ReLU would break equivariance",
                h.group()
            )));
        }
        let mut types = vec![rep_in];
        types.extend(hidden.iter().cloned());
        types.push(rep_out);
        let layers = types
            .windows(2)
            .enumerate()
            .map(|(i, w)| EquivariantLinear::new(store, &format!("{name}.{i}"), w[0].clone(), w[1].clone(), bias, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[EquivariantLinear] {
        &self.layers
    }

    pub fn rep_in(&self) -> &FieldType {
        self.layers[0].rep_in()
    }

    pub fn rep_out(&self) -> &FieldType {
        self.layers.last().expect("nonempty mlp").rep_out()
    }

    pub fn forward<T: Real>(&self, store: &ParamStore<T>, x: &FieldVector<T>) -> Result<FieldVector<T>> {
        if x.field_type() != self.rep_in() {
            return Err(Error::FieldType("input does not match the MLP's input field type".into()));
        }
        let row = Array2::from_shape_vec((1, x.values().len()), x.values().to_vec()).expect("row");
        let y = self.forward_rows(store, &row);
        FieldVector::new(y.into_raw_vec_and_offset().0, self.rep_out().clone())
    }

    pub fn forward_rows<T: Real>(&self, store: &ParamStore<T>, x: &Array2<T>) -> Array2<T> {
        let mut h = x.clone();
        for (i, l) in self.layers.iter().enumerate() {
            h = l.forward_rows(store, &h);
            if i + 1 < self.layers.len() {
                h.mapv_inplace(|a| a.max(T::zero()));
            }
        }
        h
    }

    pub fn apply<T: Real>(&self, s: &mut Session<T>, x: Var) -> Var {
        let mut h = x;
        for (i, l) in self.layers.iter().enumerate() {
            h = l.apply(s, h);
            if i + 1 < self.layers.len() {
                h = s.tape.relu(h);
            }
        }
        h
    }
}
