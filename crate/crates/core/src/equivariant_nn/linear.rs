use std::sync::Arc;

use ndarray::Array2;
use rand::Rng;

use super::layout::CoeffMap;
use super::params::{ParamId, ParamStore, Session};
use super::tape::Var;
use super::FieldVector;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::symmetry::FieldType;

/// A linear map constrained to the span of the intertwiners between its input
/// and output field types, so `W ρ_in(g) = ρ_out(g) W` for any coefficients.
///
/// Over the trivial group the span is every matrix, which is how the
/// non-equivariant variants get dense layers of the same shape.
#[derive(Clone, Debug)]
pub struct EquivariantLinear {
    rep_in: FieldType,
    rep_out: FieldType,
    layout: Arc<CoeffMap>,
    bias_layout: Option<Arc<CoeffMap>>,
    weight: ParamId,
    bias: Option<ParamId>,
}

impl EquivariantLinear {
    /// Coefficients uniform in `±1/√fan_in` (`fan_in = rep_in.total_dim()`), bias zero.
    pub fn new<T: Real, R: Rng>(
        store: &mut ParamStore<T>,
        name: &str,
        rep_in: FieldType,
        rep_out: FieldType,
        bias: bool,
        rng: &mut R,
    ) -> Result<Self> {
        if rep_in.group() != rep_out.group() {
            return Err(Error::FieldType(format!(
                "linear map between field types over {} and {}",
                rep_in.group(),
                rep_out.group()
            )));
        }
        let layout = Arc::new(CoeffMap::weight(&rep_in, &rep_out)?);
        let bound = 1.0 / (rep_in.total_dim().max(1) as f64).sqrt();
        let weight = store.add_uniform(format!("{name}.weight"), layout.n_coeffs(), bound, rng);
        let (bias_layout, bias) = if bias {
            let bl = Arc::new(CoeffMap::bias(&rep_out)?);
            let id = store.add(format!("{name}.bias"), vec![T::zero(); bl.n_coeffs()]);
            (Some(bl), Some(id))
        } else {
            (None, None)
        };
        Ok(Self { rep_in, rep_out, layout, bias_layout, weight, bias })
    }

    pub fn rep_in(&self) -> &FieldType {
        &self.rep_in
    }

    pub fn rep_out(&self) -> &FieldType {
        &self.rep_out
    }

    /// Number of free weight coefficients (the intertwiner rank).
    pub fn rank(&self) -> usize {
        self.layout.n_coeffs()
    }

    pub fn weight_id(&self) -> ParamId {
        self.weight
    }

    pub fn bias_id(&self) -> Option<ParamId> {
        self.bias
    }

    pub fn layout(&self) -> &Arc<CoeffMap> {
        &self.layout
    }

    /// Realized `in × out` weight.
    pub fn weight_matrix<T: Real>(&self, store: &ParamStore<T>) -> Array2<T> {
        self.layout.expand(store.get(self.weight))
    }

    pub fn bias_row<T: Real>(&self, store: &ParamStore<T>) -> Option<Array2<T>> {
        Some(self.bias_layout.as_ref()?.expand(store.get(self.bias?)))
    }

    /// Sets coefficients so the layer is the identity map. Requires `rep_in == rep_out`.
    pub fn set_identity<T: Real>(&self, store: &mut ParamStore<T>) -> Result<()> {
        if self.rep_in != self.rep_out {
            return Err(Error::FieldType("identity requires equal input and output types".into()));
        }
        let n = self.rep_in.total_dim();
        let coeffs = self.layout.project(&Array2::eye(n));
        *store.get_mut(self.weight) = coeffs.into_iter().map(T::of).collect();
        if let Some(b) = self.bias {
            store.get_mut(b).iter_mut().for_each(|x| *x = T::zero());
        }
        Ok(())
    }

    /// `y = x W (+ b)` for one field vector.
    pub fn forward<T: Real>(&self, store: &ParamStore<T>, x: &FieldVector<T>) -> Result<FieldVector<T>> {
        if x.field_type() != &self.rep_in {
            return Err(Error::FieldType("input does not match the layer's input field type".into()));
        }
        let row = Array2::from_shape_vec((1, x.values().len()), x.values().to_vec()).expect("row");
        let y = self.forward_rows(store, &row);
        FieldVector::new(y.into_raw_vec_and_offset().0, self.rep_out.clone())
    }

    /// Applies the layer to every row of `x` without recording gradients.
    pub fn forward_rows<T: Real>(&self, store: &ParamStore<T>, x: &Array2<T>) -> Array2<T> {
        let mut y = x.dot(&self.weight_matrix(store));
        if let Some(b) = self.bias_row(store) {
            y += &b;
        }
        y
    }

    /// Records `x W (+ b)` on the session tape.
    pub fn apply<T: Real>(&self, s: &mut Session<T>, x: Var) -> Var {
        let w = s.expanded(self.weight, &self.layout);
        let y = s.tape.matmul(x, w);
        self.add_bias(s, y, None)
    }

    pub(crate) fn add_bias<T: Real>(&self, s: &mut Session<T>, y: Var, scale: Option<Arc<Vec<T>>>) -> Var {
        match (self.bias, &self.bias_layout) {
            (Some(id), Some(layout)) => {
                let b = s.expanded(id, layout);
                match scale {
                    Some(sc) => s.tape.add_scaled_row(y, b, sc),
                    None => s.tape.add_row(y, b),
                }
            }
            _ => y,
        }
    }
}
