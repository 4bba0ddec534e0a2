//! Sparse linear maps from layer coefficients to dense weights.
//!
//! An equivariant weight is `W = Σ_k c_k B_k`, assembled block by block from
//! the intertwiner bases between pairs of input and output parts. Both the
//! expansion and its adjoint are driven by the same `(coefficient, position,
//! value)` triplets.

use ndarray::Array2;

use crate::error::Result;
use crate::scalar::Real;
use crate::symmetry::{intertwiner_basis, rep_trivial, FieldType};

#[derive(Clone, Debug)]
pub struct CoeffMap {
    rows: usize,
    cols: usize,
    n_coeffs: usize,
    entries: Vec<(u32, u32, f64)>,
}

/// Layout of an `in × out` weight (applied as `X · W`).
pub type WeightLayout = CoeffMap;
/// Layout of a `1 × out` bias restricted to the invariant subspace.
pub type BiasLayout = CoeffMap;

impl CoeffMap {
    pub fn weight(rep_in: &FieldType, rep_out: &FieldType) -> Result<Self> {
        let (d_in, d_out) = (rep_in.total_dim(), rep_out.total_dim());
        let mut entries = Vec::new();
        let mut n_coeffs = 0usize;
        for (p_out, off_out) in rep_out.parts().iter().zip(rep_out.offsets()) {
            for (p_in, off_in) in rep_in.parts().iter().zip(rep_in.offsets()) {
                let basis = intertwiner_basis(p_in, p_out)?;
                for b in &basis.basis {
                    for ((i, j), &v) in b.indexed_iter() {
                        if v != 0.0 {
                            let pos = (off_in + j) * d_out + off_out + i;
                            entries.push((n_coeffs as u32, pos as u32, v));
                        }
                    }
                    n_coeffs += 1;
                }
            }
        }
        Ok(Self { rows: d_in, cols: d_out, n_coeffs, entries })
    }

    /// Biases `b` with `ρ(g) b = b`, i.e. intertwiners from the trivial representation.
    pub fn bias(rep_out: &FieldType) -> Result<Self> {
        let d_out = rep_out.total_dim();
        let trivial = rep_trivial(rep_out.group());
        let mut entries = Vec::new();
        let mut n_coeffs = 0usize;
        for (p_out, off_out) in rep_out.parts().iter().zip(rep_out.offsets()) {
            let basis = intertwiner_basis(&trivial, p_out)?;
            for b in &basis.basis {
                for ((i, _), &v) in b.indexed_iter() {
                    if v != 0.0 {
                        entries.push((n_coeffs as u32, (off_out + i) as u32, v));
                    }
                }
                n_coeffs += 1;
            }
        }
        Ok(Self { rows: 1, cols: d_out, n_coeffs, entries })
    }

    pub fn n_coeffs(&self) -> usize {
        self.n_coeffs
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn expand<T: Real>(&self, coeffs: &[T]) -> Array2<T> {
        debug_assert_eq!(coeffs.len(), self.n_coeffs);
        let mut flat = vec![T::zero(); self.rows * self.cols];
        for &(k, pos, v) in &self.entries {
            flat[pos as usize] += coeffs[k as usize] * T::of(v);
        }
        Array2::from_shape_vec((self.rows, self.cols), flat).expect("layout shape")
    }

    /// Least-squares coefficients of a dense `rows × cols` matrix. Exact when the
    /// matrix lies in the span, since basis elements are mutually orthogonal.
    pub fn project(&self, dense: &Array2<f64>) -> Vec<f64> {
        let d = dense.as_standard_layout();
        let flat = d.as_slice().expect("standard layout");
        let mut num = vec![0.0; self.n_coeffs];
        let mut den = vec![0.0; self.n_coeffs];
        for &(k, pos, v) in &self.entries {
            num[k as usize] += flat[pos as usize] * v;
            den[k as usize] += v * v;
        }
        num.iter().zip(&den).map(|(n, d)| if *d > 0.0 { n / d } else { 0.0 }).collect()
    }

    /// Adjoint of [`expand`](Self::expand): `∂L/∂c` from `∂L/∂W`, as a `1 × n` row.
    pub fn pullback<T: Real>(&self, grad: &Array2<T>) -> Array2<T> {
        let g = grad.as_standard_layout();
        let flat = g.as_slice().expect("standard layout");
        let mut out = vec![T::zero(); self.n_coeffs];
        for &(k, pos, v) in &self.entries {
            out[k as usize] += flat[pos as usize] * T::of(v);
        }
        Array2::from_shape_vec((1, self.n_coeffs), out).expect("coefficient shape")
    }
}
