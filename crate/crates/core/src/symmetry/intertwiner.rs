//! Bases of equivariant linear maps `W ρ_in(g) = ρ_out(g) W`.
//!
//! The space of intertwiners is the image of the group-averaging projector
//! `P(W) = 1/|G| Σ_g ρ_out(g) W ρ_in(g⁻¹)`. We project every matrix unit and
//! extract a basis with twice-iterated Gram-Schmidt.

use ndarray::Array2;

use super::rep::Representation;
use crate::error::{Error, Result};

const RANK_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct IntertwinerBasis {
    pub rep_in: Representation,
    pub rep_out: Representation,
    /// `dim_out × dim_in` matrices, mutually orthogonal in the Frobenius inner
    /// product. Each is scaled so `‖B‖_F² = dim_in·dim_out / rank`, which keeps
    /// the entries of `Σ c_k B_k` at the variance of the coefficients.
    pub basis: Vec<Array2<f64>>,
}

impl IntertwinerBasis {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Largest entry of `B ρ_in(g) − ρ_out(g) B` over the basis and group.
    pub fn max_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        for b in &self.basis {
            for g in 0..self.rep_in.group().order() {
                let lhs = b.dot(self.rep_in.matrix(g));
                let rhs = self.rep_out.matrix(g).dot(b);
                for (x, y) in lhs.iter().zip(rhs.iter()) {
                    worst = worst.max((x - y).abs());
                }
            }
        }
        worst
    }
}

pub fn solve_intertwiner_basis(rep_in: &Representation, rep_out: &Representation) -> Result<IntertwinerBasis> {
    let group = rep_in.group();
    if rep_out.group() != group {
        return Err(Error::FieldType(format!(
            "intertwiner between representations of {} and {}",
            group,
            rep_out.group()
        )));
    }
    let (d_in, d_out) = (rep_in.dim(), rep_out.dim());
    let order = group.order();
    let inv: Vec<&Array2<f64>> = (0..order).map(|g| rep_in.matrix(group.inverse(g))).collect();

    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for a in 0..d_out {
        for b in 0..d_in {
            // ρ_out(g) E_ab ρ_in(g⁻¹) = outer(ρ_out(g)[:, a], ρ_in(g⁻¹)[b, :])
            let mut p = vec![0.0; d_out * d_in];
            for g in 0..order {
                let col = rep_out.matrix(g).column(a);
                let row = inv[g].row(b);
                for (i, &ci) in col.iter().enumerate() {
                    if ci == 0.0 {
                        continue;
                    }
                    let dst = &mut p[i * d_in..(i + 1) * d_in];
                    for (d, &rj) in dst.iter_mut().zip(row.iter()) {
                        *d += ci * rj;
                    }
                }
            }
            let scale = 1.0 / order as f64;
            p.iter_mut().for_each(|x| *x *= scale);
            let before = norm(&p);
            if before < RANK_TOL {
                continue;
            }
            for _ in 0..2 {
                for q in &ortho {
                    let d = dot(&p, q);
                    p.iter_mut().zip(q).for_each(|(x, y)| *x -= d * y);
                }
            }
            let after = norm(&p);
            if after > RANK_TOL * before.max(1.0) {
                p.iter_mut().for_each(|x| *x /= after);
                ortho.push(p);
            }
        }
    }

    let rank = ortho.len();
    let target = if rank > 0 { ((d_in * d_out) as f64 / rank as f64).sqrt() } else { 0.0 };
    let basis = ortho
        .into_iter()
        .map(|v| {
            Array2::from_shape_vec((d_out, d_in), v.into_iter().map(|x| clean(x * target)).collect())
                .expect("basis shape")
        })
        .collect();
    Ok(IntertwinerBasis { rep_in: rep_in.clone(), rep_out: rep_out.clone(), basis })
}

fn clean(x: f64) -> f64 {
    if x.abs() < 1e-14 {
        0.0
    } else {
        x
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetry::group::GroupSpec;
    use crate::symmetry::rep::{rep_regular, rep_standard, rep_trivial};

    #[test]
    fn known_ranks() {
        for g in [GroupSpec::cyclic(4), GroupSpec::dihedral(8), GroupSpec::trivial()] {
            assert_eq!(solve_intertwiner_basis(&rep_trivial(g), &rep_trivial(g)).unwrap().rank(), 1);
        }
        let c4 = GroupSpec::cyclic(4);
        let d4 = GroupSpec::dihedral(4);
        assert_eq!(solve_intertwiner_basis(&rep_regular(c4), &rep_regular(c4)).unwrap().rank(), 4);
        assert_eq!(solve_intertwiner_basis(&rep_standard(d4), &rep_standard(d4)).unwrap().rank(), 1);
        assert_eq!(solve_intertwiner_basis(&rep_standard(c4), &rep_standard(c4)).unwrap().rank(), 2);
        // no invariant vector in the standard rep of a nontrivial rotation group
        assert_eq!(solve_intertwiner_basis(&rep_trivial(c4), &rep_standard(c4)).unwrap().rank(), 0);
    }

    #[test]
    fn basis_satisfies_constraint() {
        let d8 = GroupSpec::dihedral(8);
        for (a, b) in [
            (rep_regular(d8), rep_standard(d8)),
            (rep_standard(d8), rep_regular(d8)),
            (rep_regular(d8), rep_regular(d8)),
        ] {
            let basis = solve_intertwiner_basis(&a, &b).unwrap();
            assert!(basis.max_violation() <= 1e-10);
        }
    }

    #[test]
    fn regular_basis_is_scaled_orbit_indicators() {
        let d4 = GroupSpec::dihedral(4);
        let basis = solve_intertwiner_basis(&rep_regular(d4), &rep_regular(d4)).unwrap();
        assert_eq!(basis.rank(), 8);
        for b in &basis.basis {
            assert!(b.iter().all(|&x| x == 0.0 || (x - 1.0).abs() < 1e-12 || (x + 1.0).abs() < 1e-12));
        }
    }
}
