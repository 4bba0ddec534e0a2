//! Real matrix representations of `C_n` / `D_n`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::group::GroupSpec;
use crate::error::{Error, Result};

/// Serializable description of how a representation was built. Matrices are
/// always reconstructed from this, never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum RepKind {
    Trivial,
    Standard,
    Regular,
    Restricted {
        parent_group: GroupSpec,
        parent: Box<RepKind>,
        embedding: Vec<usize>,
    },
    DirectSum {
        parts: Vec<RepKind>,
    },
    /// Built from explicit matrices; cannot be serialized.
    #[serde(skip)]
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepDescriptor {
    pub group: GroupSpec,
    #[serde(flatten)]
    pub kind: RepKind,
}

#[derive(Clone, Debug)]
pub struct Representation {
    group: GroupSpec,
    dim: usize,
    matrices: Vec<Array2<f64>>,
    kind: RepKind,
}

impl PartialEq for Representation {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group && self.dim == other.dim && self.matrices == other.matrices
    }
}

fn snap(x: f64) -> f64 {
    for exact in [0.0, 1.0, -1.0, 0.5, -0.5] {
        if (x - exact).abs() < 1e-14 {
            return exact;
        }
    }
    x
}

/// 2×2 matrix of an `O(2)` element: rotation by `angle`, preceded by the axis
/// reflection `diag(1, -1)` when `reflect` is set.
pub fn orthogonal_2d(angle: f64, reflect: bool) -> [[f64; 2]; 2] {
    let (s, c) = angle.sin_cos();
    let (c, s) = (snap(c), snap(s));
    if reflect {
        [[c, s], [s, -c]]
    } else {
        [[c, -s], [s, c]]
    }
}

pub fn rep_trivial(group: GroupSpec) -> Representation {
    Representation { group, dim: 1, matrices: vec![Array2::<f64>::eye(1); group.order()], kind: RepKind::Trivial }
}

/// The 2D representation acting on positions and planar actions.
pub fn rep_standard(group: GroupSpec) -> Representation {
    let matrices = (0..group.order())
        .map(|g| {
            let (angle, reflect) = group.angle(g);
            let m = orthogonal_2d(angle, reflect);
            Array2::from_shape_fn((2, 2), |(i, j)| m[i][j])
        })
        .collect();
    Representation { group, dim: 2, matrices, kind: RepKind::Standard }
}

/// Permutation representation with `ρ(g) e_h = e_{g·h}`.
pub fn rep_regular(group: GroupSpec) -> Representation {
    let o = group.order();
    let matrices = (0..o)
        .map(|g| {
            let mut m = Array2::zeros((o, o));
            for h in 0..o {
                m[[group.compose(g, h), h]] = 1.0;
            }
            m
        })
        .collect();
    Representation { group, dim: o, matrices, kind: RepKind::Regular }
}

/// `Res^G_H[ρ]`: the representation `ρ` evaluated on the image of `embedding: H → G`.
pub fn rep_restrict(rep: &Representation, subgroup: GroupSpec, embedding: &[usize]) -> Result<Representation> {
    rep.group.check_embedding(&subgroup, embedding)?;
    let matrices = embedding.iter().map(|&g| rep.matrices[g].clone()).collect();
    Ok(Representation {
        group: subgroup,
        dim: rep.dim,
        matrices,
        kind: RepKind::Restricted {
            parent_group: rep.group,
            parent: Box::new(rep.kind.clone()),
            embedding: embedding.to_vec(),
        },
    })
}

/// Restriction along the canonical embedding `H ↪ G`.
pub fn rep_restrict_canonical(rep: &Representation, subgroup: GroupSpec) -> Result<Representation> {
    let embedding = rep.group.canonical_embedding(&subgroup)?;
    rep_restrict(rep, subgroup, &embedding)
}

pub fn rep_direct_sum(parts: &[Representation]) -> Result<Representation> {
    let group =
        parts.first().map(|p| p.group).ok_or_else(|| Error::FieldType("direct sum of zero representations".into()))?;
    if parts.iter().any(|p| p.group != group) {
        return Err(Error::FieldType("direct sum of representations of different groups".into()));
    }
    let dim: usize = parts.iter().map(|p| p.dim).sum();
    let matrices = (0..group.order())
        .map(|g| {
            let mut m = Array2::zeros((dim, dim));
            let mut off = 0;
            for p in parts {
                m.slice_mut(ndarray::s![off..off + p.dim, off..off + p.dim]).assign(&p.matrices[g]);
                off += p.dim;
            }
            m
        })
        .collect();
    Ok(Representation {
        group,
        dim,
        matrices,
        kind: RepKind::DirectSum { parts: parts.iter().map(|p| p.kind.clone()).collect() },
    })
}

impl Representation {
    /// Wraps explicit matrices without checking the homomorphism property; use
    /// [`check_representation`] to validate.
    pub fn from_matrices(group: GroupSpec, matrices: Vec<Array2<f64>>) -> Result<Self> {
        if matrices.len() != group.order() {
            return Err(Error::Shape { expected: group.order(), got: matrices.len() });
        }
        let dim = matrices[0].nrows();
        if matrices.iter().any(|m| m.dim() != (dim, dim)) {
            return Err(Error::FieldType("representation matrices must be square and of equal size".into()));
        }
        Ok(Self { group, dim, matrices, kind: RepKind::Custom })
    }

    pub fn from_descriptor(desc: &RepDescriptor) -> Result<Self> {
        Self::build(desc.group, &desc.kind)
    }

    fn build(group: GroupSpec, kind: &RepKind) -> Result<Self> {
        match kind {
            RepKind::Trivial => Ok(rep_trivial(group)),
            RepKind::Standard => Ok(rep_standard(group)),
            RepKind::Regular => Ok(rep_regular(group)),
            RepKind::Restricted { parent_group, parent, embedding } => {
                let parent = Self::build(*parent_group, parent)?;
                rep_restrict(&parent, group, embedding)
            }
            RepKind::DirectSum { parts } => {
                let parts = parts.iter().map(|k| Self::build(group, k)).collect::<Result<Vec<_>>>()?;
                rep_direct_sum(&parts)
            }
            RepKind::Custom => Err(Error::FieldType("custom representations have no descriptor".into())),
        }
    }

    pub fn descriptor(&self) -> Result<RepDescriptor> {
        if contains_custom(&self.kind) {
            return Err(Error::FieldType("custom representations have no descriptor".into()));
        }
        Ok(RepDescriptor { group: self.group, kind: self.kind.clone() })
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &RepKind {
        &self.kind
    }

    pub fn matrix(&self, g: usize) -> &Array2<f64> {
        &self.matrices[g]
    }

    pub fn matrices(&self) -> &[Array2<f64>] {
        &self.matrices
    }

    /// True when every matrix is a permutation matrix, which is what makes
    /// element-wise nonlinearities commute with the action.
    pub fn is_permutation(&self) -> bool {
        self.matrices.iter().all(|m| {
            m.iter().all(|&x| x == 0.0 || x == 1.0)
                && m.rows().into_iter().all(|r| r.sum() == 1.0)
                && m.columns().into_iter().all(|c| c.sum() == 1.0)
        })
    }

    pub fn is_trivial_action(&self) -> bool {
        self.matrices.iter().all(|m| *m == Array2::<f64>::eye(self.dim))
    }
}

fn contains_custom(kind: &RepKind) -> bool {
    match kind {
        RepKind::Custom => true,
        RepKind::Restricted { parent, .. } => contains_custom(parent),
        RepKind::DirectSum { parts } => parts.iter().any(contains_custom),
        _ => false,
    }
}

/// Largest entry of `ρ(gg') − ρ(g)ρ(g')` over all element pairs.
pub fn check_representation(rep: &Representation) -> f64 {
    let g = rep.group;
    let mut worst = 0.0f64;
    for a in 0..g.order() {
        for b in 0..g.order() {
            let prod = rep.matrices[a].dot(&rep.matrices[b]);
            let direct = &rep.matrices[g.compose(a, b)];
            for (x, y) in prod.iter().zip(direct.iter()) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn all_groups() -> Vec<GroupSpec> {
        (1..=16).map(GroupSpec::cyclic).chain((1..=8).map(GroupSpec::dihedral)).collect()
    }

    #[test]
    fn standard_examples() {
        let c4 = GroupSpec::cyclic(4);
        let std = rep_standard(c4);
        assert_eq!(std.matrix(1), &array![[0.0, -1.0], [1.0, 0.0]]);
        assert_eq!(std.matrix(0), &Array2::<f64>::eye(2));
        let d4 = GroupSpec::dihedral(4);
        let std = rep_standard(d4);
        assert_eq!(std.matrix(d4.reflection().unwrap()), &array![[1.0, 0.0], [0.0, -1.0]]);
    }

    #[test]
    fn regular_examples() {
        let c4 = GroupSpec::cyclic(4);
        let reg = rep_regular(c4);
        let shift = array![[0.0, 0.0, 0.0, 1.0], [1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]];
        assert_eq!(reg.matrix(1), &shift);
        let images = array![1.0, 2.0, 3.0, 4.0];
        assert_eq!(reg.matrix(1).dot(&images), array![4.0, 1.0, 2.0, 3.0]);
        for g in all_groups() {
            let reg = rep_regular(g);
            assert!(reg.is_permutation());
            for a in 0..g.order() {
                assert_eq!(reg.matrix(a).dot(reg.matrix(g.inverse(a))), Array2::<f64>::eye(g.order()));
            }
        }
    }

    #[test]
    fn homomorphisms() {
        for g in all_groups() {
            for rep in [rep_trivial(g), rep_standard(g), rep_regular(g)] {
                assert!(check_representation(&rep) <= 1e-10, "{g} {:?}", rep.kind());
            }
            let sum = rep_direct_sum(&[rep_trivial(g), rep_standard(g), rep_regular(g)]).unwrap();
            assert!(check_representation(&sum) <= 1e-10);
        }
    }

    #[test]
    fn corrupted_rep_detected() {
        let g = GroupSpec::dihedral(4);
        let mut m = rep_standard(g).matrices().to_vec();
        m[3][[0, 1]] += 0.25;
        let bad = Representation::from_matrices(g, m).unwrap();
        assert!(check_representation(&bad) > 0.0);
    }

    #[test]
    fn restriction_of_c8_regular_is_shift_by_two() {
        let c8 = GroupSpec::cyclic(8);
        let c4 = GroupSpec::cyclic(4);
        let res = rep_restrict(&rep_regular(c8), c4, &[0, 2, 4, 6]).unwrap();
        let mut shift2 = Array2::<f64>::zeros((8, 8));
        for i in 0..8 {
            shift2[[(i + 2) % 8, i]] = 1.0;
        }
        assert_eq!(res.matrix(1), &shift2);
        assert!(check_representation(&res) <= 1e-10);
    }

    #[test]
    fn restriction_edge_cases() {
        let d8 = GroupSpec::dihedral(8);
        let reg = rep_regular(d8);
        let trivial = rep_restrict(&reg, GroupSpec::trivial(), &[0]).unwrap();
        assert_eq!(trivial.matrices(), &[Array2::<f64>::eye(16)]);
        let res = rep_restrict_canonical(&reg, GroupSpec::cyclic(4)).unwrap();
        assert_eq!(res.dim(), 16);
        assert!(check_representation(&res) <= 1e-10);
        assert!(matches!(rep_restrict(&reg, GroupSpec::cyclic(4), &[0, 1, 2, 3]), Err(Error::InvalidEmbedding(_))));
    }

    #[test]
    fn descriptor_roundtrip() {
        let d8 = GroupSpec::dihedral(8);
        let res = rep_restrict_canonical(&rep_regular(d8), GroupSpec::cyclic(4)).unwrap();
        let sum = rep_direct_sum(&[res.clone(), rep_trivial(GroupSpec::cyclic(4))]).unwrap();
        let json = serde_json::to_string(&sum.descriptor().unwrap()).unwrap();
        let back = Representation::from_descriptor(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, sum);
        let custom = Representation::from_matrices(d8, rep_standard(d8).matrices().to_vec()).unwrap();
        assert!(custom.descriptor().is_err());
    }
}
