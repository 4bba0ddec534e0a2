use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::group::GroupSpec;
use super::rep::{rep_regular, rep_standard, rep_trivial, RepDescriptor, RepKind, Representation};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// An ordered direct sum of representations describing how a feature vector transforms.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldType {
    group: GroupSpec,
    parts: Vec<Arc<Representation>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldTypeDescriptor {
    pub group: GroupSpec,
    pub parts: Vec<RepKind>,
}

impl FieldType {
    pub fn new(group: GroupSpec, parts: Vec<Representation>) -> Result<Self> {
        if let Some(p) = parts.iter().find(|p| p.group() != group) {
            return Err(Error::FieldType(format!("field type over {group} contains a part over {}", p.group())));
        }
        Ok(Self { group, parts: parts.into_iter().map(Arc::new).collect() })
    }

    pub fn empty(group: GroupSpec) -> Self {
        Self { group, parts: Vec::new() }
    }

    pub fn trivial(group: GroupSpec, copies: usize) -> Self {
        Self::repeat(rep_trivial(group), copies)
    }

    pub fn standard(group: GroupSpec) -> Self {
        Self::repeat(rep_standard(group), 1)
    }

    pub fn regular(group: GroupSpec, copies: usize) -> Self {
        Self::repeat(rep_regular(group), copies)
    }

    pub fn repeat(rep: Representation, copies: usize) -> Self {
        let group = rep.group();
        let rep = Arc::new(rep);
        Self { group, parts: vec![rep; copies] }
    }

    /// Direct sum `self ⊕ other`.
    pub fn concat(&self, other: &FieldType) -> Result<Self> {
        if self.group != other.group {
            return Err(Error::FieldType(format!("cannot sum field types over {} and {}", self.group, other.group)));
        }
        let mut parts = self.parts.clone();
        parts.extend(other.parts.iter().cloned());
        Ok(Self { group: self.group, parts })
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn parts(&self) -> &[Arc<Representation>] {
        &self.parts
    }

    pub fn total_dim(&self) -> usize {
        self.parts.iter().map(|p| p.dim()).sum()
    }

    /// Start offset of each part.
    pub fn offsets(&self) -> Vec<usize> {
        let mut off = 0;
        self.parts
            .iter()
            .map(|p| {
                let o = off;
                off += p.dim();
                o
            })
            .collect()
    }

    /// True when every part acts by permutation matrices.
    pub fn is_permutation(&self) -> bool {
        self.parts.iter().all(|p| p.is_permutation())
    }

    /// Block-diagonal `ρ(g)`.
    pub fn matrix(&self, g: usize) -> Array2<f64> {
        let n = self.total_dim();
        let mut m = Array2::zeros((n, n));
        for (p, off) in self.parts.iter().zip(self.offsets()) {
            m.slice_mut(ndarray::s![off..off + p.dim(), off..off + p.dim()]).assign(p.matrix(g));
        }
        m
    }

    /// Applies the block-diagonal action of element `g` to a feature vector.
    pub fn transform<T: Real>(&self, g: usize, v: &[T]) -> Result<Vec<T>> {
        let n = self.total_dim();
        if v.len() != n {
            return Err(Error::Shape { expected: n, got: v.len() });
        }
        let mut out = vec![T::zero(); n];
        for (p, off) in self.parts.iter().zip(self.offsets()) {
            let m = p.matrix(g);
            for i in 0..p.dim() {
                let mut acc = T::zero();
                for j in 0..p.dim() {
                    let mij = m[[i, j]];
                    if mij != 0.0 {
                        acc += T::of(mij) * v[off + j];
                    }
                }
                out[off + i] = acc;
            }
        }
        Ok(out)
    }

    /// Applies `ρ(g)` to every row of an `n × total_dim` array.
    pub fn transform_rows<T: Real>(&self, g: usize, rows: &Array2<T>) -> Result<Array2<T>> {
        if rows.ncols() != self.total_dim() {
            return Err(Error::Shape { expected: self.total_dim(), got: rows.ncols() });
        }
        let m = self.matrix(g).mapv(T::of);
        Ok(rows.dot(&m.t()))
    }

    pub fn descriptor(&self) -> Result<FieldTypeDescriptor> {
        let parts = self.parts.iter().map(|p| p.descriptor().map(|d| d.kind)).collect::<Result<Vec<_>>>()?;
        Ok(FieldTypeDescriptor { group: self.group, parts })
    }

    pub fn from_descriptor(desc: &FieldTypeDescriptor) -> Result<Self> {
        // identical parts share one reconstructed representation
        let mut built: Vec<(RepKind, Arc<Representation>)> = Vec::new();
        let mut parts = Vec::with_capacity(desc.parts.len());
        for kind in &desc.parts {
            if let Some((_, r)) = built.iter().find(|(k, _)| k == kind) {
                parts.push(r.clone());
                continue;
            }
            let rep =
                Arc::new(Representation::from_descriptor(&RepDescriptor { group: desc.group, kind: kind.clone() })?);
            built.push((kind.clone(), rep.clone()));
            parts.push(rep);
        }
        Ok(Self { group: desc.group, parts })
    }
}
