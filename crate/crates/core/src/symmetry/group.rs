//! Finite rotation/reflection groups `C_n` and `D_n`.
//!
//! Elements are stored as `(rotation_index, reflect)` pairs and composed with
//! integer arithmetic, so group products never touch floating point. The
//! element `(k, f)` stands for `r^k s^f`, where `r` is the rotation by `2π/n`
//! and `s` the reflection across the first axis.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Cyclic,
    Dihedral,
}

/// A finite subgroup of `O(2)`: the cyclic group `C_n` or the dihedral group `D_n`.
/// Serialized as its name, e.g. `"D8"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GroupSpec {
    kind: GroupKind,
    n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    pub rotation: usize,
    pub reflect: bool,
}

pub fn make_group(kind: GroupKind, n: i64) -> Result<GroupSpec> {
    if n < 1 {
        return Err(Error::InvalidOrder(n));
    }
    Ok(GroupSpec { kind, n: n as usize })
}

impl GroupSpec {
    pub fn cyclic(n: usize) -> Self {
        assert!(n >= 1, "group order must be positive");
        Self { kind: GroupKind::Cyclic, n }
    }

    pub fn dihedral(n: usize) -> Self {
        assert!(n >= 1, "group order must be positive");
        Self { kind: GroupKind::Dihedral, n }
    }

    /// The trivial group, used by the non-equivariant planner variants.
    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    /// Number of rotations `n`.
    pub fn rotation_order(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        match self.kind {
            GroupKind::Cyclic => self.n,
            GroupKind::Dihedral => 2 * self.n,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == 1
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn element(&self, index: usize) -> GroupElement {
        debug_assert!(index < self.order());
        GroupElement { rotation: index % self.n, reflect: index >= self.n }
    }

    pub fn index_of(&self, e: GroupElement) -> usize {
        debug_assert!(e.rotation < self.n);
        debug_assert!(!e.reflect || self.kind == GroupKind::Dihedral);
        e.rotation + if e.reflect { self.n } else { 0 }
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order()).map(move |i| self.element(i))
    }

    /// Product `a·b` of two element indices.
    pub fn compose(&self, a: usize, b: usize) -> usize {
        let (ea, eb) = (self.element(a), self.element(b));
        // r^k1 s^f1 r^k2 s^f2 = r^(k1 ± k2) s^(f1 xor f2)
        let n = self.n;
        let k2 = if ea.reflect { (n - eb.rotation) % n } else { eb.rotation };
        self.index_of(GroupElement { rotation: (ea.rotation + k2) % n, reflect: ea.reflect ^ eb.reflect })
    }

    pub fn inverse(&self, a: usize) -> usize {
        let e = self.element(a);
        if e.reflect {
            a
        } else {
            self.index_of(GroupElement { rotation: (self.n - e.rotation) % self.n, reflect: false })
        }
    }

    /// Full multiplication table, `table[a * order + b] = a·b`.
    pub fn multiplication_table(&self) -> Vec<usize> {
        let o = self.order();
        let mut t = Vec::with_capacity(o * o);
        for a in 0..o {
            for b in 0..o {
                t.push(self.compose(a, b));
            }
        }
        t
    }

    /// Rotation angle and reflection flag of an element, as an `O(2)` transform.
    pub fn angle(&self, index: usize) -> (f64, bool) {
        let e = self.element(index);
        (2.0 * std::f64::consts::PI * e.rotation as f64 / self.n as f64, e.reflect)
    }

    /// The rotation generator `r` (rotation by `2π/n`).
    pub fn generator(&self) -> usize {
        if self.n == 1 {
            0
        } else {
            1
        }
    }

    /// Index of the pure reflection `s` (dihedral only).
    pub fn reflection(&self) -> Option<usize> {
        (self.kind == GroupKind::Dihedral).then_some(self.n)
    }

    /// Canonical embedding of `sub` into `self`: `C_K ↪ C_n/D_n` and `D_K ↪ D_n`
    /// send the rotation `k` to `k·n/K`. Requires `K | n`.
    pub fn canonical_embedding(&self, sub: &GroupSpec) -> Result<Vec<usize>> {
        if sub.kind == GroupKind::Dihedral && self.kind == GroupKind::Cyclic && sub.order() > 1 {
            return Err(Error::InvalidEmbedding(format!("{sub} does not embed in {self}")));
        }
        if !self.n.is_multiple_of(sub.n) {
            return Err(Error::InvalidEmbedding(format!(
                "{sub} does not embed in {self}: {} does not divide {}",
                sub.n, self.n
            )));
        }
        let step = self.n / sub.n;
        Ok(sub
            .elements()
            .map(|e| self.index_of(GroupElement { rotation: e.rotation * step, reflect: e.reflect }))
            .collect())
    }

    /// Checks that `embedding` is an injective homomorphism `sub → self`.
    pub fn check_embedding(&self, sub: &GroupSpec, embedding: &[usize]) -> Result<()> {
        if embedding.len() != sub.order() {
            return Err(Error::InvalidEmbedding(format!(
                "embedding has {} entries, subgroup has {} elements",
                embedding.len(),
                sub.order()
            )));
        }
        if let Some(&bad) = embedding.iter().find(|&&g| g >= self.order()) {
            return Err(Error::InvalidEmbedding(format!("element index {bad} out of range for {self}")));
        }
        let mut seen = vec![false; self.order()];
        for &g in embedding {
            if std::mem::replace(&mut seen[g], true) {
                return Err(Error::InvalidEmbedding("embedding is not injective".into()));
            }
        }
        for a in 0..sub.order() {
            for b in 0..sub.order() {
                if embedding[sub.compose(a, b)] != self.compose(embedding[a], embedding[b]) {
                    return Err(Error::InvalidEmbedding(format!(
                        "embedding does not preserve the product of elements {a} and {b}"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GroupKind::Cyclic => write!(f, "C{}", self.n),
            GroupKind::Dihedral => write!(f, "D{}", self.n),
        }
    }
}

impl TryFrom<String> for GroupSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GroupSpec> for String {
    fn from(g: GroupSpec) -> String {
        g.to_string()
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = match s.chars().next() {
            Some('C' | 'c') => (GroupKind::Cyclic, &s[1..]),
            Some('D' | 'd') => (GroupKind::Dihedral, &s[1..]),
            _ => return Err(Error::Config(format!("unknown group '{s}' (expected e.g. C8 or D8)"))),
        };
        let n: i64 = rest
            .trim_start_matches('_')
            .parse()
            .map_err(|_| Error::Config(format!("unknown group '{s}' (expected e.g. C8 or D8)")))?;
        make_group(kind, n)
    }
}
