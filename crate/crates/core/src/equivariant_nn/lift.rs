//! Lifting per-camera features from `C_K` (cameras arranged in a circle) to a
//! larger group `G` containing `C_K` as rotations by multiples of `2π/K`.

use ndarray::Array2;
use rand::Rng;

use super::linear::EquivariantLinear;
use super::params::ParamStore;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::symmetry::{rep_regular, rep_restrict, FieldType, GroupSpec, Representation};

#[derive(Clone, Debug)]
pub struct LiftLayer {
    cameras: usize,
    features: usize,
    target: GroupSpec,
    embedding: Vec<usize>,
    inner: EquivariantLinear,
}

/// Equivariance check of one lift layer on one input.
#[derive(Clone, Debug)]
pub struct LiftAudit {
    /// `(element of G, lies in the image of C_K, relative violation)`.
    pub entries: Vec<(usize, bool, f64)>,
}

impl LiftAudit {
    /// Largest violation over elements of `C_K`; those are the only ones the layer promises.
    pub fn max_subgroup_violation(&self) -> f64 {
        self.entries.iter().filter(|e| e.1).map(|e| e.2).fold(0.0, f64::max)
    }

    pub fn max_other_violation(&self) -> f64 {
        self.entries.iter().filter(|e| !e.1).map(|e| e.2).fold(0.0, f64::max)
    }
}

impl LiftLayer {
    /// `features` values per camera in, `copies` restricted regular fields of `target` out.
    pub fn new<T: Real, R: Rng>(
        store: &mut ParamStore<T>,
        name: &str,
        cameras: usize,
        features: usize,
        target: GroupSpec,
        copies: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if cameras == 0 || !target.rotation_order().is_multiple_of(cameras) {
            return Err(Error::InvalidEmbedding(format!("C{cameras} is not a rotation subgroup of {target}")));
        }
        let sub = GroupSpec::cyclic(cameras);
        let embedding = target.canonical_embedding(&sub)?;
        let rep_in = FieldType::regular(sub, features);
        let rep_out = FieldType::repeat(rep_restrict(&rep_regular(target), sub, &embedding)?, copies);
        let inner = EquivariantLinear::new(store, name, rep_in, rep_out, true, rng)?;
        Ok(Self { cameras, features, target, embedding, inner })
    }

    pub fn cameras(&self) -> usize {
        self.cameras
    }

    pub fn target(&self) -> GroupSpec {
        self.target
    }

    pub fn embedding(&self) -> &[usize] {
        &self.embedding
    }

    pub fn inner(&self) -> &EquivariantLinear {
        &self.inner
    }

    pub fn copies(&self) -> usize {
        self.inner.rep_out().total_dim() / self.target.order()
    }

    /// `images` is `cameras × features`; the output holds `copies` blocks of `|G|` values.
    pub fn forward<T: Real>(&self, store: &ParamStore<T>, images: &Array2<T>) -> Result<Vec<T>> {
        if images.dim() != (self.cameras, self.features) {
            return Err(Error::FieldType(format!(
                "lift input is {:?}, expected {}×{}",
                images.dim(),
                self.cameras,
                self.features
            )));
        }
        // feature-major, so each feature's K camera values form one regular block
        let flat = Array2::from_shape_fn((1, self.cameras * self.features), |(_, i)| {
            images[[i % self.cameras, i / self.cameras]]
        });
        Ok(self.inner.forward_rows(store, &flat).into_raw_vec_and_offset().0)
    }

    /// Compares `lift(g·images)` with `g·lift(images)` for every `g ∈ G`. Rotations
    /// are applied to the cameras by the nearest camera shift and reflections
    /// reverse the camera order, so only elements of `C_K` are expected to agree.
    pub fn audit(&self, store: &ParamStore<f64>, images: &Array2<f64>) -> Result<LiftAudit> {
        let base = self.forward(store, images)?;
        let reg = rep_regular(self.target);
        let n = self.target.rotation_order();
        let mut entries = Vec::with_capacity(self.target.order());
        for g in 0..self.target.order() {
            let el = self.target.element(g);
            let shift = ((el.rotation * self.cameras) as f64 / n as f64).round() as usize % self.cameras;
            let k = self.cameras;
            let moved = Array2::from_shape_fn(images.dim(), |(c, f)| {
                // camera c takes the reading of the camera that maps onto it
                let src = if el.reflect { (k + shift - c % k) % k } else { (c + k - shift) % k };
                images[[src, f]]
            });
            let lhs = self.forward(store, &moved)?;
            let rhs = act_blocks(reg.matrix(g), &base);
            let num: f64 = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let den: f64 = rhs.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-300);
            let in_sub = self.embedding.contains(&g);
            entries.push((g, in_sub, num / den));
        }
        Ok(LiftAudit { entries })
    }

    pub fn rep_out(&self) -> &FieldType {
        self.inner.rep_out()
    }

    /// The output representation of one block.
    pub fn block_rep(&self) -> &Representation {
        &self.inner.rep_out().parts()[0]
    }
}

fn act_blocks(m: &Array2<f64>, v: &[f64]) -> Vec<f64> {
    let d = m.nrows();
    v.chunks(d).flat_map(|blk| (0..d).map(move |i| (0..d).map(|j| m[[i, j]] * blk[j]).sum::<f64>())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn images(k: usize, d: usize) -> Array2<f64> {
        Array2::from_shape_fn((k, d), |(i, j)| ((i * d + j) as f64 * 0.37).sin())
    }

    #[test]
    fn c4_into_c8() {
        let mut store = ParamStore::new();
        let lift = LiftLayer::new(&mut store, "lift", 4, 3, GroupSpec::cyclic(8), 2, &mut ChaCha8Rng::seed_from_u64(1))
            .unwrap();
        let audit = lift.audit(&store, &images(4, 3)).unwrap();
        assert!(audit.max_subgroup_violation() <= 1e-6);
        assert_eq!(audit.entries.iter().filter(|e| e.1).count(), 4);
    }

    #[test]
    fn zero_in_zero_out() {
        let mut store = ParamStore::<f64>::new();
        let lift =
            LiftLayer::new(&mut store, "lift", 4, 2, GroupSpec::dihedral(8), 1, &mut ChaCha8Rng::seed_from_u64(2))
                .unwrap();
        let y = lift.forward(&store, &Array2::zeros((4, 2))).unwrap();
        assert_eq!(y.len(), 16);
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_non_dividing_camera_count() {
        let mut store = ParamStore::<f64>::new();
        let r = LiftLayer::new(&mut store, "lift", 3, 2, GroupSpec::cyclic(8), 1, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(matches!(r, Err(Error::InvalidEmbedding(_))));
    }
}
