//! Finite groups, their real representations, and equivariant linear maps.

mod field;
mod group;
mod intertwiner;
mod rep;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub use field::{FieldType, FieldTypeDescriptor};
pub use group::{make_group, GroupElement, GroupKind, GroupSpec};
pub use intertwiner::{solve_intertwiner_basis, IntertwinerBasis};
pub use rep::{
    check_representation, orthogonal_2d, rep_direct_sum, rep_regular, rep_restrict, rep_restrict_canonical,
    rep_standard, rep_trivial, RepDescriptor, RepKind, Representation,
};

use crate::error::Result;
use crate::scalar::Real;

/// Applies the block-diagonal action `ρ(g)` of `field_type` to `vector`.
pub fn field_transform<T: Real>(field_type: &FieldType, g: usize, vector: &[T]) -> Result<Vec<T>> {
    field_type.transform(g, vector)
}

type BasisKey = (GroupSpec, RepKind, RepKind);

/// Memoized [`solve_intertwiner_basis`]. Custom representations bypass the cache.
pub fn intertwiner_basis(rep_in: &Representation, rep_out: &Representation) -> Result<Arc<IntertwinerBasis>> {
    static CACHE: OnceLock<Mutex<HashMap<BasisKey, Arc<IntertwinerBasis>>>> = OnceLock::new();
    if matches!(rep_in.kind(), RepKind::Custom) || matches!(rep_out.kind(), RepKind::Custom) {
        return solve_intertwiner_basis(rep_in, rep_out).map(Arc::new);
    }
    let key = (rep_in.group(), rep_in.kind().clone(), rep_out.kind().clone());
    let cache = CACHE.get_or_init(Default::default);
    if let Some(b) = cache.lock().expect("basis cache poisoned").get(&key) {
        return Ok(b.clone());
    }
    let basis = Arc::new(solve_intertwiner_basis(rep_in, rep_out)?);
    cache.lock().expect("basis cache poisoned").insert(key, basis.clone());
    Ok(basis)
}
