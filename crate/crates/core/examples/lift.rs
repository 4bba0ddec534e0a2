//! Lifting features from four cameras (C4) to D8 feature fields.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mpvin::equivariant_nn::{LiftLayer, ParamStore};
use mpvin::symmetry::GroupSpec;

fn main() -> mpvin::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut store = ParamStore::<f64>::new();
    let lift = LiftLayer::new(&mut store, "lift", 4, 3, GroupSpec::dihedral(8), 2, &mut rng)?;
    println!("embedding of C4 in D8: {:?}, free parameters {}", lift.embedding(), lift.inner().rank());

    let images = Array2::from_shape_fn((4, 3), |(c, f)| ((c * 3 + f) as f64).sin());
    let out = lift.forward(&store, &images)?;
    println!("lifted features: {} values", out.len());

    let audit = lift.audit(&store, &images)?;
    println!("violation on C4: {:.1e}", audit.max_subgroup_violation());
    println!("violation elsewhere in D8: {:.2}", audit.max_other_violation());
    Ok(())
}
