mod common;

use common::finite_diff::{mpvin_errors, vin_errors};
use mpvin::planner::Variant;
use mpvin::symmetry::GroupSpec;

const TOL: f64 = 1e-3;

#[test]
fn mpvin_gradients_match_finite_differences() {
    for (variant, group) in [(Variant::R2Group, Some(GroupSpec::dihedral(2))), (Variant::NoSym, None)] {
        for (name, err) in mpvin_errors(variant, group) {
            assert!(err <= TOL, "{variant} {name}: relative error {err:.3e}");
        }
    }
}

#[test]
fn vin_gradients_match_finite_differences() {
    for (name, err) in vin_errors() {
        assert!(err <= TOL, "vin {name}: relative error {err:.3e}");
    }
}
