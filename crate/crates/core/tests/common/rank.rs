use nalgebra::DMatrix;

use mpvin::symmetry::{
    intertwiner_basis, rep_direct_sum, rep_regular, rep_restrict_canonical, rep_standard, rep_trivial, GroupSpec,
    Representation,
};

/// Dimension of `{W : W ρ_in(g) = ρ_out(g) W ∀g}` from the singular values of
/// the stacked constraint system on `vec(W)`, accumulated as a Gram matrix.
pub fn svd_nullity(rep_in: &Representation, rep_out: &Representation) -> usize {
    let (di, d_o) = (rep_in.dim(), rep_out.dim());
    let n = di * d_o;
    let mut gram = DMatrix::<f64>::zeros(n, n);
    for g in 0..rep_in.group().order() {
        let (a, b) = (rep_in.matrix(g), rep_out.matrix(g));
        // Row (r, c) of the constraint: Σ_k W[r,k] a[k,c] − Σ_k b[r,k] W[k,c], with W[r,c] at r·di + c.
        let mut m = DMatrix::<f64>::zeros(n, n);
        for r in 0..d_o {
            for c in 0..di {
                let row = r * di + c;
                for k in 0..di {
                    m[(row, r * di + k)] += a[[k, c]];
                }
                for k in 0..d_o {
                    m[(row, k * di + c)] -= b[[r, k]];
                }
            }
        }
        gram += m.transpose() * &m;
    }
    let sv = gram.singular_values();
    let top = sv.max().max(1.0);
    n - sv.iter().filter(|&&s| s > 1e-9 * top).count()
}

pub fn catalogue() -> Vec<(String, Representation)> {
    let mut reps = Vec::new();
    for g in [
        GroupSpec::cyclic(1),
        GroupSpec::cyclic(3),
        GroupSpec::cyclic(4),
        GroupSpec::cyclic(8),
        GroupSpec::dihedral(2),
        GroupSpec::dihedral(4),
        GroupSpec::dihedral(6),
        GroupSpec::dihedral(8),
    ] {
        reps.push((format!("{g}/trivial"), rep_trivial(g)));
        reps.push((format!("{g}/standard"), rep_standard(g)));
        reps.push((format!("{g}/regular"), rep_regular(g)));
    }
    let d8 = GroupSpec::dihedral(8);
    let c4 = GroupSpec::cyclic(4);
    reps.push(("D8>C4 regular".into(), rep_restrict_canonical(&rep_regular(d8), c4).unwrap()));
    reps.push(("C8>C4 regular".into(), rep_restrict_canonical(&rep_regular(GroupSpec::cyclic(8)), c4).unwrap()));
    let d4 = GroupSpec::dihedral(4);
    reps.push((
        "D4 reg+std+triv".into(),
        rep_direct_sum(&[rep_regular(d4), rep_standard(d4), rep_trivial(d4)]).unwrap(),
    ));
    reps.push(("D8 2×regular".into(), rep_direct_sum(&[rep_regular(d8), rep_regular(d8)]).unwrap()));
    reps
}

/// Compares solver rank with the SVD nullity on every same-group pair of the
/// catalogue; returns the number of pairs checked.
pub fn compare_ranks() -> Result<usize, String> {
    let reps = catalogue();
    let mut checked = 0;
    for (ni, ri) in &reps {
        for (no, ro) in &reps {
            if ri.group() != ro.group() || ri.dim() * ro.dim() > 32 * 16 {
                continue;
            }
            let basis = intertwiner_basis(ri, ro).map_err(|e| format!("{ni} -> {no}: {e}"))?;
            let oracle = svd_nullity(ri, ro);
            if basis.rank() != oracle {
                return Err(format!("{ni} -> {no}: rank {} vs oracle {oracle}", basis.rank()));
            }
            if basis.max_violation() > 1e-10 {
                return Err(format!("{ni} -> {no}: violation {:.2e}", basis.max_violation()));
            }
            checked += 1;
        }
    }
    Ok(checked)
}
