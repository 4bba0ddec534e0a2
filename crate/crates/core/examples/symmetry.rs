//! Groups, representations and intertwiner bases.

use mpvin::symmetry::{
    check_representation, intertwiner_basis, rep_regular, rep_restrict_canonical, rep_standard, FieldType, GroupSpec,
};

fn main() -> mpvin::Result<()> {
    let d8 = GroupSpec::dihedral(8);
    println!("{d8}: order {}, generator {}, reflection {:?}", d8.order(), d8.generator(), d8.reflection());

    for rep in [rep_standard(d8), rep_regular(d8)] {
        println!("{:?} dim {}: homomorphism residual {:.1e}", rep.kind(), rep.dim(), check_representation(&rep));
    }

    // Equivariant maps between field types are spanned by a small basis.
    for (a, b) in
        [(rep_standard(d8), rep_standard(d8)), (rep_regular(d8), rep_standard(d8)), (rep_regular(d8), rep_regular(d8))]
    {
        let basis = intertwiner_basis(&a, &b)?;
        println!("{:?} -> {:?}: rank {} (dense would be {})", a.kind(), b.kind(), basis.rank(), a.dim() * b.dim());
    }

    let c4 = GroupSpec::cyclic(4);
    let restricted = rep_restrict_canonical(&rep_regular(d8), c4)?;
    println!(
        "regular D8 restricted to C4: dim {}, residual {:.1e}",
        restricted.dim(),
        check_representation(&restricted)
    );

    let field = FieldType::standard(d8).concat(&FieldType::regular(d8, 1))?;
    let v: Vec<f64> = (0..field.total_dim()).map(|i| i as f64).collect();
    let quarter = d8.index_of(mpvin::symmetry::GroupElement { rotation: 2, reflect: false });
    println!("quarter turn of {v:?}\n  = {:?}", field.transform(quarter, &v)?);
    Ok(())
}
