//! Structures preserving the base metric: orthogonality, orientation, the
//! symmetric/skew split of a tangent, and a geodesic that stays orthogonal.
//!
//! cargo run --example orthogonal_structures

use std::sync::Arc;

use almost_complex::geometry::geodesic_ambient;
use almost_complex::sampling::{random_space, random_tangent, stream, TangentKind};
use almost_complex::structures::{
    orientation_sign, sym_antisym_split, tangent_class, validate_orthogonal,
};
use almost_complex::{AcsField, MetricField};

fn main() -> almost_complex::Result<()> {
    let mut rng = stream(5, "orthogonal example");
    let space = Arc::new(random_space(&mut rng, 4, 8)?);
    let j0 = Arc::new(AcsField::standard(space.clone()));
    let g0 = MetricField::base(space);
    println!("orientation of J0 = {}", orientation_sign(j0.op(0)));

    let mixed = random_tangent(&mut rng, &j0, TangentKind::Mixed, 1.0)?;
    let (p, l) = sym_antisym_split(&mixed, &g0)?;
    println!(
        "split: class {} |P| {:.4} |L| {:.4}; parts are {} and {}",
        tangent_class(&mixed, &g0).as_str(),
        p.max_abs(),
        l.max_abs(),
        tangent_class(&p, &g0).as_str(),
        tangent_class(&l, &g0).as_str()
    );

    for t in [0.0, 1.0, 2.0] {
        let jl = geodesic_ambient(&j0, &l, t)?;
        let jp = geodesic_ambient(&j0, &p, t)?;
        let rl = validate_orthogonal(&jl, &g0, &j0)?;
        let rp = validate_orthogonal(&jp, &g0, &j0)?;
        println!(
            "t={t}: skew direction residual {:.2e} (orientation kept: {}), symmetric direction residual {:.2e}",
            rl.orthogonality_residual, rl.orientation_matches, rp.orthogonality_residual
        );
    }
    Ok(())
}
