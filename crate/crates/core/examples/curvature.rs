//! Connection and curvature in a Cayley chart: the hand-checkable 2x2 case,
//! sectional curvature, and the closed form against finite differences.
//!
//! cargo run --example curvature

use std::sync::Arc;

use almost_complex::geometry::{
    christoffel, curvature, sectional_curvature, sectional_denominator, sectional_numerator,
};
use almost_complex::sampling::{random_space, random_tangent, stream, TangentKind};
use almost_complex::verify::fd_directional_field;
use almost_complex::{AcsField, ChartField, FiberMatrix, SampleSpace, TangentField};

fn main() -> almost_complex::Result<()> {
    let space = Arc::new(SampleSpace::uniform(2, 1)?);
    let j0 = Arc::new(AcsField::standard(space));
    let origin = ChartField::origin(j0.clone());
    let a = TangentField::new(j0.clone(), vec![FiberMatrix::diagonal(&[1.0, -1.0])?])?;
    let b = TangentField::new(
        j0.clone(),
        vec![FiberMatrix::from_row_slice(2, &[0.0, 1.0, 1.0, 0.0])?],
    )?;
    println!(
        "R(A,B)B at K=0 = {:?}",
        curvature(&origin, &a, &b, &b)?.op(0).to_rows()
    );
    println!(
        "sectional: {} / {} = {}",
        sectional_numerator(&origin, &a, &b)?,
        sectional_denominator(&origin, &a, &b)?,
        sectional_curvature(&origin, &a, &b)?
    );

    let mut rng = stream(7, "curvature example");
    let space = Arc::new(random_space(&mut rng, 4, 4)?);
    let j0 = Arc::new(AcsField::standard(space));
    let c = ChartField::new(random_tangent(&mut rng, &j0, TangentKind::Mixed, 0.5)?)?;
    let [x, y, z] =
        [0, 1, 2].map(|_| random_tangent(&mut rng, &j0, TangentKind::Mixed, 1.0).unwrap());

    // ∇_X∇_Y Z = d_X(∇_Y Z) + Γ(X, ∇_Y Z) for constant fields
    let nn = |p: &TangentField, q: &TangentField| -> almost_complex::Result<TangentField> {
        let d = fd_directional_field(|ch| christoffel(ch, q, &z), &c, p, 1e-4)?;
        d.add_scaled(&christoffel(&c, p, &christoffel(&c, q, &z)?)?, 1.0)
    };
    let fd = nn(&x, &y)?.add_scaled(&nn(&y, &x)?, -1.0)?;
    let closed = curvature(&c, &x, &y, &z)?;
    println!(
        "|R_fd - R| = {:e} (|R| = {:.4})",
        fd.dist_max(&closed),
        closed.max_abs()
    );
    Ok(())
}
