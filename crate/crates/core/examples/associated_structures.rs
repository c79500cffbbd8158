//! Structures compatible with the standard symplectic form: validation,
//! the associated metric, and a geodesic that stays associated.
//!
//! cargo run --example associated_structures

use std::sync::Arc;

use almost_complex::geometry::geodesic_ambient;
use almost_complex::sampling::{random_space, random_tangent, stream, TangentKind};
use almost_complex::structures::{associated_metric, validate_associated};
use almost_complex::{AcsField, FiberMatrix, SampleSpace, SymplecticField, TangentField};

fn main() -> almost_complex::Result<()> {
    let space = Arc::new(SampleSpace::uniform(2, 1)?);
    let w = SymplecticField::standard(space.clone());
    let j0 = Arc::new(AcsField::standard(space.clone()));
    let a = TangentField::new(j0.clone(), vec![FiberMatrix::diagonal(&[0.7, -0.7])?])?;
    let jt = geodesic_ambient(&j0, &a, 1.0)?;
    let g = associated_metric(&jt, &w)?;
    println!("omega(., J_1 .) = {:?}", g.metric(0).matrix().to_rows());

    // -J0 is compatible with omega but not positive
    let flipped = AcsField::new(space, vec![-FiberMatrix::standard_complex(2)])?;
    let report = validate_associated(&flipped, &w, &[])?;
    println!(
        "-J0: passed={} min eigenvalue={}",
        report.passed, report.min_eigenvalue
    );

    let mut rng = stream(3, "associated example");
    let space = Arc::new(random_space(&mut rng, 6, 8)?);
    let j0 = Arc::new(AcsField::standard(space.clone()));
    let w = SymplecticField::standard(space);
    let sym = random_tangent(&mut rng, &j0, TangentKind::Symmetric, 0.9)?;
    for t in [0.0, 0.5, 1.0, 2.0] {
        let r = validate_associated(&geodesic_ambient(&j0, &sym, t)?, &w, &[])?;
        println!(
            "t={t}: compat {:.2e}  min eig {:.4}  passed {}",
            r.compatibility_residual, r.min_eigenvalue, r.passed
        );
    }
    Ok(())
}
