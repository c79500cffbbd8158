//! Cayley chart around the standard structure: map a coordinate to a
//! structure, invert it, push a tangent forward and change chart center.
//!
//! cargo run --example cayley_chart

use almost_complex::charts::{
    acs_residual, acs_to_cayley, cayley_to_acs, chart_transition, pullback, pushforward,
    CayleyCoordinate,
};
use almost_complex::FiberMatrix;

fn main() -> almost_complex::Result<()> {
    let j0 = FiberMatrix::standard_complex(2);
    let k = FiberMatrix::diagonal(&[0.5, -0.5])?;
    let c = CayleyCoordinate::new(j0.clone(), k.clone())?;

    let j = cayley_to_acs(&c);
    println!("J_K = {:?}", j.to_rows());
    println!("|J^2 + 1|_max = {:e}", acs_residual(&j));
    println!(
        "round trip error = {:e}",
        acs_to_cayley(&j0, &j)?.k().dist_max(&k)
    );

    let a = FiberMatrix::from_row_slice(2, &[0.0, 1.0, 1.0, 0.0])?;
    let a_star = pushforward(&c, &a);
    println!("pushforward of {:?} = {:?}", a.to_rows(), a_star.to_rows());
    println!("pullback error = {:e}", pullback(&c, &a_star).dist_max(&a));

    // same structure seen from the chart centered at J_{0.2}
    let j1 = cayley_to_acs(&CayleyCoordinate::new(
        j0.clone(),
        FiberMatrix::diagonal(&[0.2, -0.2])?,
    )?);
    let p = chart_transition(&k, &j0, &j1)?;
    println!(
        "coordinate in the new chart = {:?} (expected 1/3)",
        p.to_rows()
    );
    Ok(())
}
