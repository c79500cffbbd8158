//! Geodesic through the standard structure in a random anticommuting
//! direction, in the chart and ambiently, with the equation residual.
//!
//! cargo run --example geodesics

use std::sync::Arc;

use almost_complex::charts::acs_residual;
use almost_complex::geometry::{chart_of, geodesic_ambient, geodesic_chart};
use almost_complex::sampling::{random_space, random_tangent, stream, TangentKind};
use almost_complex::verify::{geodesic_equation_residual, uniform_grid};
use almost_complex::AcsField;

fn main() -> almost_complex::Result<()> {
    let mut rng = stream(42, "geodesics example");
    let space = Arc::new(random_space(&mut rng, 4, 8)?);
    let j0 = Arc::new(AcsField::standard(space));
    let a = random_tangent(&mut rng, &j0, TangentKind::Mixed, 0.9)?;

    println!(
        "{:>5} {:>10} {:>12} {:>12} {:>12}",
        "t", "|K(t)|", "|J^2+1|", "chart-amb", "ode resid"
    );
    for t in uniform_grid(2.0, 8) {
        let k = geodesic_chart(&a, t)?;
        let jt = geodesic_ambient(&j0, &a, t)?;
        let from_ambient = chart_of(&j0, &jt)?;
        let norm = k
            .ops()
            .iter()
            .map(|m| m.spectral_norm())
            .fold(0.0, f64::max);
        let acs = jt.ops().iter().map(acs_residual).fold(0.0, f64::max);
        println!(
            "{t:>5.2} {norm:>10.6} {acs:>12.3e} {:>12.3e} {:>12.3e}",
            from_ambient.k().dist_max(&k),
            geodesic_equation_residual(&a, t, 1e-4)?
        );
    }
    Ok(())
}
