//! Writing a structure field with its symplectic form and a tangent to the
//! JSON field format and reading it back bit for bit.
//!
//! cargo run --example field_io [path]

use std::sync::Arc;

use almost_complex::format::FieldDocument;
use almost_complex::geometry::ChartField;
use almost_complex::sampling::{random_space, random_tangent, stream, TangentKind};
use almost_complex::{AcsField, SymplecticField};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = stream(1, "field io example");
    let space = Arc::new(random_space(&mut rng, 2, 3)?);
    let j0 = Arc::new(AcsField::standard(space.clone()));
    let k = random_tangent(&mut rng, &j0, TangentKind::Mixed, 0.6)?;
    let j = ChartField::new(k.clone())?.acs();

    let doc = FieldDocument::from_fields(&j, Some(&SymplecticField::standard(space)), Some(&k));
    let text = doc.to_json();
    match std::env::args().nth(1) {
        Some(path) => std::fs::write(&path, &text)?,
        None => println!("{text}"),
    }

    let raw = FieldDocument::from_json(&text)?.into_raw()?;
    let back = raw.acs()?;
    let exact = back
        .ops()
        .iter()
        .zip(j.ops())
        .all(|(x, y)| x.dist_max(y) == 0.0);
    println!("read back {} points, bitwise equal: {exact}", back.len());
    Ok(())
}
