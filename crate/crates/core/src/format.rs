//! JSON field documents.
//!
//! ```json
//! {
//!   "dim": 2,
//!   "points": [
//!     { "id": 0, "weight": 1.0,
//!       "metric": [[1.0, 0.0], [0.0, 1.0]],
//!       "J": [[0.0, -1.0], [1.0, 0.0]],
//!       "W": [[0.0, 1.0], [-1.0, 0.0]],
//!       "K": [[0.5, 0.0], [0.0, -0.5]] }
//!   ]
//! }
//! ```
//!
//! Matrices are lists of rows. `metric` defaults to the identity; `W` and `K`
//! are optional but must then be present at every point or at none. Numbers
//! are written in shortest round-trip form, so reading back a written
//! document reproduces every `f64` exactly.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::fiber::{FiberMatrix, FiberMetric};
use crate::structures::{AcsField, PointId, SampleSpace, SymplecticField, TangentField};

pub type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub id: PointId,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Rows>,
    #[serde(rename = "J")]
    pub j: Rows,
    #[serde(rename = "W", default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Rows>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Rows>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDocument {
    pub dim: usize,
    pub points: Vec<PointRecord>,
}

/// Parsed document contents before structural validation of `J`.
#[derive(Debug, Clone)]
pub struct RawFields {
    pub space: Arc<SampleSpace>,
    pub j: Vec<FiberMatrix>,
    pub w: Option<Vec<FiberMatrix>>,
    pub k: Option<Vec<FiberMatrix>>,
}

impl RawFields {
    /// Validated structure field; fails naming the offending point.
    pub fn acs(&self) -> Result<AcsField> {
        AcsField::new(self.space.clone(), self.j.clone())
    }

    pub fn symplectic(&self) -> Result<Option<SymplecticField>> {
        self.w
            .as_ref()
            .map(|w| SymplecticField::new(self.space.clone(), w.clone()))
            .transpose()
    }

    /// The `K` entries as a tangent field at `base`.
    pub fn tangent(&self, base: Arc<AcsField>) -> Result<Option<TangentField>> {
        self.k
            .as_ref()
            .map(|k| TangentField::new(base, k.clone()))
            .transpose()
    }
}

fn matrix(dim: usize, rows: &Rows, what: &str, id: PointId) -> Result<FiberMatrix> {
    let m = FiberMatrix::from_rows(rows)
        .map_err(|e| GeometryError::InvalidMatrix(format!("point {id}, {what}: {e}")))?;
    if m.dim() != dim {
        return Err(GeometryError::InvalidMatrix(format!(
            "point {id}, {what}: size {} does not match dim {dim}",
            m.dim()
        )));
    }
    Ok(m)
}

fn optional_column(
    dim: usize,
    points: &[PointRecord],
    what: &str,
    pick: impl Fn(&PointRecord) -> Option<&Rows>,
) -> Result<Option<Vec<FiberMatrix>>> {
    let present = points.iter().filter(|p| pick(p).is_some()).count();
    if present == 0 {
        return Ok(None);
    }
    if present != points.len() {
        return Err(GeometryError::InvalidSpace(format!(
            "`{what}` given at {present} of {} points",
            points.len()
        )));
    }
    points
        .iter()
        .map(|p| matrix(dim, pick(p).expect("checked above"), what, p.id))
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

impl FieldDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| GeometryError::Config(format!("field document: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("field documents always serialize")
    }

    /// Builds the sample space and raw per-point operators.
    pub fn into_raw(self) -> Result<RawFields> {
        let dim = self.dim;
        if dim < 2 || !dim.is_multiple_of(2) {
            return Err(GeometryError::InvalidSpace(format!(
                "dimension {dim} is not even and >= 2"
            )));
        }
        let mut ids = Vec::with_capacity(self.points.len());
        let mut weights = Vec::with_capacity(self.points.len());
        let mut metrics = Vec::with_capacity(self.points.len());
        let mut j = Vec::with_capacity(self.points.len());
        for p in &self.points {
            ids.push(p.id);
            weights.push(p.weight);
            metrics.push(match &p.metric {
                Some(rows) => FiberMetric::new(matrix(dim, rows, "metric", p.id)?)?,
                None => FiberMetric::identity(dim),
            });
            j.push(matrix(dim, &p.j, "J", p.id)?);
        }
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(GeometryError::InvalidSpace("duplicate point id".into()));
        }
        let w = optional_column(dim, &self.points, "W", |p| p.w.as_ref())?;
        let k = optional_column(dim, &self.points, "K", |p| p.k.as_ref())?;
        let space = Arc::new(SampleSpace::new(dim, ids, weights, metrics)?);
        Ok(RawFields { space, j, w, k })
    }

    /// Document describing `j` with optional symplectic form and tangent.
    pub fn from_fields(
        j: &AcsField,
        w: Option<&SymplecticField>,
        k: Option<&TangentField>,
    ) -> Self {
        let space = j.space();
        let points = (0..space.len())
            .map(|i| {
                let g = space.metric(i);
                PointRecord {
                    id: space.ids()[i],
                    weight: space.weights()[i],
                    metric: (!g.is_identity()).then(|| g.matrix().to_rows()),
                    j: j.op(i).to_rows(),
                    w: w.map(|w| w.form(i).to_rows()),
                    k: k.map(|k| k.op(i).to_rows()),
                }
            })
            .collect();
        Self {
            dim: space.dim(),
            points,
        }
    }
}

/// Formats `x` with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "dim": 2,
        "points": [
            {"id": 3, "weight": 0.5, "J": [[0, -1], [1, 0]], "K": [[0.5, 0], [0, -0.5]]},
            {"id": 9, "weight": 1.5, "metric": [[2, 0], [0, 1]], "J": [[0, -1], [1, 0]], "K": [[0, 0.25], [0.25, 0]]}
        ]
    }"#;

    #[test]
    fn parses_sample_document() {
        let raw = FieldDocument::from_json(SAMPLE)
            .unwrap()
            .into_raw()
            .unwrap();
        assert_eq!(raw.space.ids(), &[3, 9]);
        assert_eq!(raw.space.weights(), &[0.5, 1.5]);
        assert!(raw.space.metric(0).is_identity());
        assert!(!raw.space.metric(1).is_identity());
        assert!(raw.w.is_none());
        let base = Arc::new(raw.acs().unwrap());
        let k = raw.tangent(base).unwrap().unwrap();
        assert_eq!(k.op(1).get(0, 1), 0.25);
    }

    #[test]
    fn rejects_malformed_documents() {
        assert!(FieldDocument::from_json("{ not json").is_err());
        assert!(FieldDocument::from_json(r#"{"dim": 2}"#).is_err());
        let wrong_size =
            r#"{"dim": 4, "points": [{"id": 0, "weight": 1, "J": [[0, -1], [1, 0]]}]}"#;
        assert!(FieldDocument::from_json(wrong_size)
            .unwrap()
            .into_raw()
            .is_err());
        let partial_w = r#"{"dim": 2, "points": [
            {"id": 0, "weight": 1, "J": [[0, -1], [1, 0]], "W": [[0, 1], [-1, 0]]},
            {"id": 1, "weight": 1, "J": [[0, -1], [1, 0]]}]}"#;
        assert!(FieldDocument::from_json(partial_w)
            .unwrap()
            .into_raw()
            .is_err());
        let dup = r#"{"dim": 2, "points": [
            {"id": 0, "weight": 1, "J": [[0, -1], [1, 0]]},
            {"id": 0, "weight": 1, "J": [[0, -1], [1, 0]]}]}"#;
        assert!(FieldDocument::from_json(dup).unwrap().into_raw().is_err());
    }

    #[test]
    fn non_structure_j_names_the_point() {
        let doc = r#"{"dim": 2, "points": [
            {"id": 0, "weight": 1, "J": [[0, -1], [1, 0]]},
            {"id": 7, "weight": 1, "J": [[0, -1.001], [1, 0]]}]}"#;
        let raw = FieldDocument::from_json(doc).unwrap().into_raw().unwrap();
        assert!(matches!(
            raw.acs(),
            Err(GeometryError::NotAlmostComplex { point: 7, .. })
        ));
    }

    #[test]
    fn fmt17_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
    }
}
