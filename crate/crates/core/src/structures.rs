//! Discretized manifold and the fields that live on it.
//!
//! A [`SampleSpace`] is a finite set of independent fibers carrying positive
//! quadrature weights and a base metric `g₀`. Fields are per-point lists of
//! fiber operators. Points are never coupled except through the weights, so
//! closedness of a symplectic form on `M` cannot be expressed here and is not
//! checked.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::charts::{acs_residual, anticommutation_residual, anticommutation_tol, STRUCTURE_TOL};
use crate::error::{GeometryError, Result};
use crate::fiber::{g_adjoint, mat_inv_guarded, FiberMatrix, FiberMetric, DEFAULT_COND_CAP};

pub type PointId = u64;

/// Finite weighted sample of `(M, dμ(g₀))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpace {
    dim: usize,
    ids: Vec<PointId>,
    weights: Vec<f64>,
    metrics: Vec<FiberMetric>,
}

impl SampleSpace {
    pub fn new(
        dim: usize,
        ids: Vec<PointId>,
        weights: Vec<f64>,
        metrics: Vec<FiberMetric>,
    ) -> Result<Self> {
        if dim < 2 || !dim.is_multiple_of(2) {
            return Err(GeometryError::InvalidSpace(format!(
                "dimension {dim} is not even and >= 2"
            )));
        }
        if ids.is_empty() {
            return Err(GeometryError::InvalidSpace("no sample points".into()));
        }
        if weights.len() != ids.len() || metrics.len() != ids.len() {
            return Err(GeometryError::InvalidSpace(format!(
                "{} ids, {} weights, {} metrics",
                ids.len(),
                weights.len(),
                metrics.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(GeometryError::InvalidSpace(format!(
                "weight {w} is not positive"
            )));
        }
        if let Some(g) = metrics.iter().find(|g| g.dim() != dim) {
            return Err(GeometryError::DimensionMismatch {
                expected: dim,
                found: g.dim(),
            });
        }
        Ok(Self {
            dim,
            ids,
            weights,
            metrics,
        })
    }

    /// Points `0..points` with the given weights and identity base metric.
    pub fn with_weights(dim: usize, weights: Vec<f64>) -> Result<Self> {
        if dim < 2 || !dim.is_multiple_of(2) {
            return Err(GeometryError::InvalidSpace(format!(
                "dimension {dim} is not even and >= 2"
            )));
        }
        let ids = (0..weights.len() as PointId).collect();
        let metrics = vec![FiberMetric::identity(dim); weights.len()];
        Self::new(dim, ids, weights, metrics)
    }

    /// `points` points of unit weight and identity base metric.
    pub fn uniform(dim: usize, points: usize) -> Result<Self> {
        Self::with_weights(dim, vec![1.0; points])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[PointId] {
        &self.ids
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn metric(&self, i: usize) -> &FiberMetric {
        &self.metrics[i]
    }

    pub fn metrics(&self) -> &[FiberMetric] {
        &self.metrics
    }

    /// `Σ wᵢ f(i)`, summed in point order.
    pub fn integrate(&self, mut f: impl FnMut(usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w * f(i);
        }
        acc
    }

    /// Like [`integrate`](Self::integrate) for a fallible integrand.
    pub fn try_integrate(&self, mut f: impl FnMut(usize) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w * f(i)?;
        }
        Ok(acc)
    }

    fn check_ops(&self, ops: &[FiberMatrix]) -> Result<()> {
        if ops.len() != self.len() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.len(),
                found: ops.len(),
            });
        }
        if let Some(op) = ops.iter().find(|op| op.dim() != self.dim) {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                found: op.dim(),
            });
        }
        Ok(())
    }
}

/// Per-point outcome of a field validator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub name: String,
    pub passed: bool,
    pub tolerance: f64,
    pub max_residual: f64,
    /// Point carrying the largest residual.
    pub worst_point: PointId,
    pub residuals: Vec<f64>,
}

impl ValidationReport {
    fn from_residuals(name: &str, ids: &[PointId], residuals: Vec<f64>, tolerance: f64) -> Self {
        let (worst, max_residual) =
            residuals
                .iter()
                .enumerate()
                .fold((0, 0.0_f64), |(wi, wr), (i, &r)| {
                    if r > wr || r.is_nan() {
                        (i, r)
                    } else {
                        (wi, wr)
                    }
                });
        Self {
            name: name.to_string(),
            passed: max_residual <= tolerance,
            tolerance,
            max_residual,
            worst_point: ids[worst],
            residuals,
        }
    }
}

/// Checks `Jᵢ² = -Id` at every point.
pub fn validate_acs(space: &SampleSpace, ops: &[FiberMatrix]) -> Result<ValidationReport> {
    space.check_ops(ops)?;
    let residuals = ops.iter().map(acs_residual).collect();
    Ok(ValidationReport::from_residuals(
        "acs",
        space.ids(),
        residuals,
        STRUCTURE_TOL,
    ))
}

/// A point of the space of almost complex structures.
#[derive(Debug, Clone, PartialEq)]
pub struct AcsField {
    space: Arc<SampleSpace>,
    ops: Vec<FiberMatrix>,
}

impl AcsField {
    pub fn new(space: Arc<SampleSpace>, ops: Vec<FiberMatrix>) -> Result<Self> {
        let report = validate_acs(&space, &ops)?;
        if !report.passed {
            return Err(GeometryError::NotAlmostComplex {
                point: report.worst_point,
                residual: report.max_residual,
            });
        }
        Ok(Self { space, ops })
    }

    /// The standard block structure at every point.
    pub fn standard(space: Arc<SampleSpace>) -> Self {
        let ops = vec![FiberMatrix::standard_complex(space.dim()); space.len()];
        Self { space, ops }
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn ops(&self) -> &[FiberMatrix] {
        &self.ops
    }

    pub fn op(&self, i: usize) -> &FiberMatrix {
        &self.ops[i]
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Report of [`validate_acs`] for this field.
    pub fn validate(&self) -> ValidationReport {
        validate_acs(&self.space, &self.ops).expect("field shape checked at construction")
    }

    /// `‖Jᵢ² + Id‖_max` over all points.
    pub fn max_residual(&self) -> f64 {
        self.ops.iter().map(acs_residual).fold(0.0, f64::max)
    }
}

/// Tangent vector to the space of structures at `base`: per-point
/// endomorphisms anticommuting with the base operator.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentField {
    base: Arc<AcsField>,
    ops: Vec<FiberMatrix>,
}

impl TangentField {
    pub fn new(base: Arc<AcsField>, ops: Vec<FiberMatrix>) -> Result<Self> {
        base.space.check_ops(&ops)?;
        for (op, j) in ops.iter().zip(&base.ops) {
            let residual = anticommutation_residual(op, j);
            if residual > anticommutation_tol(op, j, STRUCTURE_TOL) {
                return Err(GeometryError::AnticommutationViolation { residual });
            }
        }
        Ok(Self { base, ops })
    }

    /// Projects arbitrary per-point matrices onto the tangent space.
    pub fn project(base: Arc<AcsField>, raw: &[FiberMatrix]) -> Result<Self> {
        base.space.check_ops(raw)?;
        let ops = raw
            .iter()
            .zip(&base.ops)
            .map(|(b, j)| crate::charts::anticommute_project(b, j))
            .collect();
        Ok(Self { base, ops })
    }

    pub fn zero(base: Arc<AcsField>) -> Self {
        let ops = vec![FiberMatrix::zeros(base.space.dim()); base.len()];
        Self { base, ops }
    }

    // For operators tangent by construction (closed-form outputs).
    pub(crate) fn from_parts(base: Arc<AcsField>, ops: Vec<FiberMatrix>) -> Self {
        debug_assert_eq!(base.len(), ops.len());
        Self { base, ops }
    }

    pub fn base(&self) -> &Arc<AcsField> {
        &self.base
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.base.space
    }

    pub fn ops(&self) -> &[FiberMatrix] {
        &self.ops
    }

    pub fn op(&self, i: usize) -> &FiberMatrix {
        &self.ops[i]
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_parts(
            self.base.clone(),
            self.ops.iter().map(|a| a.scaled(s)).collect(),
        )
    }

    /// `self + s·other`; both must share a base.
    pub fn add_scaled(&self, other: &Self, s: f64) -> Result<Self> {
        self.check_same_shape(other)?;
        let ops = self
            .ops
            .iter()
            .zip(&other.ops)
            .map(|(a, b)| a + b.scaled(s))
            .collect();
        Ok(Self::from_parts(self.base.clone(), ops))
    }

    pub(crate) fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        if self.space().dim() != other.space().dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.space().dim(),
                found: other.space().dim(),
            });
        }
        Ok(())
    }

    /// Largest absolute entry over all points.
    pub fn max_abs(&self) -> f64 {
        self.ops
            .iter()
            .map(FiberMatrix::max_abs)
            .fold(0.0, f64::max)
    }

    /// Largest absolute entrywise difference over all points.
    pub fn dist_max(&self, other: &Self) -> f64 {
        self.ops
            .iter()
            .zip(&other.ops)
            .map(|(a, b)| a.dist_max(b))
            .fold(0.0, f64::max)
    }
}

/// Per-point antisymmetric bilinear forms `(X, Y) ↦ XᵀWᵢY`.
///
/// Only the fiberwise algebra is modeled; `dω = 0` on `M` is outside scope.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticField {
    space: Arc<SampleSpace>,
    forms: Vec<FiberMatrix>,
}

impl SymplecticField {
    pub fn new(space: Arc<SampleSpace>, forms: Vec<FiberMatrix>) -> Result<Self> {
        space.check_ops(&forms)?;
        for w in &forms {
            let asym = (w + w.transpose()).max_abs();
            if asym > 1e-12 {
                return Err(GeometryError::InvalidMatrix(format!(
                    "symplectic form is not antisymmetric (residual {asym:e})"
                )));
            }
            mat_inv_guarded(w, DEFAULT_COND_CAP)?;
        }
        Ok(Self { space, forms })
    }

    /// `W = J₀ᵀ` for the standard block structure, so that `WJ₀ = Id`.
    pub fn standard(space: Arc<SampleSpace>) -> Self {
        let w = FiberMatrix::standard_complex(space.dim()).transpose();
        let forms = vec![w; space.len()];
        Self { space, forms }
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn forms(&self) -> &[FiberMatrix] {
        &self.forms
    }

    pub fn form(&self, i: usize) -> &FiberMatrix {
        &self.forms[i]
    }
}

/// Per-point Riemannian metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    space: Arc<SampleSpace>,
    metrics: Vec<FiberMetric>,
}

impl MetricField {
    pub fn new(space: Arc<SampleSpace>, metrics: Vec<FiberMetric>) -> Result<Self> {
        if metrics.len() != space.len() {
            return Err(GeometryError::DimensionMismatch {
                expected: space.len(),
                found: metrics.len(),
            });
        }
        if let Some(g) = metrics.iter().find(|g| g.dim() != space.dim()) {
            return Err(GeometryError::DimensionMismatch {
                expected: space.dim(),
                found: g.dim(),
            });
        }
        Ok(Self { space, metrics })
    }

    /// The base metric `g₀` of the sample space.
    pub fn base(space: Arc<SampleSpace>) -> Self {
        let metrics = space.metrics().to_vec();
        Self { space, metrics }
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn metrics(&self) -> &[FiberMetric] {
        &self.metrics
    }

    pub fn metric(&self, i: usize) -> &FiberMetric {
        &self.metrics[i]
    }
}

/// `K = P + L` with `P` g-self-adjoint and `L` g-skew.
///
/// Both parts anticommute with the base whenever the base is g-orthogonal.
pub fn sym_antisym_split(
    k: &TangentField,
    g: &MetricField,
) -> Result<(TangentField, TangentField)> {
    if g.metrics.len() != k.len() {
        return Err(GeometryError::DimensionMismatch {
            expected: k.len(),
            found: g.metrics.len(),
        });
    }
    let mut sym = Vec::with_capacity(k.len());
    let mut skew = Vec::with_capacity(k.len());
    for (op, metric) in k.ops.iter().zip(&g.metrics) {
        let sharp = g_adjoint(op, metric);
        let p = (op + &sharp).scaled(0.5);
        // L computed as K - P so that P + L reproduces K
        let l = op - &p;
        sym.push(p);
        skew.push(l);
    }
    Ok((
        TangentField::from_parts(k.base.clone(), sym),
        TangentField::from_parts(k.base.clone(), skew),
    ))
}

/// Symmetry class of a tangent field with respect to a metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TangentClass {
    Symmetric,
    Antisymmetric,
    Mixed,
}

impl TangentClass {
    pub fn as_str(self) -> &'static str {
        match self {
            TangentClass::Symmetric => "symmetric",
            TangentClass::Antisymmetric => "antisymmetric",
            TangentClass::Mixed => "mixed",
        }
    }
}

/// Tolerance on `‖A ∓ A^♯‖` used by [`tangent_class`].
pub const CLASS_TOL: f64 = 1e-10;

/// Classifies one operator; the zero operator counts as symmetric.
pub fn classify_op(a: &FiberMatrix, g: &FiberMetric) -> TangentClass {
    let sharp = g_adjoint(a, g);
    if (a - &sharp).max_abs() <= CLASS_TOL {
        TangentClass::Symmetric
    } else if (a + &sharp).max_abs() <= CLASS_TOL {
        TangentClass::Antisymmetric
    } else {
        TangentClass::Mixed
    }
}

pub fn tangent_class(a: &TangentField, g: &MetricField) -> TangentClass {
    let mut sym = 0.0_f64;
    let mut skew = 0.0_f64;
    for (op, metric) in a.ops.iter().zip(&g.metrics) {
        let sharp = g_adjoint(op, metric);
        sym = sym.max((op - &sharp).max_abs());
        skew = skew.max((op + &sharp).max_abs());
    }
    if sym <= CLASS_TOL {
        TangentClass::Symmetric
    } else if skew <= CLASS_TOL {
        TangentClass::Antisymmetric
    } else {
        TangentClass::Mixed
    }
}

/// Outcome of [`validate_associated`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssociatedReport {
    pub passed: bool,
    pub tolerance: f64,
    /// `max ‖JᵢᵀWᵢJᵢ - Wᵢ‖_max`.
    pub compatibility_residual: f64,
    /// Smallest eigenvalue of `sym(WᵢJᵢ)` over all points.
    pub min_eigenvalue: f64,
    /// First point violating either condition.
    pub failing_point: Option<PointId>,
    /// `ω(X, JX)` for each probe, per point.
    pub witnesses: Vec<Vec<f64>>,
}

/// Positivity bound on the smallest eigenvalue of `sym(WJ)`.
pub const POSITIVITY_TOL: f64 = 1e-12;

/// Checks that `J` is positive associated with `ω`: `JᵀWJ = W` and
/// `ω(X, JX) > 0`, the latter via positive-definiteness of `sym(WJ)`.
///
/// `probes[i]` are optional witness vectors at point `i`; their values
/// `XᵀWJX` are reported but do not decide the outcome.
pub fn validate_associated(
    j: &AcsField,
    w: &SymplecticField,
    probes: &[Vec<DVector<f64>>],
) -> Result<AssociatedReport> {
    validate_associated_with_tol(j, w, probes, STRUCTURE_TOL)
}

pub fn validate_associated_with_tol(
    j: &AcsField,
    w: &SymplecticField,
    probes: &[Vec<DVector<f64>>],
    tolerance: f64,
) -> Result<AssociatedReport> {
    if j.len() != w.forms.len() {
        return Err(GeometryError::DimensionMismatch {
            expected: j.len(),
            found: w.forms.len(),
        });
    }
    let mut compat_max = 0.0_f64;
    let mut min_eig = f64::INFINITY;
    let mut failing_point = None;
    let mut witnesses = Vec::with_capacity(j.len());
    for (i, (op, form)) in j.ops.iter().zip(&w.forms).enumerate() {
        let compat = (op.transpose() * form * op).dist_max(form);
        let wj = form * op;
        let sym = (&wj + wj.transpose()).scaled(0.5);
        let eig = min_symmetric_eigenvalue(sym.as_matrix());
        compat_max = compat_max.max(compat);
        min_eig = min_eig.min(eig);
        if failing_point.is_none() && (compat > tolerance || eig <= POSITIVITY_TOL) {
            failing_point = Some(j.space.ids()[i]);
        }
        let values = probes
            .get(i)
            .map(|ps| {
                ps.iter()
                    .map(|x| (x.transpose() * wj.as_matrix() * x)[(0, 0)])
                    .collect()
            })
            .unwrap_or_default();
        witnesses.push(values);
    }
    Ok(AssociatedReport {
        passed: failing_point.is_none(),
        tolerance,
        compatibility_residual: compat_max,
        min_eigenvalue: min_eig,
        failing_point,
        witnesses,
    })
}

pub(crate) fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, x| a.min(*x))
}

/// Associated metric `g(X, Y) = ω(X, JY)`, i.e. `Gᵢ = WᵢJᵢ`.
pub fn associated_metric(j: &AcsField, w: &SymplecticField) -> Result<MetricField> {
    let report = validate_associated(j, w, &[])?;
    if let Some(point) = report.failing_point {
        let reason = if report.compatibility_residual > report.tolerance {
            format!(
                "ω(JX, JY) ≠ ω(X, Y) (residual {:e})",
                report.compatibility_residual
            )
        } else {
            format!(
                "ω(X, JX) not positive (eigenvalue {:e})",
                report.min_eigenvalue
            )
        };
        return Err(GeometryError::NotAssociated { point, reason });
    }
    let metrics = j
        .ops
        .iter()
        .zip(&w.forms)
        .map(|(op, form)| {
            let g = form * op;
            // exact G is symmetric; drop the rounding asymmetry
            FiberMetric::new((&g + g.transpose()).scaled(0.5))
        })
        .collect::<Result<Vec<_>>>()?;
    MetricField::new(j.space.clone(), metrics)
}

/// Complex orientation of `J`: the sign of `det(v₁, Jv₁, v₂, Jv₂, …)` for a
/// basis grown greedily from the standard vectors, each new `v` taken
/// orthogonal to the `J`-invariant span built so far.
pub fn orientation_sign(j: &FiberMatrix) -> f64 {
    let n = j.dim();
    let jm = j.as_matrix();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut ortho: Vec<DVector<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = DVector::zeros(n);
        v[k] = 1.0;
        let residual = gram_schmidt_residual(&v, &ortho);
        if residual.norm() < 1e-8 {
            continue;
        }
        let jv = jm * &residual;
        for u in [residual.clone(), jv] {
            let r = gram_schmidt_residual(&u, &ortho);
            let norm = r.norm();
            ortho.push(r / norm);
            basis.push(u);
        }
    }
    let cols: Vec<_> = basis.iter().map(|v| v.column(0)).collect();
    let det = DMatrix::from_columns(&cols).determinant();
    det.signum()
}

fn gram_schmidt_residual(v: &DVector<f64>, ortho: &[DVector<f64>]) -> DVector<f64> {
    let mut r = v.clone();
    for u in ortho {
        let c = u.dot(&r);
        r -= u * c;
    }
    r
}

/// Outcome of [`validate_orthogonal`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrthogonalReport {
    pub passed: bool,
    pub tolerance: f64,
    /// `max ‖Jᵢ^♯Jᵢ - Id‖_max`.
    pub orthogonality_residual: f64,
    pub orientation_matches: bool,
    pub failing_point: Option<PointId>,
}

/// Checks `g(JX, JY) = g(X, Y)` (as `J^♯J = Id`) and that `J` induces the
/// same orientation as `jref` at every point.
pub fn validate_orthogonal(
    j: &AcsField,
    g: &MetricField,
    jref: &AcsField,
) -> Result<OrthogonalReport> {
    validate_orthogonal_with_tol(j, g, jref, STRUCTURE_TOL)
}

pub fn validate_orthogonal_with_tol(
    j: &AcsField,
    g: &MetricField,
    jref: &AcsField,
    tolerance: f64,
) -> Result<OrthogonalReport> {
    if j.len() != g.metrics.len() || j.len() != jref.len() {
        return Err(GeometryError::DimensionMismatch {
            expected: j.len(),
            found: g.metrics.len().min(jref.len()),
        });
    }
    let mut residual = 0.0_f64;
    let mut orientation_matches = true;
    let mut failing_point = None;
    for i in 0..j.len() {
        let op = j.op(i);
        let id = FiberMatrix::identity(op.dim());
        let r = (g_adjoint(op, g.metric(i)) * op).dist_max(&id);
        let same = orientation_sign(op) == orientation_sign(jref.op(i));
        residual = residual.max(r);
        orientation_matches &= same;
        if failing_point.is_none() && (r > tolerance || !same) {
            failing_point = Some(j.space.ids()[i]);
        }
    }
    Ok(OrthogonalReport {
        passed: failing_point.is_none(),
        tolerance,
        orthogonality_residual: residual,
        orientation_matches,
        failing_point,
    })
}
