//! Metric, complex structure, fundamental form, connection, curvature and
//! geodesics on the space of almost complex structures.
//!
//! Ambient quantities take tangent fields at a structure `J`. Chart
//! quantities take coordinate tangents (anticommuting with the chart center
//! `J₀`) at a [`ChartField`] point `K`. Integrals over `M` are the weighted
//! sums of [`SampleSpace::integrate`](crate::structures::SampleSpace::integrate).
//!
//! [`christoffel`] returns `∇_A B` for coordinate-constant fields, which is
//! the bilinear term `Γ(A, B)` of the geodesic equation `K'' + Γ(K', K') = 0`.

use std::sync::Arc;

use crate::charts::{acs_to_cayley, cayley_to_acs, pushforward, CayleyCoordinate};
use crate::error::{GeometryError, Result};
use crate::fiber::{
    mat_exp, mat_inv_guarded, mat_tanh_half, trace_product, FiberMatrix, DEFAULT_COND_CAP,
};
use crate::structures::{AcsField, SampleSpace, TangentField};

/// Point `K` of the Cayley chart centered at the field `J₀ = K.base()`.
#[derive(Debug, Clone)]
pub struct ChartField {
    k: TangentField,
    coords: Vec<CayleyCoordinate>,
    /// `(1 - K²)⁻¹` per point.
    resolvents: Vec<FiberMatrix>,
}

impl ChartField {
    pub fn new(k: TangentField) -> Result<Self> {
        let mut coords = Vec::with_capacity(k.len());
        let mut resolvents = Vec::with_capacity(k.len());
        for (op, j0) in k.ops().iter().zip(k.base().ops()) {
            let c = CayleyCoordinate::new(j0.clone(), op.clone())?;
            let id = FiberMatrix::identity(op.dim());
            resolvents.push(mat_inv_guarded(&(&id - op * op), DEFAULT_COND_CAP)?);
            coords.push(c);
        }
        Ok(Self {
            k,
            coords,
            resolvents,
        })
    }

    /// The chart center itself (`K = 0`).
    pub fn origin(base: Arc<AcsField>) -> Self {
        Self::new(TangentField::zero(base)).expect("the chart center is always valid")
    }

    /// `K + s·dir`, failing if the new point leaves the chart.
    pub fn shifted(&self, dir: &TangentField, s: f64) -> Result<Self> {
        Self::new(self.k.add_scaled(dir, s)?)
    }

    pub fn k(&self) -> &TangentField {
        &self.k
    }

    pub fn base(&self) -> &Arc<AcsField> {
        self.k.base()
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        self.k.space()
    }

    pub fn coordinate(&self, i: usize) -> &CayleyCoordinate {
        &self.coords[i]
    }

    pub fn resolvent(&self, i: usize) -> &FiberMatrix {
        &self.resolvents[i]
    }

    /// The structure `J_K` as a field.
    pub fn acs(&self) -> AcsField {
        let ops = self.coords.iter().map(cayley_to_acs).collect();
        AcsField::new(self.space().clone(), ops).expect("Cayley images are almost complex")
    }

    /// Pushes a coordinate tangent forward to a tangent field at `jk`, which
    /// must be this chart's [`acs`](Self::acs).
    pub fn pushforward(&self, a: &TangentField, jk: &Arc<AcsField>) -> Result<TangentField> {
        self.check(a)?;
        let ops = self
            .coords
            .iter()
            .zip(a.ops())
            .map(|(c, op)| pushforward(c, op))
            .collect();
        TangentField::new(jk.clone(), ops)
    }

    fn check(&self, a: &TangentField) -> Result<()> {
        self.k.check_same_shape(a)
    }
}

fn check_pair(a: &TangentField, b: &TangentField) -> Result<()> {
    a.check_same_shape(b)
}

fn check_base(j: &AcsField, a: &TangentField) -> Result<()> {
    if j.len() != a.len() {
        return Err(GeometryError::DimensionMismatch {
            expected: j.len(),
            found: a.len(),
        });
    }
    Ok(())
}

/// `(A, B)_J = ∫ tr(AB) dμ`.
pub fn ambient_inner(j: &AcsField, a: &TangentField, b: &TangentField) -> Result<f64> {
    check_base(j, a)?;
    check_pair(a, b)?;
    Ok(j.space().integrate(|i| trace_product(a.op(i), b.op(i))))
}

/// `(A, B)_K = 4∫ tr((1-K²)⁻¹A(1-K²)⁻¹B) dμ`.
pub fn chart_inner(c: &ChartField, a: &TangentField, b: &TangentField) -> Result<f64> {
    c.check(a)?;
    check_pair(a, b)?;
    Ok(4.0
        * c.space().integrate(|i| {
            let r = c.resolvent(i);
            trace_product(&(r * a.op(i) * r), b.op(i))
        }))
}

/// `**J**(A) = A∘J`.
pub fn acs_on_tangent(a: &TangentField, j: &Arc<AcsField>) -> Result<TangentField> {
    check_base(j, a)?;
    let ops = a
        .ops()
        .iter()
        .zip(j.ops())
        .map(|(op, jo)| op * jo)
        .collect();
    Ok(TangentField::from_parts(j.clone(), ops))
}

/// `Ω_J(A, B) = ∫ tr(AJB) dμ`.
pub fn ambient_omega(j: &AcsField, a: &TangentField, b: &TangentField) -> Result<f64> {
    check_base(j, a)?;
    check_pair(a, b)?;
    Ok(j.space()
        .integrate(|i| trace_product(&(a.op(i) * j.op(i)), b.op(i))))
}

/// `Ω_K(A, B) = 4∫ tr((1-K²)⁻¹AJ₀(1-K²)⁻¹B) dμ`.
pub fn chart_omega(c: &ChartField, a: &TangentField, b: &TangentField) -> Result<f64> {
    c.check(a)?;
    check_pair(a, b)?;
    let base = c.base().clone();
    Ok(4.0
        * c.space().integrate(|i| {
            let r = c.resolvent(i);
            trace_product(&(r * a.op(i) * base.op(i) * r), b.op(i))
        }))
}

/// Levi-Civita connection on constant coordinate fields:
/// `∇_A B = AK(1-K²)⁻¹B + BK(1-K²)⁻¹A`.
pub fn christoffel(c: &ChartField, a: &TangentField, b: &TangentField) -> Result<TangentField> {
    c.check(a)?;
    check_pair(a, b)?;
    let ops = (0..a.len())
        .map(|i| {
            let kr = c.k().op(i) * c.resolvent(i);
            a.op(i) * &kr * b.op(i) + b.op(i) * &kr * a.op(i)
        })
        .collect();
    Ok(TangentField::from_parts(c.base().clone(), ops))
}

/// `R(A,B)C = -(1-K²)[[(1-K²)⁻¹A, (1-K²)⁻¹B], (1-K²)⁻¹C]`.
pub fn curvature(
    c: &ChartField,
    a: &TangentField,
    b: &TangentField,
    cc: &TangentField,
) -> Result<TangentField> {
    c.check(a)?;
    check_pair(a, b)?;
    check_pair(a, cc)?;
    let ops = (0..a.len())
        .map(|i| {
            let r = c.resolvent(i);
            let k = c.k().op(i);
            let one_minus_k2 = FiberMatrix::identity(k.dim()) - k * k;
            let (ra, rb, rc) = (r * a.op(i), r * b.op(i), r * cc.op(i));
            -(one_minus_k2 * ra.commutator(&rb).commutator(&rc))
        })
        .collect();
    Ok(TangentField::from_parts(c.base().clone(), ops))
}

/// `(R(A,B)B, A)_K`.
pub fn sectional_numerator(c: &ChartField, a: &TangentField, b: &TangentField) -> Result<f64> {
    let rabb = curvature(c, a, b, b)?;
    chart_inner(c, &rabb, a)
}

/// `(A,A)_K (B,B)_K - (A,B)_K²`; may vanish or be negative for the pseudo-metric.
pub fn sectional_denominator(c: &ChartField, a: &TangentField, b: &TangentField) -> Result<f64> {
    let aa = chart_inner(c, a, a)?;
    let bb = chart_inner(c, b, b)?;
    let ab = chart_inner(c, a, b)?;
    Ok(aa * bb - ab * ab)
}

/// Smallest `|denominator|` accepted by [`sectional_curvature`].
pub const PLANE_DEGENERACY_TOL: f64 = 1e-10;

/// Normalized sectional curvature of the plane spanned by `A, B`.
pub fn sectional_curvature(c: &ChartField, a: &TangentField, b: &TangentField) -> Result<f64> {
    let den = sectional_denominator(c, a, b)?;
    if den.abs() < PLANE_DEGENERACY_TOL {
        return Err(GeometryError::DegeneratePlane(den));
    }
    Ok(sectional_numerator(c, a, b)? / den)
}

/// Geodesic from the chart center in direction `A`: `K(t) = tanh(t/2·A)`.
///
/// Directions with imaginary spectrum (g₀-skew ones) leave the chart in
/// finite time, reported as [`GeometryError::SingularOperator`].
pub fn geodesic_chart(a: &TangentField, t: f64) -> Result<TangentField> {
    let ops = a
        .ops()
        .iter()
        .map(|op| mat_tanh_half(op, t))
        .collect::<Result<Vec<_>>>()?;
    TangentField::new(a.base().clone(), ops)
}

/// The same geodesic in the space of structures: `J_t = J₀e^{tA}`.
pub fn geodesic_ambient(j0: &AcsField, a: &TangentField, t: f64) -> Result<AcsField> {
    check_base(j0, a)?;
    let ops = j0
        .ops()
        .iter()
        .zip(a.ops())
        .map(|(j, op)| j * mat_exp(&op.scaled(t)))
        .collect();
    AcsField::new(j0.space().clone(), ops)
}

/// Cayley coordinates of a structure field in the chart centered at `j0`.
pub fn chart_of(j0: &Arc<AcsField>, j: &AcsField) -> Result<ChartField> {
    if j0.len() != j.len() {
        return Err(GeometryError::DimensionMismatch {
            expected: j0.len(),
            found: j.len(),
        });
    }
    let ops = j0
        .ops()
        .iter()
        .zip(j.ops())
        .map(|(b, op)| acs_to_cayley(b, op).map(CayleyCoordinate::into_k))
        .collect::<Result<Vec<_>>>()?;
    ChartField::new(TangentField::new(j0.clone(), ops)?)
}
