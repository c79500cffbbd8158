//! Exponential and Cayley parameterizations of almost complex structures near
//! a base structure `J₀`, applied on one fiber.
//!
//! The Cayley chart sends an endomorphism `K` anticommuting with `J₀` to
//! `J = J₀(1 + K)(1 - K)⁻¹`; its inverse is `K = (1 - JJ₀)⁻¹(1 + JJ₀)`.
//! Points where `1 - K` (or `1 - JJ₀`) is not safely invertible lie outside
//! the chart and are reported as [`GeometryError::SingularOperator`].

use crate::error::{GeometryError, Result};
use crate::fiber::{mat_exp, mat_inv_guarded, FiberMatrix, DEFAULT_COND_CAP};

/// Tolerance for `J² = -Id` and `KJ₀ + J₀K = 0` on unit-scale operators.
pub const STRUCTURE_TOL: f64 = 1e-10;

/// Looser anticommutation bound accepted by [`exp_chart`].
const EXP_CHART_TOL: f64 = 1e-8;

/// `‖J² + Id‖_max`.
pub fn acs_residual(j: &FiberMatrix) -> f64 {
    (j * j + FiberMatrix::identity(j.dim())).max_abs()
}

/// `‖KJ + JK‖_max`.
pub fn anticommutation_residual(k: &FiberMatrix, j: &FiberMatrix) -> f64 {
    k.anticommutator(j).max_abs()
}

// Anticommutation bound scaled by operator size, so large tangent vectors at
// far-from-center structures are judged relative to their magnitude.
pub(crate) fn anticommutation_tol(k: &FiberMatrix, j: &FiberMatrix, tol: f64) -> f64 {
    tol * (k.max_abs() * j.max_abs()).max(1.0)
}

fn check_dims(a: &FiberMatrix, b: &FiberMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

fn check_acs(j: &FiberMatrix) -> Result<()> {
    let residual = acs_residual(j);
    if residual > STRUCTURE_TOL * j.max_abs().powi(2).max(1.0) {
        return Err(GeometryError::NotAlmostComplex { point: 0, residual });
    }
    Ok(())
}

/// A point of the Cayley chart centered at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct CayleyCoordinate {
    base: FiberMatrix,
    k: FiberMatrix,
    one_minus_k_inv: FiberMatrix,
}

impl CayleyCoordinate {
    pub fn new(base: FiberMatrix, k: FiberMatrix) -> Result<Self> {
        Self::with_cap(base, k, DEFAULT_COND_CAP)
    }

    pub fn with_cap(base: FiberMatrix, k: FiberMatrix, cond_cap: f64) -> Result<Self> {
        check_dims(&base, &k)?;
        check_acs(&base)?;
        let residual = anticommutation_residual(&k, &base);
        if residual > anticommutation_tol(&k, &base, STRUCTURE_TOL) {
            return Err(GeometryError::AnticommutationViolation { residual });
        }
        let id = FiberMatrix::identity(k.dim());
        let one_minus_k_inv = mat_inv_guarded(&(&id - &k), cond_cap)?;
        Ok(Self {
            base,
            k,
            one_minus_k_inv,
        })
    }

    /// The chart center itself.
    pub fn origin(base: FiberMatrix) -> Result<Self> {
        let k = FiberMatrix::zeros(base.dim());
        Self::new(base, k)
    }

    pub fn base(&self) -> &FiberMatrix {
        &self.base
    }

    pub fn k(&self) -> &FiberMatrix {
        &self.k
    }

    pub fn into_k(self) -> FiberMatrix {
        self.k
    }

    /// `(1 - K)⁻¹`.
    pub fn one_minus_k_inv(&self) -> &FiberMatrix {
        &self.one_minus_k_inv
    }
}

/// `(B + J₀BJ₀)/2`, the projection onto endomorphisms anticommuting with `J₀`.
pub fn anticommute_project(b: &FiberMatrix, j0: &FiberMatrix) -> FiberMatrix {
    (b + j0 * b * j0).scaled(0.5)
}

/// `J = J₀ e^K`.
pub fn exp_chart(j0: &FiberMatrix, k: &FiberMatrix) -> Result<FiberMatrix> {
    check_dims(j0, k)?;
    let residual = anticommutation_residual(k, j0);
    if residual > anticommutation_tol(k, j0, EXP_CHART_TOL) {
        return Err(GeometryError::AnticommutationViolation { residual });
    }
    Ok(j0 * mat_exp(k))
}

/// `J_K = J₀(1 + K)(1 - K)⁻¹`.
pub fn cayley_to_acs(c: &CayleyCoordinate) -> FiberMatrix {
    let id = FiberMatrix::identity(c.k.dim());
    &c.base * (&id + &c.k) * &c.one_minus_k_inv
}

/// `K = (1 - JJ₀)⁻¹(1 + JJ₀)`.
pub fn acs_to_cayley(j0: &FiberMatrix, j: &FiberMatrix) -> Result<CayleyCoordinate> {
    acs_to_cayley_with_cap(j0, j, DEFAULT_COND_CAP)
}

pub fn acs_to_cayley_with_cap(
    j0: &FiberMatrix,
    j: &FiberMatrix,
    cond_cap: f64,
) -> Result<CayleyCoordinate> {
    check_dims(j0, j)?;
    check_acs(j)?;
    let id = FiberMatrix::identity(j.dim());
    let jj0 = j * j0;
    let k = mat_inv_guarded(&(&id - &jj0), cond_cap)? * (&id + &jj0);
    CayleyCoordinate::with_cap(j0.clone(), k, cond_cap)
}

/// Re-expresses the Cayley coordinate `K` (centered at `J₀`) in the chart
/// centered at `J₁`:
/// `P = (1 - M)⁻¹(1 + M)` with `M = (1 - K)(1 + K)⁻¹J₀J₁`.
pub fn chart_transition(
    k: &FiberMatrix,
    j0: &FiberMatrix,
    j1: &FiberMatrix,
) -> Result<FiberMatrix> {
    check_dims(k, j0)?;
    check_dims(j0, j1)?;
    let id = FiberMatrix::identity(k.dim());
    let one_plus_k_inv = mat_inv_guarded(&(&id + k), DEFAULT_COND_CAP)?;
    let m = (&id - k) * one_plus_k_inv * j0 * j1;
    Ok(mat_inv_guarded(&(&id - &m), DEFAULT_COND_CAP)? * (&id + &m))
}

/// Image of a coordinate tangent `A` under the differential of the chart:
/// `A* = 2J₀(1 - K)⁻¹A(1 - K)⁻¹`, tangent at `J_K`.
pub fn pushforward(c: &CayleyCoordinate, a: &FiberMatrix) -> FiberMatrix {
    (&c.base * &c.one_minus_k_inv * a * &c.one_minus_k_inv).scaled(2.0)
}

/// Inverse of [`pushforward`]: `A = -½(1 - K)J₀A*(1 - K)`.
pub fn pullback(c: &CayleyCoordinate, a_star: &FiberMatrix) -> FiberMatrix {
    let one_minus_k = FiberMatrix::identity(c.k.dim()) - &c.k;
    (&one_minus_k * &c.base * a_star * &one_minus_k).scaled(-0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::{mat_tanh_half, trace_product};

    fn m2(rows: [[f64; 2]; 2]) -> FiberMatrix {
        FiberMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn j0() -> FiberMatrix {
        FiberMatrix::standard_complex(2)
    }

    fn diag(a: f64, b: f64) -> FiberMatrix {
        FiberMatrix::diagonal(&[a, b]).unwrap()
    }

    // 2x2 Cayley map with K = diag(k, -k): J = [[0, -(1-k)/(1+k)], [(1+k)/(1-k), 0]]
    fn diagonal_cayley_oracle(k: f64) -> FiberMatrix {
        m2([[0.0, -(1.0 - k) / (1.0 + k)], [(1.0 + k) / (1.0 - k), 0.0]])
    }

    #[test]
    fn projection_examples() {
        let j = j0();
        assert_eq!(anticommute_project(&j, &j).max_abs(), 0.0);
        assert_eq!(
            anticommute_project(&FiberMatrix::identity(2), &j).max_abs(),
            0.0
        );
        let d = diag(1.0, -1.0);
        assert_eq!(anticommute_project(&d, &j), d);
    }

    #[test]
    fn projection_output_anticommutes() {
        let j = FiberMatrix::standard_complex(4);
        let b = FiberMatrix::from_row_slice(
            4,
            &(0..16).map(|i| (i as f64 * 0.37).sin()).collect::<Vec<_>>(),
        )
        .unwrap();
        let p = anticommute_project(&b, &j);
        assert!(anticommutation_residual(&p, &j) < 1e-12);
        assert!(anticommute_project(&p, &j).dist_max(&p) < 1e-15);
    }

    #[test]
    fn exp_chart_examples() {
        assert_eq!(exp_chart(&j0(), &FiberMatrix::zeros(2)).unwrap(), j0());

        let a = 0.7;
        let got = exp_chart(&j0(), &diag(a, -a)).unwrap();
        let expected = m2([[0.0, -(-a).exp()], [a.exp(), 0.0]]);
        assert!(got.dist_max(&expected) < 1e-14);

        // K² = Id splits the series into cosh and sinh
        let k = m2([[0.0, 1.0], [1.0, 0.0]]);
        let got = exp_chart(&j0(), &k).unwrap();
        let expected =
            &j0() * (FiberMatrix::identity(2).scaled(1f64.cosh()) + k.scaled(1f64.sinh()));
        assert!(got.dist_max(&expected) < 1e-14);
        assert!(acs_residual(&got) < 1e-10);
    }

    #[test]
    fn exp_chart_rejects_commuting_input() {
        assert!(matches!(
            exp_chart(&j0(), &FiberMatrix::identity(2)),
            Err(GeometryError::AnticommutationViolation { .. })
        ));
    }

    #[test]
    fn cayley_examples() {
        let origin = CayleyCoordinate::origin(j0()).unwrap();
        assert_eq!(cayley_to_acs(&origin), j0());

        let c = CayleyCoordinate::new(j0(), m2([[0.0, 0.5], [0.5, 0.0]])).unwrap();
        let expected = m2([[-4.0 / 3.0, -5.0 / 3.0], [5.0 / 3.0, 4.0 / 3.0]]);
        assert!(cayley_to_acs(&c).dist_max(&expected) < 1e-15);

        let c = CayleyCoordinate::new(j0(), diag(0.5, -0.5)).unwrap();
        assert!(cayley_to_acs(&c).dist_max(&m2([[0.0, -1.0 / 3.0], [3.0, 0.0]])) < 1e-15);
        assert!(cayley_to_acs(&c).dist_max(&diagonal_cayley_oracle(0.5)) < 1e-15);
    }

    #[test]
    fn cayley_alternative_forms_agree() {
        let k = m2([[0.3, -0.4], [-0.4, -0.3]]);
        let c = CayleyCoordinate::new(j0(), k.clone()).unwrap();
        let j = cayley_to_acs(&c);
        let id = FiberMatrix::identity(2);
        let inv_plus = mat_inv_guarded(&(&id + &k), DEFAULT_COND_CAP).unwrap();
        let second = (&id - &k) * &inv_plus * j0();
        let third = (&id - &k) * j0() * c.one_minus_k_inv();
        assert!(j.dist_max(&second) < 1e-10);
        assert!(j.dist_max(&third) < 1e-10);
        assert!(acs_residual(&j) < 1e-10);
    }

    #[test]
    fn cayley_rejects_chart_boundary() {
        // K = diag(1, -1) has eigenvalue 1
        assert!(matches!(
            CayleyCoordinate::new(j0(), diag(1.0, -1.0)),
            Err(GeometryError::SingularOperator { .. })
        ));
    }

    #[test]
    fn inverse_chart_examples() {
        assert_eq!(acs_to_cayley(&j0(), &j0()).unwrap().k().max_abs(), 0.0);
        let c = acs_to_cayley(&j0(), &m2([[0.0, -1.0 / 3.0], [3.0, 0.0]])).unwrap();
        assert!(c.k().dist_max(&diag(0.5, -0.5)) < 1e-15);
        assert!(matches!(
            acs_to_cayley(&j0(), &-j0()),
            Err(GeometryError::SingularOperator { .. })
        ));
    }

    #[test]
    fn transition_examples() {
        let k = diag(0.5, -0.5);
        assert!(chart_transition(&k, &j0(), &j0()).unwrap().dist_max(&k) < 1e-15);

        let j1 = cayley_to_acs(&CayleyCoordinate::new(j0(), diag(0.2, -0.2)).unwrap());
        let relabeled = chart_transition(&FiberMatrix::zeros(2), &j0(), &j1).unwrap();
        let direct = acs_to_cayley(&j1, &j0()).unwrap();
        assert!(relabeled.dist_max(direct.k()) < 1e-14);

        // Diagonal Cayley coordinates compose like tanh of half-angles:
        // P = (0.5 - 0.2) / (1 - 0.5 * 0.2) = 1/3.
        let p = chart_transition(&k, &j0(), &j1).unwrap();
        assert!(p.dist_max(&diag(1.0 / 3.0, -1.0 / 3.0)) < 1e-14);
        assert!(anticommutation_residual(&p, &j1) < 1e-10);
    }

    #[test]
    fn pushforward_examples() {
        let a = diag(1.0, -1.0);
        let origin = CayleyCoordinate::origin(j0()).unwrap();
        assert_eq!(pushforward(&origin, &a), m2([[0.0, 2.0], [2.0, 0.0]]));

        // (1-K)⁻¹ = diag(2, 2/3)
        let c = CayleyCoordinate::new(j0(), diag(0.5, -0.5)).unwrap();
        let r = diag(2.0, 2.0 / 3.0);
        let oracle = (&j0() * &r * &a * &r).scaled(2.0);
        // J₀ · diag(4, -4/9) · 2 = [[0, 8/9], [8, 0]]
        assert!(oracle.dist_max(&m2([[0.0, 8.0 / 9.0], [8.0, 0.0]])) < 1e-15);
        let got = pushforward(&c, &a);
        assert!(got.dist_max(&oracle) < 1e-14);
        let jk = cayley_to_acs(&c);
        assert!(anticommutation_residual(&got, &jk) < 1e-9);
    }

    #[test]
    fn pushforward_alternative_forms() {
        let k = m2([[0.2, 0.4], [0.4, -0.2]]);
        let a = m2([[-0.3, 0.7], [0.7, 0.3]]);
        let c = CayleyCoordinate::new(j0(), k.clone()).unwrap();
        let jk = cayley_to_acs(&c);
        let id = FiberMatrix::identity(2);
        let r = c.one_minus_k_inv();
        let star = pushforward(&c, &a);
        let second = j0() * &a * r + &jk * &a * r;
        let resolvent = mat_inv_guarded(&(&id - &k * &k), DEFAULT_COND_CAP).unwrap();
        let third = (&jk * (&id - &k) * resolvent * &a * r).scaled(2.0);
        assert!(star.dist_max(&second) < 1e-10);
        assert!(star.dist_max(&third) < 1e-10);
        // the complex structures of chart and space agree
        let lhs = pushforward(&c, &(&a * j0()));
        assert!(lhs.dist_max(&(&star * &jk)) < 1e-10);
    }

    #[test]
    fn pullback_examples() {
        let a = diag(1.0, -1.0);
        let origin = CayleyCoordinate::origin(j0()).unwrap();
        let star = (j0() * &a).scaled(2.0);
        assert!(pullback(&origin, &star).dist_max(&a) < 1e-15);
        assert_eq!(pullback(&origin, &FiberMatrix::zeros(2)).max_abs(), 0.0);
    }

    #[test]
    fn geodesic_matches_cayley_of_exponential() {
        let a = m2([[0.4, 0.3], [0.3, -0.4]]);
        for t in [0.0, 0.5, 1.0, 2.0] {
            let j = exp_chart(&j0(), &a.scaled(t)).unwrap();
            let k = acs_to_cayley(&j0(), &j).unwrap();
            let tanh = mat_tanh_half(&a, t).unwrap();
            assert!(k.k().dist_max(&tanh) < 1e-9);
        }
    }

    #[test]
    fn pushforward_inner_product_matches_chart_formula() {
        let k = m2([[0.2, 0.4], [0.4, -0.2]]);
        let a = m2([[-0.3, 0.7], [0.7, 0.3]]);
        let c = CayleyCoordinate::new(j0(), k.clone()).unwrap();
        let star = pushforward(&c, &a);
        let id = FiberMatrix::identity(2);
        let r = mat_inv_guarded(&(&id - &k * &k), DEFAULT_COND_CAP).unwrap();
        let chart = 4.0 * trace_product(&(&r * &a * &r), &a);
        assert!((trace_product(&star, &star) - chart).abs() < 1e-12);
    }
}
