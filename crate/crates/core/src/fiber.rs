//! Dense kernels acting on a single tangent fiber.
//!
//! Every higher-level object in the crate is a list of [`FiberMatrix`]
//! values, one per sample point. The kernels here are the only place where
//! matrices get inverted or exponentiated.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{GeometryError, Result};

/// Default cap on the condition estimate accepted by [`mat_inv_guarded`].
pub const DEFAULT_COND_CAP: f64 = 1e12;

/// Symmetry tolerance for [`FiberMetric`].
const METRIC_SYMMETRY_TOL: f64 = 1e-12;

/// Real square matrix of even size `2n` acting on one tangent fiber.
///
/// Construction rejects odd or empty sizes and non-finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberMatrix(DMatrix<f64>);

impl FiberMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(GeometryError::InvalidMatrix(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() < 2 || !m.nrows().is_multiple_of(2) {
            return Err(GeometryError::InvalidMatrix(format!(
                "fiber dimension {} is not even and >= 2",
                m.nrows()
            )));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(GeometryError::InvalidMatrix("non-finite entry".into()));
        }
        Ok(Self(m))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(GeometryError::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    /// Builds a matrix from a list of rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(GeometryError::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_slice(dim, &flat)
    }

    pub fn identity(dim: usize) -> Self {
        Self::checked_dim(dim);
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::checked_dim(dim);
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// The standard complex structure: `n` diagonal blocks `[[0, -1], [1, 0]]`.
    pub fn standard_complex(dim: usize) -> Self {
        Self::checked_dim(dim);
        let mut m = DMatrix::zeros(dim, dim);
        for b in 0..dim / 2 {
            m[(2 * b, 2 * b + 1)] = -1.0;
            m[(2 * b + 1, 2 * b)] = 1.0;
        }
        Self(m)
    }

    fn checked_dim(dim: usize) {
        assert!(
            dim >= 2 && dim.is_multiple_of(2),
            "fiber dimension {dim} must be even and >= 2"
        );
    }

    /// Wraps the result of an internal computation; finiteness is not rechecked.
    pub(crate) fn from_raw(m: DMatrix<f64>) -> Self {
        debug_assert!(m.nrows() == m.ncols() && m.nrows().is_multiple_of(2));
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    /// Largest absolute entry of `self - other`.
    pub fn dist_max(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 + &other.0 * &self.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn spectral_norm(&self) -> f64 {
        self.0
            .clone()
            .singular_values()
            .iter()
            .fold(0.0, |acc, s| acc.max(*s))
    }

    /// Largest eigenvalue modulus, including complex eigenvalues.
    pub fn spectral_radius(&self) -> f64 {
        self.0
            .complex_eigenvalues()
            .iter()
            .fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(&self.0 * s)
    }
}

/// `tr(AB)` without forming the product.
pub fn trace_product(a: &FiberMatrix, b: &FiberMatrix) -> f64 {
    let (a, b) = (a.as_matrix(), b.as_matrix());
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&FiberMatrix> for &FiberMatrix {
            type Output = FiberMatrix;
            fn $method(self, rhs: &FiberMatrix) -> FiberMatrix {
                FiberMatrix($trait::$method(&self.0, &rhs.0))
            }
        }
        impl $trait<FiberMatrix> for FiberMatrix {
            type Output = FiberMatrix;
            fn $method(self, rhs: FiberMatrix) -> FiberMatrix {
                FiberMatrix($trait::$method(&self.0, &rhs.0))
            }
        }
        impl $trait<&FiberMatrix> for FiberMatrix {
            type Output = FiberMatrix;
            fn $method(self, rhs: &FiberMatrix) -> FiberMatrix {
                FiberMatrix($trait::$method(&self.0, &rhs.0))
            }
        }
        impl $trait<FiberMatrix> for &FiberMatrix {
            type Output = FiberMatrix;
            fn $method(self, rhs: FiberMatrix) -> FiberMatrix {
                FiberMatrix($trait::$method(&self.0, &rhs.0))
            }
        }
    };
}

impl_binop!(Add, add);
impl_binop!(Sub, sub);
impl_binop!(Mul, mul);

impl Mul<f64> for &FiberMatrix {
    type Output = FiberMatrix;
    fn mul(self, rhs: f64) -> FiberMatrix {
        FiberMatrix(&self.0 * rhs)
    }
}

impl Mul<f64> for FiberMatrix {
    type Output = FiberMatrix;
    fn mul(self, rhs: f64) -> FiberMatrix {
        FiberMatrix(self.0 * rhs)
    }
}

impl Neg for &FiberMatrix {
    type Output = FiberMatrix;
    fn neg(self) -> FiberMatrix {
        FiberMatrix(-&self.0)
    }
}

impl Neg for FiberMatrix {
    type Output = FiberMatrix;
    fn neg(self) -> FiberMatrix {
        FiberMatrix(-self.0)
    }
}

/// Symmetric positive-definite metric on one fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberMetric {
    g: FiberMatrix,
    g_inv: FiberMatrix,
    identity: bool,
}

impl FiberMetric {
    pub fn new(g: FiberMatrix) -> Result<Self> {
        let asym = g.dist_max(&g.transpose());
        if asym > METRIC_SYMMETRY_TOL {
            return Err(GeometryError::InvalidMatrix(format!(
                "metric is not symmetric (residual {asym:e})"
            )));
        }
        let eig = SymmetricEigen::new(g.as_matrix().clone());
        let min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, x| a.min(*x));
        if min <= 0.0 {
            return Err(GeometryError::InvalidMatrix(format!(
                "metric is not positive definite (smallest eigenvalue {min:e})"
            )));
        }
        let identity = g == FiberMatrix::identity(g.dim());
        let g_inv = if identity {
            g.clone()
        } else {
            mat_inv_guarded(&g, DEFAULT_COND_CAP)?
        };
        Ok(Self { g, g_inv, identity })
    }

    pub fn identity(dim: usize) -> Self {
        let g = FiberMatrix::identity(dim);
        Self {
            g_inv: g.clone(),
            g,
            identity: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn matrix(&self) -> &FiberMatrix {
        &self.g
    }

    pub fn inverse(&self) -> &FiberMatrix {
        &self.g_inv
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    /// `g(x, y) = xᵀ G y`.
    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (x.transpose() * self.g.as_matrix() * y)[(0, 0)]
    }
}

/// Inverse of `a`, refused when the 1-norm condition estimate exceeds `cond_cap`.
pub fn mat_inv_guarded(a: &FiberMatrix, cond_cap: f64) -> Result<FiberMatrix> {
    let singular = |condition| GeometryError::SingularOperator {
        condition,
        cap: cond_cap,
    };
    let inv = a
        .as_matrix()
        .clone()
        .try_inverse()
        .ok_or_else(|| singular(f64::INFINITY))?;
    let condition = one_norm(a.as_matrix()) * one_norm(&inv);
    if !condition.is_finite() || condition > cond_cap {
        return Err(singular(condition));
    }
    Ok(FiberMatrix(inv))
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

// Padé(13) numerator coefficients and the 1-norm bound under which the
// unscaled approximant is accurate to double precision.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a Padé(13) approximant.
pub fn mat_exp(a: &FiberMatrix) -> FiberMatrix {
    let n = a.dim();
    let norm = one_norm(a.as_matrix());
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let x = a.as_matrix() * 2f64.powi(-squarings);
    let id = DMatrix::<f64>::identity(n, n);
    let x2 = &x * &x;
    let x4 = &x2 * &x2;
    let x6 = &x4 * &x2;
    let b = &PADE13;

    let u_inner = &x6 * (&x6 * b[13] + &x4 * b[11] + &x2 * b[9]);
    let u = &x * (u_inner + &x6 * b[7] + &x4 * b[5] + &x2 * b[3] + &id * b[1]);
    let v_inner = &x6 * (&x6 * b[12] + &x4 * b[10] + &x2 * b[8]);
    let v = v_inner + &x6 * b[6] + &x4 * b[4] + &x2 * b[2] + &id * b[0];

    let denom = &v - &u;
    let numer = &v + &u;
    let mut r = denom
        .lu()
        .solve(&numer)
        .expect("Padé denominator is nonsingular inside the scaling bound");
    for _ in 0..squarings {
        r = &r * &r;
    }
    FiberMatrix(r)
}

/// `tanh(t/2 · A) = (e^{tA/2} + e^{-tA/2})⁻¹ (e^{tA/2} - e^{-tA/2})`.
///
/// The cosh factor is singular exactly when `tA/2` has an eigenvalue on
/// `i(π/2 + kπ)`, which real-spectrum directions never reach. Near such
/// points the inverse is refused once its 1-norm exceeds the default cap.
pub fn mat_tanh_half(a: &FiberMatrix, t: f64) -> Result<FiberMatrix> {
    let half = a.scaled(0.5 * t);
    let plus = mat_exp(&half);
    let minus = mat_exp(&-&half);
    let cosh2 = &plus + &minus;
    let sinh2 = &plus - &minus;
    let inv = mat_inv_guarded(&cosh2, DEFAULT_COND_CAP)?;
    // a uniformly small cosh factor is well conditioned but still singular in the limit
    let inv_norm = one_norm(inv.as_matrix());
    if inv_norm > DEFAULT_COND_CAP {
        return Err(GeometryError::SingularOperator {
            condition: inv_norm,
            cap: DEFAULT_COND_CAP,
        });
    }
    Ok(inv * sinh2)
}

/// Adjoint with respect to `g`: `A^♯ = G⁻¹ Aᵀ G`.
pub fn g_adjoint(a: &FiberMatrix, g: &FiberMetric) -> FiberMatrix {
    if g.is_identity() {
        return a.transpose();
    }
    g.inverse() * a.transpose() * g.matrix()
}
