//! Finite-difference oracles and checkers for the geometric identities.
//!
//! Each checker draws its cases from an RNG stream derived from the master
//! seed and its own name, so checkers can run concurrently and still produce
//! bitwise-identical reports. A report passes iff its largest case residual
//! is at most its tolerance.
//!
//! Definiteness checks use a signed margin: the residual of a
//! positive-definiteness case is `-λ_min` and the tolerance is `-threshold`,
//! so `residual ≤ tolerance` reads `λ_min ≥ threshold`.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::charts::{
    acs_residual, acs_to_cayley, anticommute_project, cayley_to_acs, pushforward, CayleyCoordinate,
};
use crate::error::{GeometryError, Result};
use crate::fiber::{g_adjoint, mat_inv_guarded, mat_tanh_half, FiberMatrix, DEFAULT_COND_CAP};
use crate::format::RawFields;
use crate::geometry::{
    acs_on_tangent, ambient_inner, ambient_omega, chart_inner, chart_of, chart_omega, christoffel,
    curvature, geodesic_ambient, geodesic_chart, ChartField,
};
use crate::sampling::{random_space, random_tangent, stream, TangentKind};
use crate::structures::{
    sym_antisym_split, validate_acs, validate_associated_with_tol, validate_orthogonal_with_tol,
    AcsField, MetricField, SampleSpace, SymplecticField, TangentField,
};

/// One evaluated case of a check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseRecord {
    pub label: String,
    pub dim: usize,
    pub seed: u64,
    /// Serialized as `null` when the case could not be evaluated.
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub max_residual: f64,
    pub tolerance: f64,
    pub seed: u64,
    pub dims: Vec<usize>,
    /// Finite-difference step, for FD-based checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    pub details: Vec<CaseRecord>,
}

/// Merged outcome of [`run_suite`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub passed: bool,
    pub seed: u64,
    pub trials: usize,
    pub points: usize,
    pub reports: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn report(&self, name: &str) -> Option<&CheckReport> {
        self.reports.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

/// Tolerances of every check, overridable from the command line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub chart_roundtrip: f64,
    pub acs: f64,
    pub theorem1: f64,
    pub theorem2: f64,
    pub curvature_fd: f64,
    pub bianchi: f64,
    pub curvature_origin: f64,
    pub geodesic_fd: f64,
    pub chart_ambient: f64,
    pub hermitian: f64,
    pub omega_compat: f64,
    pub connection: f64,
    pub associated: f64,
    pub orthogonal: f64,
    pub signature: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            chart_roundtrip: 1e-9,
            acs: 1e-10,
            theorem1: 1e-9,
            theorem2: 1e-6,
            curvature_fd: 1e-5,
            bianchi: 1e-10,
            curvature_origin: 1e-12,
            geodesic_fd: 1e-6,
            chart_ambient: 1e-9,
            hermitian: 1e-10,
            omega_compat: 1e-12,
            connection: 1e-6,
            associated: 1e-9,
            orthogonal: 1e-10,
            signature: 1e-10,
        }
    }
}

/// Accepted range of `residual(h) / residual(h/2)` for second-order stencils.
pub const CONVERGENCE_RATIO: (f64, f64) = (2.5, 6.0);

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Random cases per dimension.
    pub trials: usize,
    pub dims: Vec<usize>,
    pub points: usize,
    pub h: f64,
    /// Times at which geodesic chart/ambient consistency and the
    /// totally-geodesic validators are evaluated.
    pub t_grid: Vec<f64>,
    /// Times at which the geodesic equation is checked by finite differences.
    pub fd_times: Vec<f64>,
    /// Spectral-norm bound of random chart points and directions.
    pub chart_bound: f64,
    /// Tighter bound for chart points of the curvature FD check.
    pub curvature_bound: f64,
    pub tolerances: Tolerances,
    /// Optional user field, validated as an extra check.
    pub input: Option<RawFields>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 100,
            dims: vec![2, 4, 6],
            points: 8,
            h: 1e-4,
            t_grid: uniform_grid(2.0, 8),
            fd_times: vec![0.2, 0.6, 1.0],
            chart_bound: 0.9,
            curvature_bound: 0.5,
            tolerances: Tolerances::default(),
            input: None,
        }
    }
}

/// `steps + 1` equally spaced times on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|i| t_max * i as f64 / steps as f64)
        .collect()
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GeometryError::Config(msg));
        if self.dims.is_empty() {
            return bad("no dimensions requested".into());
        }
        if let Some(d) = self.dims.iter().find(|d| **d < 2 || **d % 2 != 0) {
            return bad(format!("dimension {d} is not even and >= 2"));
        }
        if self.points == 0 {
            return bad("at least one sample point is required".into());
        }
        if self.trials == 0 {
            return bad("at least one trial is required".into());
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad(format!("finite-difference step {} is not positive", self.h));
        }
        if self.t_grid.is_empty() || self.fd_times.is_empty() {
            return bad("empty time grid".into());
        }
        if !(0.0 < self.curvature_bound && self.chart_bound < 1.0 && self.curvature_bound < 1.0) {
            return bad("chart bounds must lie in (0, 1)".into());
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Finite-difference oracles

/// Central difference `(f(K + hA) - f(K - hA)) / 2h`.
pub fn fd_directional(
    f: impl Fn(&ChartField) -> Result<f64>,
    c: &ChartField,
    dir: &TangentField,
    h: f64,
) -> Result<f64> {
    let plus = f(&c.shifted(dir, h)?)?;
    let minus = f(&c.shifted(dir, -h)?)?;
    Ok((plus - minus) / (2.0 * h))
}

/// Central difference of a tangent-valued function of the chart point.
pub fn fd_directional_field(
    f: impl Fn(&ChartField) -> Result<TangentField>,
    c: &ChartField,
    dir: &TangentField,
    h: f64,
) -> Result<TangentField> {
    let plus = f(&c.shifted(dir, h)?)?;
    let minus = f(&c.shifted(dir, -h)?)?;
    plus.add_scaled(&minus, -1.0)
        .map(|d| d.scaled(1.0 / (2.0 * h)))
}

// ---------------------------------------------------------------------------
// Case bookkeeping

struct Cases {
    name: &'static str,
    tolerance: f64,
    step: Option<f64>,
    records: Vec<CaseRecord>,
}

impl Cases {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            step: None,
            records: Vec::new(),
        }
    }

    fn with_step(mut self, h: f64) -> Self {
        self.step = Some(h);
        self
    }

    fn push(&mut self, label: impl Into<String>, dim: usize, seed: u64, r: Result<f64>) {
        let (residual, error) = match r {
            Ok(v) => (v, None),
            Err(e) => (f64::INFINITY, Some(e.to_string())),
        };
        self.records.push(CaseRecord {
            label: label.into(),
            dim,
            seed,
            residual,
            error,
        });
    }

    fn finish(self, cfg: &SuiteConfig, dims: &[usize]) -> CheckReport {
        let max_residual = self
            .records
            .iter()
            .map(|c| {
                if c.residual.is_nan() {
                    f64::INFINITY
                } else {
                    c.residual
                }
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let passed = !self.records.is_empty() && max_residual <= self.tolerance;
        CheckReport {
            name: self.name.to_string(),
            passed,
            max_residual,
            tolerance: self.tolerance,
            seed: cfg.seed,
            dims: dims.to_vec(),
            step: self.step,
            details: self.records,
        }
    }
}

/// Case seeds of one checker in one dimension, independent of which other
/// dimensions are requested.
fn case_seeds(cfg: &SuiteConfig, checker: &str, dim: usize) -> ChaCha8Rng {
    stream(cfg.seed, &format!("{checker}/{dim}"))
}

struct Fixture {
    base: Arc<AcsField>,
}

impl Fixture {
    fn new(rng: &mut ChaCha8Rng, dim: usize, points: usize) -> Result<Self> {
        let space = Arc::new(random_space(rng, dim, points)?);
        Ok(Self {
            base: Arc::new(AcsField::standard(space)),
        })
    }

    fn space(&self) -> &Arc<SampleSpace> {
        self.base.space()
    }

    fn tangent(&self, rng: &mut ChaCha8Rng, kind: TangentKind, bound: f64) -> Result<TangentField> {
        random_tangent(rng, &self.base, kind, bound)
    }

    fn chart(&self, rng: &mut ChaCha8Rng, bound: f64) -> Result<ChartField> {
        ChartField::new(self.tangent(rng, TangentKind::Mixed, bound)?)
    }
}

fn sum_abs_max<'a>(it: impl IntoIterator<Item = &'a FiberMatrix>) -> f64 {
    it.into_iter().map(FiberMatrix::max_abs).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Checkers

/// Round trip `Φ(Φ⁻¹(K)) = K` of the Cayley chart, `J² = -Id` of its images,
/// and joint invertibility of `1 ± K`.
pub fn check_chart_bijection(cfg: &SuiteConfig) -> Vec<CheckReport> {
    let tol = &cfg.tolerances;
    let mut roundtrip = Cases::new("chart_roundtrip", tol.chart_roundtrip);
    let mut acs = Cases::new("chart_acs", tol.acs);
    let mut sides = Cases::new("chart_plus_minus_invertible", 0.0);
    for &dim in &cfg.dims {
        let mut seeds = case_seeds(cfg, "chart_bijection", dim);
        for _ in 0..cfg.trials {
            let seed = seeds.random();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut run = || -> Result<(f64, f64, f64)> {
                let fx = Fixture::new(&mut rng, dim, cfg.points)?;
                let k = fx.tangent(&mut rng, TangentKind::Mixed, cfg.chart_bound)?;
                let (mut rt, mut jr, mut pm) = (0.0_f64, 0.0_f64, 0.0_f64);
                for (op, j0) in k.ops().iter().zip(fx.base.ops()) {
                    let c = CayleyCoordinate::new(j0.clone(), op.clone())?;
                    let j = cayley_to_acs(&c);
                    jr = jr.max(acs_residual(&j));
                    let back = acs_to_cayley(j0, &j)?;
                    rt = rt.max(back.k().dist_max(op));
                    let id = FiberMatrix::identity(dim);
                    if mat_inv_guarded(&(&id + op), DEFAULT_COND_CAP).is_err() {
                        pm = 1.0;
                    }
                }
                Ok((rt, jr, pm))
            };
            let r = run();
            roundtrip.push("random", dim, seed, r.clone().map(|v| v.0));
            acs.push("random", dim, seed, r.clone().map(|v| v.1));
            sides.push("random", dim, seed, r.map(|v| v.2));
        }
    }
    vec![
        roundtrip.finish(cfg, &cfg.dims),
        acs.finish(cfg, &cfg.dims),
        sides.finish(cfg, &cfg.dims),
    ]
}

/// `dΦ⁻¹(AJ₀) = dΦ⁻¹(A)∘J_K`: the chart's complex structure is the space's.
pub fn check_theorem1(cfg: &SuiteConfig) -> CheckReport {
    let mut cases = Cases::new("theorem1", cfg.tolerances.theorem1);
    for &dim in &cfg.dims {
        let mut seeds = case_seeds(cfg, "theorem1", dim);
        for _ in 0..cfg.trials {
            let seed = seeds.random();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut run = || -> Result<f64> {
                let fx = Fixture::new(&mut rng, dim, cfg.points)?;
                let k = fx.tangent(&mut rng, TangentKind::Mixed, cfg.chart_bound)?;
                let a = fx.tangent(&mut rng, TangentKind::Mixed, 1.0)?;
                let mut worst = 0.0_f64;
                for i in 0..k.len() {
                    let c = CayleyCoordinate::new(fx.base.op(i).clone(), k.op(i).clone())?;
                    let jk = cayley_to_acs(&c);
                    let lhs = pushforward(&c, &(a.op(i) * fx.base.op(i)));
                    let rhs = pushforward(&c, a.op(i)) * &jk;
                    worst = worst.max(lhs.dist_max(&rhs));
                }
                Ok(worst)
            };
            cases.push("random", dim, seed, run());
        }
    }
    cases.finish(cfg, &cfg.dims)
}

// The three directional-derivative terms of dΩ(A₀, A₁, A₂) for constant
// fields, plus their alternating sum.
fn domega_terms(c: &ChartField, a: [&TangentField; 3], h: f64) -> Result<[f64; 4]> {
    let term = |dir: &TangentField, x: &TangentField, y: &TangentField| {
        fd_directional(|p| chart_omega(p, x, y), c, dir, h)
    };
    let t0 = term(a[0], a[1], a[2])?;
    let t1 = term(a[1], a[0], a[2])?;
    let t2 = term(a[2], a[0], a[1])?;
    Ok([t0, t1, t2, t0 - t1 + t2])
}

fn max_abs4(v: [f64; 4]) -> f64 {
    v.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

/// Closedness of the fundamental form: every term of `dΩ` vanishes at the
/// chart center, also after re-centering the chart at a random structure.
/// The alternating sum at an off-center point of a fixed chart vanishes too,
/// and its decay under `h → h/2` certifies the stencil order.
pub fn check_theorem2(cfg: &SuiteConfig) -> Vec<CheckReport> {
    let h = cfg.h;
    let tol = cfg.tolerances.theorem2;
    let mut center = Cases::new("theorem2_center", tol).with_step(h);
    let mut recentered = Cases::new("theorem2_recentered", tol).with_step(h);
    let mut convergence = Cases::new("theorem2_convergence", 0.0).with_step(h);
    let mut coarse_total = 0.0;
    let mut fine_total = 0.0;
    for &dim in &cfg.dims {
        let mut seeds = case_seeds(cfg, "theorem2", dim);
        for _ in 0..cfg.trials {
            let seed = seeds.random();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let fx = match Fixture::new(&mut rng, dim, cfg.points) {
                Ok(fx) => fx,
                Err(e) => {
                    center.push("origin", dim, seed, Err(e));
                    continue;
                }
            };
            let draw3 = |base: &Arc<AcsField>, rng: &mut ChaCha8Rng| -> Result<[TangentField; 3]> {
                Ok([
                    random_tangent(rng, base, TangentKind::Mixed, cfg.chart_bound)?,
                    random_tangent(rng, base, TangentKind::Mixed, cfg.chart_bound)?,
                    random_tangent(rng, base, TangentKind::Mixed, cfg.chart_bound)?,
                ])
            };

            let r = draw3(&fx.base, &mut rng).and_then(|a| {
                domega_terms(
                    &ChartField::origin(fx.base.clone()),
                    [&a[0], &a[1], &a[2]],
                    h,
                )
            });
            center.push("origin", dim, seed, r.map(max_abs4));

            let r = (|| -> Result<f64> {
                let k = fx.chart(&mut rng, cfg.curvature_bound)?;
                let j1 = Arc::new(k.acs());
                let a = draw3(&j1, &mut rng)?;
                let terms = domega_terms(&ChartField::origin(j1), [&a[0], &a[1], &a[2]], h)?;
                Ok(max_abs4(terms))
            })();
            recentered.push("recentered", dim, seed, r);

            let r = (|| -> Result<(f64, f64)> {
                let k = fx.chart(&mut rng, cfg.curvature_bound)?;
                let a = draw3(&fx.base, &mut rng)?;
                let coarse = domega_terms(&k, [&a[0], &a[1], &a[2]], h)?[3].abs();
                let fine = domega_terms(&k, [&a[0], &a[1], &a[2]], h / 2.0)?[3].abs();
                Ok((coarse, fine))
            })();
            match r {
                Ok((coarse, fine)) => {
                    coarse_total += coarse;
                    fine_total += fine;
                }
                Err(e) => convergence.push("offcenter", dim, seed, Err(e)),
            }
        }
    }
    let ratio = coarse_total / fine_total;
    let (lo, hi) = CONVERGENCE_RATIO;
    let outside = if ratio.is_finite() {
        (lo - ratio).max(ratio - hi).max(0.0)
    } else {
        f64::INFINITY
    };
    convergence.push(
        format!("ratio {ratio:.6} of summed |dΩ| at h and h/2 (coarse {coarse_total:e}, fine {fine_total:e})"),
        0,
        cfg.seed,
        Ok(outside),
    );
    vec![
        center.finish(cfg, &cfg.dims),
        recentered.finish(cfg, &cfg.dims),
        convergence.finish(cfg, &cfg.dims),
    ]
}

/// Closed-form curvature against `∇_A∇_BC - ∇_B∇_AC` assembled from finite
/// differences of the connection, plus antisymmetry, first Bianchi identity
/// and the `K = 0` reduction `-[[A,B],C]`.
pub fn check_curvature_fd(cfg: &SuiteConfig) -> Vec<CheckReport> {
    let h = cfg.h;
    let tol = &cfg.tolerances;
    let mut fd = Cases::new("curvature_fd", tol.curvature_fd).with_step(h);
    let mut skew = Cases::new("curvature_antisymmetry", 0.0);
    let mut bianchi = Cases::new("curvature_bianchi", tol.bianchi);
    let mut origin = Cases::new("curvature_origin", tol.curvature_origin);
    let mut hand = Cases::new("curvature_hand_case", tol.curvature_origin);
    for &dim in &cfg.dims {
        let mut seeds = case_seeds(cfg, "curvature", dim);
        for _ in 0..cfg.trials {
            let seed = seeds.random();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let setup = (|| -> Result<_> {
                let fx = Fixture::new(&mut rng, dim, cfg.points)?;
                let c = fx.chart(&mut rng, cfg.curvature_bound)?;
                let a = fx.tangent(&mut rng, TangentKind::Mixed, 1.0)?;
                let b = fx.tangent(&mut rng, TangentKind::Mixed, 1.0)?;
                let cc = fx.tangent(&mut rng, TangentKind::Mixed, 1.0)?;
                Ok((fx, c, a, b, cc))
            })();
            let (fx, c, a, b, cc) = match setup {
                Ok(v) => v,
                Err(e) => {
                    fd.push("random", dim, seed, Err(e));
                    continue;
                }
            };
            let closed = curvature(&c, &a, &b, &cc);

            let r = (|| -> Result<f64> {
                let nabla_nabla = |x: &TangentField, y: &TangentField| -> Result<TangentField> {
                    let d = fd_directional_field(|p| christoffel(p, y, &cc), &c, x, h)?;
                    let inner = christoffel(&c, y, &cc)?;
                    d.add_scaled(&christoffel(&c, x, &inner)?, 1.0)
                };
                let assembled = nabla_nabla(&a, &b)?.add_scaled(&nabla_nabla(&b, &a)?, -1.0)?;
                Ok(assembled.dist_max(closed.as_ref().map_err(Clone::clone)?))
            })();
            fd.push("random", dim, seed, r);

            let r = (|| -> Result<f64> {
                let rab = closed.clone()?;
                let rba = curvature(&c, &b, &a, &cc)?;
                Ok(rab.add_scaled(&rba, 1.0)?.max_abs())
            })();
            skew.push("random", dim, seed, r);

            let r = (|| -> Result<f64> {
                let sum = closed
                    .clone()?
                    .add_scaled(&curvature(&c, &b, &cc, &a)?, 1.0)?
                    .add_scaled(&curvature(&c, &cc, &a, &b)?, 1.0)?;
                Ok(sum.max_abs())
            })();
            bianchi.push("random", dim, seed, r);

            let r = (|| -> Result<f64> {
                let at_origin = curvature(&ChartField::origin(fx.base.clone()), &a, &b, &cc)?;
                let mut worst = 0.0_f64;
                for i in 0..a.len() {
                    let expected = -a.op(i).commutator(b.op(i)).commutator(cc.op(i));
                    worst = worst.max(at_origin.op(i).dist_max(&expected));
                }
                Ok(worst)
            })();
            origin.push("origin", dim, seed, r);
        }
    }
    let r = (|| -> Result<f64> {
        let space = Arc::new(SampleSpace::uniform(2, 1)?);
        let base = Arc::new(AcsField::standard(space));
        let a = TangentField::new(base.clone(), vec![FiberMatrix::diagonal(&[1.0, -1.0])?])?;
        let b = TangentField::new(
            base.clone(),
            vec![FiberMatrix::from_row_slice(2, &[0.0, 1.0, 1.0, 0.0])?],
        )?;
        let rabb = curvature(&ChartField::origin(base), &a, &b, &b)?;
        Ok(rabb.op(0).dist_max(&FiberMatrix::diagonal(&[-4.0, 4.0])?))
    })();
    hand.push(
        "A=diag(1,-1), B=[[0,1],[1,0]]: R(A,B)B = diag(-4,4)",
        2,
        0,
        r,
    );
    vec![
        fd.finish(cfg, &cfg.dims),
        skew.finish(cfg, &cfg.dims),
        bianchi.finish(cfg, &cfg.dims),
        origin.finish(cfg, &cfg.dims),
        hand.finish(cfg, &[2]),
    ]
}

/// Residual `‖K'' + Γ(K', K')‖_max` of `K(t) = tanh(t/2·A)` by central
/// differences, at the chart point `K(t)`.
pub fn geodesic_equation_residual(a: &TangentField, t: f64, h: f64) -> Result<f64> {
    let k_minus = geodesic_chart(a, t - h)?;
    let k_mid = geodesic_chart(a, t)?;
    let k_plus = geodesic_chart(a, t + h)?;
    let velocity = k_plus.add_scaled(&k_minus, -1.0)?.scaled(1.0 / (2.0 * h));
    let accel = k_plus
        .add_scaled(&k_mid, -2.0)?
        .add_scaled(&k_minus, 1.0)?
        .scaled(1.0 / (h * h));
    let c = ChartField::new(k_mid)?;
    let gamma = christoffel(&c, &velocity, &velocity)?;
    Ok(accel.add_scaled(&gamma, 1.0)?.max_abs())
}

/// Geodesic equation in the chart and agreement of the chart geodesic with
/// the ambient curve `J₀e^{tA}`.
pub fn check_geodesics(cfg: &SuiteConfig) -> Vec<CheckReport> {
    let h = cfg.h;
    let tol = &cfg.tolerances;
    let mut equation = Cases::new("geodesic_equation", tol.geodesic_fd).with_step(h);
    let mut consistency = Cases::new("geodesic_chart_ambient", tol.chart_ambient);
    for &dim in &cfg.dims {
        let mut seeds = case_seeds(cfg, "geodesics", dim);
        for _ in 0..cfg.trials {
            let seed = seeds.random();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let setup = Fixture::new(&mut rng, dim, cfg.points).and_then(|fx| {
                Ok((
                    fx.tangent(&mut rng, TangentKind::Mixed, cfg.chart_bound)?,
                    fx,
                ))
            });
            let (a, fx) = match setup {
                Ok(v) => v,
                Err(e) => {
                    equation.push("random", dim, seed, Err(e));
                    continue;
                }
            };
            for &t in &cfg.fd_times {
                equation.push(
                    format!("t={t}"),
                    dim,
                    seed,
                    geodesic_equation_residual(&a, t, h),
                );
            }
            let r = (|| -> Result<f64> {
                let mut worst = 0.0_f64;
                for &t in &cfg.t_grid {
                    let jt = geodesic_ambient(&fx.base, &a, t)?;
                    let k = chart_of(&fx.base, &jt)?;
                    for (op, dir) in k.k().ops().iter().zip(a.ops()) {
                        worst = worst.max(op.dist_max(&mat_tanh_half(dir, t)?));
                    }
                }
                Ok(worst)
            })();
            consistency.push("grid", dim, seed, r);
        }
    }
    vec![
        equation.finish(cfg, &cfg.dims),
        consistency.finish(cfg, &cfg.dims),
    ]
}

/// Hermitian property of the metric, `Ω = (**J**·, ·)` in ambient and chart
/// form, chart/ambient agreement of metric and form, and metric
/// compatibility of the connection.
///
/// The compatibility check steps the chart point, so it uses the tighter
/// curvature bound, and runs for `2n ≥ 4` only: in dimension 2 the metric
/// along a ray is `8/(1-k²)²` per unit weight and its third derivative
/// swamps a 1e-6 budget at `h = 1e-4`.
pub fn check_metric_structure(cfg: &SuiteConfig) -> Vec<CheckReport> {
    let h = cfg.h;
    let tol = &cfg.tolerances;
    let mut hermitian = Cases::new("metric_hermitian", tol.hermitian);
    let mut omega = Cases::new("metric_omega_compat", tol.omega_compat);
    let mut inner_agree = Cases::new("metric_chart_ambient_inner", tol.chart_ambient);
    let mut omega_agree = Cases::new("metric_chart_ambient_omega", tol.chart_ambient);
    let mut connection = Cases::new("metric_connection_compat", tol.connection).with_step(h);
    for &dim in &cfg.dims {
        let mut seeds = case_seeds(cfg, "metric", dim);
        for _ in 0..cfg.trials {
            let seed = seeds.random();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let setup = (|| -> Result<_> {
                let fx = Fixture::new(&mut rng, dim, cfg.points)?;
                let c = fx.chart(&mut rng, cfg.chart_bound)?;
                let a = fx.tangent(&mut rng, TangentKind::Mixed, 1.0)?;
                let b = fx.tangent(&mut rng, TangentKind::Mixed, 1.0)?;
                let cc = fx.tangent(&mut rng, TangentKind::Mixed, 1.0)?;
                let stepped = fx.chart(&mut rng, cfg.curvature_bound)?;
                Ok((c, a, b, cc, stepped))
            })();
            let (c, a, b, cc, stepped) = match setup {
                Ok(v) => v,
                Err(e) => {
                    hermitian.push("random", dim, seed, Err(e));
                    continue;
                }
            };
            let jk = Arc::new(c.acs());

            // ambient identities at J_K on tangents drawn there
            let r = (|| -> Result<(f64, f64)> {
                let x = random_tangent(&mut rng, &jk, TangentKind::Mixed, 1.0)?;
                let y = random_tangent(&mut rng, &jk, TangentKind::Mixed, 1.0)?;
                let jx = acs_on_tangent(&x, &jk)?;
                let jy = acs_on_tangent(&y, &jk)?;
                let herm = (ambient_inner(&jk, &jx, &jy)? - ambient_inner(&jk, &x, &y)?).abs();
                let om = (ambient_omega(&jk, &x, &y)? - ambient_inner(&jk, &jx, &y)?).abs();
                let anti = (ambient_omega(&jk, &x, &y)? + ambient_omega(&jk, &y, &x)?).abs();
                Ok((herm, om.max(anti)))
            })();
            hermitian.push("ambient", dim, seed, r.clone().map(|v| v.0));
            omega.push("ambient", dim, seed, r.map(|v| v.1));

            let r = (|| -> Result<f64> {
                let aj = acs_on_tangent(&a, c.base())?;
                Ok((chart_omega(&c, &a, &b)? - chart_inner(&c, &aj, &b)?).abs())
            })();
            omega.push("chart", dim, seed, r);

            let r = (|| -> Result<(f64, f64)> {
                let a_star = c.pushforward(&a, &jk)?;
                let b_star = c.pushforward(&b, &jk)?;
                let di = (chart_inner(&c, &a, &b)? - ambient_inner(&jk, &a_star, &b_star)?).abs();
                let dw = (chart_omega(&c, &a, &b)? - ambient_omega(&jk, &a_star, &b_star)?).abs();
                Ok((di, dw))
            })();
            inner_agree.push("random", dim, seed, r.clone().map(|v| v.0));
            omega_agree.push("random", dim, seed, r.map(|v| v.1));

            if dim < 4 {
                continue;
            }
            let r = (|| -> Result<f64> {
                let c = &stepped;
                let lhs = fd_directional(|p| chart_inner(p, &b, &cc), c, &a, h)?;
                let rhs = chart_inner(c, &christoffel(c, &a, &b)?, &cc)?
                    + chart_inner(c, &b, &christoffel(c, &a, &cc)?)?;
                Ok((lhs - rhs).abs())
            })();
            connection.push("random", dim, seed, r);
        }
    }
    let multi: Vec<usize> = cfg.dims.iter().copied().filter(|d| *d >= 4).collect();
    let mut out = vec![
        hermitian.finish(cfg, &cfg.dims),
        omega.finish(cfg, &cfg.dims),
        inner_agree.finish(cfg, &cfg.dims),
        omega_agree.finish(cfg, &cfg.dims),
    ];
    if !multi.is_empty() {
        out.push(connection.finish(cfg, &multi));
    }
    out
}

/// Orthonormal (Frobenius) basis of the anticommuting endomorphisms of one
/// fiber with the requested g-symmetry.
pub fn tangent_basis(
    j0: &FiberMatrix,
    g: &crate::fiber::FiberMetric,
    kind: TangentKind,
) -> Vec<FiberMatrix> {
    let dim = j0.dim();
    let mut basis: Vec<FiberMatrix> = Vec::new();
    for r in 0..dim {
        for s in 0..dim {
            let mut e = DMatrix::zeros(dim, dim);
            e[(r, s)] = 1.0;
            let p = anticommute_project(&FiberMatrix::from_raw(e), j0);
            let mut v = match kind {
                TangentKind::Mixed => p,
                TangentKind::Symmetric => (&p + g_adjoint(&p, g)).scaled(0.5),
                TangentKind::Antisymmetric => (&p - g_adjoint(&p, g)).scaled(0.5),
            };
            for u in &basis {
                let c = crate::fiber::trace_product(&u.transpose(), &v);
                v = &v - u.scaled(c);
            }
            let norm = v.frobenius_norm();
            if norm > 1e-10 {
                basis.push(v.scaled(1.0 / norm));
            }
        }
    }
    basis
}

/// Extreme eigenvalues of the Gram matrix of `chart_inner` at `c`, over the
/// basis `{E ⊗ δ_p}` of per-point basis elements. The Gram matrix is block
/// diagonal because the integrand is pointwise.
pub fn gram_extremes(c: &ChartField, per_point: &[Vec<FiberMatrix>]) -> Result<Option<(f64, f64)>> {
    let base = c.base().clone();
    let space = c.space().clone();
    let mut extremes: Option<(f64, f64)> = None;
    for (p, basis) in per_point.iter().enumerate() {
        if basis.is_empty() {
            continue;
        }
        let lift = |m: &FiberMatrix| {
            let mut ops = vec![FiberMatrix::zeros(space.dim()); space.len()];
            ops[p] = m.clone();
            TangentField::new(base.clone(), ops)
        };
        let fields = basis.iter().map(lift).collect::<Result<Vec<_>>>()?;
        let n = fields.len();
        let mut gram = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let v = chart_inner(c, &fields[a], &fields[b])?;
                gram[(a, b)] = v;
                gram[(b, a)] = v;
            }
        }
        let eig = SymmetricEigen::new(gram).eigenvalues;
        let lo = eig.iter().fold(f64::INFINITY, |x, y| x.min(*y));
        let hi = eig.iter().fold(f64::NEG_INFINITY, |x, y| x.max(*y));
        extremes = Some(match extremes {
            None => (lo, hi),
            Some((l, h)) => (l.min(lo), h.max(hi)),
        });
    }
    Ok(extremes)
}

/// Signature of the metric: positive-definite on g₀-symmetric tangents,
/// negative-definite on g₀-skew tangents, indefinite on the whole tangent
/// space. Evaluated at the chart center and at a random chart point of the
/// matching class. In real dimension 2 the skew part is `{0}` and only the
/// symmetric condition applies.
pub fn check_signature(cfg: &SuiteConfig) -> Vec<CheckReport> {
    let thr = cfg.tolerances.signature;
    let mut sym = Cases::new("signature_symmetric", -thr);
    let mut anti = Cases::new("signature_antisymmetric", -thr);
    let mut indefinite = Cases::new("signature_indefinite", -thr);
    let mut counts = Cases::new("signature_dimensions", 0.0);
    for &dim in &cfg.dims {
        let mut seeds = case_seeds(cfg, "signature", dim);
        let n = dim / 2;
        let seed = seeds.random();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fx = match Fixture::new(&mut rng, dim, cfg.points) {
            Ok(fx) => fx,
            Err(e) => {
                counts.push("fixture", dim, seed, Err(e));
                continue;
            }
        };
        let bases = |kind| -> Vec<Vec<FiberMatrix>> {
            (0..fx.space().len())
                .map(|p| tangent_basis(fx.base.op(p), fx.space().metric(p), kind))
                .collect()
        };
        let s_basis = bases(TangentKind::Symmetric);
        let a_basis = bases(TangentKind::Antisymmetric);
        let m_basis = bases(TangentKind::Mixed);
        let count_error = s_basis
            .iter()
            .zip(&a_basis)
            .zip(&m_basis)
            .map(|((s, a), m)| {
                s.len().abs_diff(n * n + n)
                    + a.len().abs_diff(n * n - n)
                    + m.len().abs_diff(2 * n * n)
            })
            .sum::<usize>();
        counts.push(
            format!(
                "dim End_S = {}, dim End_A = {} per point",
                n * n + n,
                n * n - n
            ),
            dim,
            seed,
            Ok(count_error as f64),
        );

        let origin = ChartField::origin(fx.base.clone());
        let off_sym = fx
            .tangent(&mut rng, TangentKind::Symmetric, cfg.curvature_bound)
            .and_then(ChartField::new);
        let off_anti = fx
            .tangent(&mut rng, TangentKind::Antisymmetric, cfg.curvature_bound)
            .and_then(ChartField::new);

        for (label, chart) in [("origin", Ok(origin.clone())), ("symmetric K", off_sym)] {
            let r = chart.and_then(|c| gram_extremes(&c, &s_basis));
            sym.push(
                label,
                dim,
                seed,
                r.map(|e| e.map_or(f64::INFINITY, |(lo, _)| -lo)),
            );
        }
        if n >= 2 {
            for (label, chart) in [("origin", Ok(origin.clone())), ("skew K", off_anti)] {
                let r = chart.and_then(|c| gram_extremes(&c, &a_basis));
                anti.push(
                    label,
                    dim,
                    seed,
                    r.map(|e| e.map_or(f64::INFINITY, |(_, hi)| hi)),
                );
            }
            let r = gram_extremes(&origin, &m_basis);
            indefinite.push(
                "origin",
                dim,
                seed,
                r.map(|e| e.map_or(f64::INFINITY, |(lo, hi)| lo.max(-hi))),
            );
        }
    }
    let multi: Vec<usize> = cfg.dims.iter().copied().filter(|d| *d >= 4).collect();
    let mut out = vec![sym.finish(cfg, &cfg.dims), counts.finish(cfg, &cfg.dims)];
    if !multi.is_empty() {
        out.push(anti.finish(cfg, &multi));
        out.push(indefinite.finish(cfg, &multi));
    }
    out
}

/// Geodesics starting in the positive associated structures (g₀-symmetric
/// directions) stay associated; geodesics starting in the orthogonal
/// structures (g₀-skew directions) stay orthogonal with the same orientation.
pub fn check_totally_geodesic(cfg: &SuiteConfig) -> Vec<CheckReport> {
    let tol = &cfg.tolerances;
    let mut compat = Cases::new("theorem4_compatibility", tol.associated);
    let mut positive = Cases::new("theorem4_positivity", -crate::structures::POSITIVITY_TOL);
    let mut ortho = Cases::new("theorem5_orthogonality", tol.orthogonal);
    let mut orient = Cases::new("theorem5_orientation", 0.0);
    for &dim in &cfg.dims {
        let mut seeds = case_seeds(cfg, "totally_geodesic", dim);
        for _ in 0..cfg.trials {
            let seed = seeds.random();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let fx = match Fixture::new(&mut rng, dim, cfg.points) {
                Ok(fx) => fx,
                Err(e) => {
                    compat.push("fixture", dim, seed, Err(e));
                    continue;
                }
            };
            let w = SymplecticField::standard(fx.space().clone());
            let g0 = MetricField::base(fx.space().clone());

            let r = (|| -> Result<(f64, f64)> {
                let a = fx.tangent(&mut rng, TangentKind::Symmetric, cfg.chart_bound)?;
                let (mut c, mut p) = (0.0_f64, f64::NEG_INFINITY);
                for &t in &cfg.t_grid {
                    let jt = geodesic_ambient(&fx.base, &a, t)?;
                    let rep = validate_associated_with_tol(&jt, &w, &[], tol.associated)?;
                    c = c.max(rep.compatibility_residual);
                    p = p.max(-rep.min_eigenvalue);
                }
                Ok((c, p))
            })();
            compat.push("symmetric", dim, seed, r.clone().map(|v| v.0));
            positive.push("symmetric", dim, seed, r.map(|v| v.1));

            let r = (|| -> Result<(f64, f64)> {
                let a = fx.tangent(&mut rng, TangentKind::Antisymmetric, cfg.chart_bound)?;
                let (mut o, mut flips) = (0.0_f64, 0.0);
                for &t in &cfg.t_grid {
                    let jt = geodesic_ambient(&fx.base, &a, t)?;
                    let rep = validate_orthogonal_with_tol(&jt, &g0, &fx.base, tol.orthogonal)?;
                    o = o.max(rep.orthogonality_residual);
                    if !rep.orientation_matches {
                        flips += 1.0;
                    }
                }
                Ok((o, flips))
            })();
            let label = if dim == 2 {
                "skew (zero in dim 2)"
            } else {
                "skew"
            };
            ortho.push(label, dim, seed, r.clone().map(|v| v.0));
            orient.push(label, dim, seed, r.map(|v| v.1));
        }
    }
    vec![
        compat.finish(cfg, &cfg.dims),
        positive.finish(cfg, &cfg.dims),
        ortho.finish(cfg, &cfg.dims),
        orient.finish(cfg, &cfg.dims),
    ]
}

/// In real dimension 2 every anticommuting endomorphism is g₀-symmetric, so
/// the skew part of the split is exactly zero.
pub fn check_degeneracy(cfg: &SuiteConfig) -> CheckReport {
    let mut cases = Cases::new("dim2_antisymmetric_zero", 0.0);
    let mut seeds = case_seeds(cfg, "degeneracy", 2);
    for _ in 0..cfg.trials {
        let seed = seeds.random();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = (|| -> Result<f64> {
            let fx = Fixture::new(&mut rng, 2, cfg.points)?;
            let k = fx.tangent(&mut rng, TangentKind::Mixed, cfg.chart_bound)?;
            let (_, l) = sym_antisym_split(&k, &MetricField::base(fx.space().clone()))?;
            Ok(sum_abs_max(l.ops()))
        })();
        cases.push("random", 2, seed, r);
    }
    cases.finish(cfg, &[2])
}

/// `J² = -Id` of a user-supplied field.
pub fn check_input_field(cfg: &SuiteConfig, raw: &RawFields) -> CheckReport {
    let mut cases = Cases::new("input_acs", cfg.tolerances.acs);
    let dim = raw.space.dim();
    match validate_acs(&raw.space, &raw.j) {
        Ok(rep) => {
            for (id, r) in raw.space.ids().iter().zip(&rep.residuals) {
                cases.push(format!("point {id}"), dim, cfg.seed, Ok(*r));
            }
        }
        Err(e) => cases.push("input", dim, cfg.seed, Err(e)),
    }
    cases.finish(cfg, &[dim])
}

/// Runs every checker and merges the reports by name.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    type Checker = fn(&SuiteConfig) -> Vec<CheckReport>;
    let checkers: [Checker; 8] = [
        check_chart_bijection,
        |c| vec![check_theorem1(c)],
        check_theorem2,
        check_curvature_fd,
        check_geodesics,
        check_metric_structure,
        check_signature,
        check_totally_geodesic,
    ];
    let mut reports: Vec<CheckReport> = std::thread::scope(|s| {
        let handles: Vec<_> = checkers.iter().map(|f| s.spawn(move || f(cfg))).collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("checker panicked"))
            .collect()
    });
    reports.push(check_degeneracy(cfg));
    if let Some(raw) = &cfg.input {
        reports.push(check_input_field(cfg, raw));
    }
    reports.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(SuiteReport {
        passed: reports.iter().all(|r| r.passed),
        seed: cfg.seed,
        trials: cfg.trials,
        points: cfg.points,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> SuiteConfig {
        SuiteConfig {
            trials: 3,
            dims: vec![2, 4],
            points: 3,
            ..SuiteConfig::default()
        }
    }

    fn base(dim: usize) -> Arc<AcsField> {
        Arc::new(AcsField::standard(Arc::new(
            SampleSpace::uniform(dim, 2).unwrap(),
        )))
    }

    #[test]
    fn fd_of_linear_function_is_exact() {
        let b = base(4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dir = random_tangent(&mut rng, &b, TangentKind::Mixed, 0.5).unwrap();
        let probe = random_tangent(&mut rng, &b, TangentKind::Mixed, 0.5).unwrap();
        let c = ChartField::new(random_tangent(&mut rng, &b, TangentKind::Mixed, 0.3).unwrap())
            .unwrap();
        // f(K) = Σ w tr(K P) is linear in K
        let f = |p: &ChartField| ambient_inner(&b, p.k(), &probe);
        let d = fd_directional(f, &c, &dir, 1e-3).unwrap();
        let exact = ambient_inner(&b, &dir, &probe).unwrap();
        assert!((d - exact).abs() < 1e-12);
    }

    #[test]
    fn fd_of_metric_at_origin_vanishes() {
        let b = base(4);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_tangent(&mut rng, &b, TangentKind::Mixed, 0.9).unwrap();
        let bb = random_tangent(&mut rng, &b, TangentKind::Mixed, 0.9).unwrap();
        let origin = ChartField::origin(b.clone());
        let d = fd_directional(|p| chart_inner(p, &bb, &bb), &origin, &a, 1e-4).unwrap();
        assert!(d.abs() < 1e-6);
        let d = fd_directional(|p| chart_omega(p, &a, &bb), &origin, &a, 1e-4).unwrap();
        assert!(d.abs() < 1e-6);
    }

    #[test]
    fn fd_refuses_steps_out_of_chart() {
        let b = base(2);
        let k = TangentField::new(
            b.clone(),
            vec![FiberMatrix::diagonal(&[0.5, -0.5]).unwrap(); 2],
        )
        .unwrap();
        let c = ChartField::new(k.clone()).unwrap();
        let r = fd_directional(|p| chart_inner(p, &k, &k), &c, &k, 1.0);
        assert!(matches!(r, Err(GeometryError::SingularOperator { .. })));
    }

    #[test]
    fn zero_direction_gives_zero_domega_term() {
        let b = base(4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a1 = random_tangent(&mut rng, &b, TangentKind::Mixed, 0.9).unwrap();
        let a2 = random_tangent(&mut rng, &b, TangentKind::Mixed, 0.9).unwrap();
        let zero = TangentField::zero(b.clone());
        let origin = ChartField::origin(b);
        let t = domega_terms(&origin, [&zero, &a1, &a2], 1e-4).unwrap();
        assert_eq!(t[0], 0.0);
    }

    #[test]
    fn scalar_geodesic_satisfies_tanh_ode() {
        // k = tanh(ta/2): k'' = -(a²/2) k (1 - k²) = -Γ(k', k')
        let b = base(2);
        let a = 1.3;
        let dir = TangentField::new(b, vec![FiberMatrix::diagonal(&[a, -a]).unwrap(); 2]).unwrap();
        for t in [0.0, 0.2, 0.6, 1.0] {
            assert!(geodesic_equation_residual(&dir, t, 1e-4).unwrap() < 1e-6);
        }
        let k: f64 = (0.6 * a / 2.0).tanh();
        let kp = a / 2.0 * (1.0 - k * k);
        let kpp = -(a * a / 2.0) * k * (1.0 - k * k);
        assert!((kpp + 2.0 * kp * kp * k / (1.0 - k * k)).abs() < 1e-14);
    }

    #[test]
    fn basis_dimensions() {
        for dim in [2, 4, 6] {
            let n = dim / 2;
            let j0 = FiberMatrix::standard_complex(dim);
            let g = crate::fiber::FiberMetric::identity(dim);
            assert_eq!(
                tangent_basis(&j0, &g, TangentKind::Symmetric).len(),
                n * n + n
            );
            assert_eq!(
                tangent_basis(&j0, &g, TangentKind::Antisymmetric).len(),
                n * n - n
            );
            assert_eq!(tangent_basis(&j0, &g, TangentKind::Mixed).len(), 2 * n * n);
        }
    }

    #[test]
    fn config_errors() {
        let empty = SuiteConfig {
            dims: vec![],
            ..quick()
        };
        assert!(matches!(run_suite(&empty), Err(GeometryError::Config(_))));
        let odd = SuiteConfig {
            dims: vec![3],
            ..quick()
        };
        assert!(run_suite(&odd).is_err());
        let bad_h = SuiteConfig { h: 0.0, ..quick() };
        assert!(run_suite(&bad_h).is_err());
    }

    #[test]
    fn quick_suite_passes_and_is_deterministic() {
        let a = run_suite(&quick()).unwrap();
        for r in &a.reports {
            assert!(
                r.passed,
                "{} failed: {} > {}",
                r.name, r.max_residual, r.tolerance
            );
        }
        let b = run_suite(&quick()).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn corrupted_input_fails_with_point_id() {
        let doc = r#"{"dim": 2, "points": [
            {"id": 0, "weight": 1, "J": [[0, -1], [1, 0]]},
            {"id": 5, "weight": 1, "J": [[0, -1], [1, 0.01]]}]}"#;
        let raw = crate::format::FieldDocument::from_json(doc)
            .unwrap()
            .into_raw()
            .unwrap();
        let report = check_input_field(&quick(), &raw);
        assert!(!report.passed);
        let worst = report
            .details
            .iter()
            .max_by(|a, b| a.residual.total_cmp(&b.residual))
            .unwrap();
        assert_eq!(worst.label, "point 5");
    }
}
