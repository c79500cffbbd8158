//! Command-line frontend behind the `acs` binary.
//!
//! Settings are resolved with precedence flags > `--config` TOML file >
//! built-in defaults. Exit status is 0 when every check passes, 1 when a
//! check fails and 2 on usage, configuration, input or I/O errors.
//!
//! Output goes to `--out` when given, otherwise to standard output. When
//! `ACS_OUT_DIR` is set, relative `--out` paths are resolved against it and
//! a missing `--out` becomes `$ACS_OUT_DIR/<command>.<json|csv>`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::charts::acs_residual;
use crate::error::GeometryError;
use crate::format::{fmt17, FieldDocument, RawFields};
use crate::geometry::{
    curvature, geodesic_ambient, geodesic_chart, sectional_curvature, ChartField,
};
use crate::sampling::{random_space, random_tangent, stream, TangentKind};
use crate::structures::{
    sym_antisym_split, validate_associated_with_tol, validate_orthogonal_with_tol, AcsField,
    MetricField, SymplecticField, TangentField,
};
use crate::verify::{
    check_signature, fd_directional_field, geodesic_equation_residual, gram_extremes, run_suite,
    tangent_basis, uniform_grid, SuiteConfig, Tolerances,
};

/// Environment variable overriding the output directory.
pub const OUT_DIR_VAR: &str = "ACS_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "acs",
    version,
    about = "Geometry of the space of almost complex structures"
)]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Debug, Subcommand)]
enum CommandArgs {
    /// Run the verification suite and write the merged report.
    Verify(CommonArgs),
    /// Trace a geodesic on a time grid.
    Geodesic(CommonArgs),
    /// Closed-form curvature against finite differences on random triples.
    Curvature(CommonArgs),
    /// Split a supplied tangent field into symmetric and skew parts.
    Project(CommonArgs),
    /// Gram spectra of the metric on the symmetric, skew and full tangent spaces.
    Signature(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Report,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Verify,
    Geodesic,
    Curvature,
    Project,
    Signature,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Verify => "verify",
            Self::Geodesic => "geodesic",
            Self::Curvature => "curvature",
            Self::Project => "project",
            Self::Signature => "signature",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
struct CommonArgs {
    /// Real fiber dimension(s) 2n, comma separated.
    #[arg(long, value_delimiter = ',')]
    dim: Option<Vec<usize>>,
    /// Sample points per field.
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Random cases per dimension.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    t_steps: Option<usize>,
    /// Finite-difference step.
    #[arg(long)]
    h: Option<f64>,
    /// Field document (JSON) to load.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// TOML file with defaults for any of the above.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    tol: TolOverrides,
}

/// Per-check tolerance overrides; flags are `--tol-<name>`.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolOverrides {
    #[arg(long = "tol-chart-roundtrip")]
    pub chart_roundtrip: Option<f64>,
    #[arg(long = "tol-acs")]
    pub acs: Option<f64>,
    #[arg(long = "tol-theorem1")]
    pub theorem1: Option<f64>,
    #[arg(long = "tol-theorem2")]
    pub theorem2: Option<f64>,
    #[arg(long = "tol-curvature-fd")]
    pub curvature_fd: Option<f64>,
    #[arg(long = "tol-bianchi")]
    pub bianchi: Option<f64>,
    #[arg(long = "tol-curvature-origin")]
    pub curvature_origin: Option<f64>,
    #[arg(long = "tol-geodesic-fd")]
    pub geodesic_fd: Option<f64>,
    #[arg(long = "tol-chart-ambient")]
    pub chart_ambient: Option<f64>,
    #[arg(long = "tol-hermitian")]
    pub hermitian: Option<f64>,
    #[arg(long = "tol-omega-compat")]
    pub omega_compat: Option<f64>,
    #[arg(long = "tol-connection")]
    pub connection: Option<f64>,
    #[arg(long = "tol-associated")]
    pub associated: Option<f64>,
    #[arg(long = "tol-orthogonal")]
    pub orthogonal: Option<f64>,
    #[arg(long = "tol-signature")]
    pub signature: Option<f64>,
}

macro_rules! tol_fields {
    ($m:ident) => {
        $m!(
            chart_roundtrip,
            acs,
            theorem1,
            theorem2,
            curvature_fd,
            bianchi,
            curvature_origin,
            geodesic_fd,
            chart_ambient,
            hermitian,
            omega_compat,
            connection,
            associated,
            orthogonal,
            signature
        )
    };
}

impl TolOverrides {
    fn or(self, lower: TolOverrides) -> TolOverrides {
        macro_rules! merge {
            ($($f:ident),*) => { TolOverrides { $($f: self.$f.or(lower.$f)),* } };
        }
        tol_fields!(merge)
    }

    fn apply(&self, t: &mut Tolerances) {
        macro_rules! set {
            ($($f:ident),*) => {{ $(if let Some(v) = self.$f { t.$f = v; })* }};
        }
        tol_fields!(set)
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(usize),
    Many(Vec<usize>),
}

/// Contents of a `--config` file. Keys mirror the long flags with `_` for
/// `-`; tolerances live in a `[tolerances]` table.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    dim: Option<OneOrMany>,
    points: Option<usize>,
    seed: Option<u64>,
    trials: Option<usize>,
    t_max: Option<f64>,
    t_steps: Option<usize>,
    h: Option<f64>,
    #[serde(rename = "in")]
    input: Option<PathBuf>,
    out: Option<PathBuf>,
    format: Option<OutputFormat>,
    #[serde(default)]
    tolerances: TolOverrides,
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub dims: Vec<usize>,
    pub points: usize,
    pub seed: u64,
    pub trials: usize,
    pub t_max: f64,
    pub t_steps: usize,
    pub h: f64,
    pub tolerances: Tolerances,
    pub input_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        let suite = SuiteConfig::default();
        Self {
            command,
            dims: vec![4],
            points: suite.points,
            seed: suite.seed,
            trials: suite.trials,
            t_max: 2.0,
            t_steps: 8,
            h: suite.h,
            tolerances: Tolerances::default(),
            input_path: None,
            output_path: None,
            format: match command {
                Command::Verify => OutputFormat::Report,
                _ => OutputFormat::Csv,
            },
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.dims.is_empty() {
            return bad("--dim needs at least one value".into());
        }
        if let Some(d) = self.dims.iter().find(|d| **d < 2 || **d % 2 != 0) {
            return bad(format!("--dim {d}: dimension must be even and >= 2"));
        }
        if self.points == 0 {
            return bad("--points must be >= 1".into());
        }
        if self.trials == 0 {
            return bad("--trials must be >= 1".into());
        }
        if self.t_steps == 0 {
            return bad("--t-steps must be >= 1".into());
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad(format!("--h {}: step must be positive", self.h));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return bad(format!("--t-max {}: must be finite and >= 0", self.t_max));
        }
        Ok(())
    }

    pub fn t_grid(&self) -> Vec<f64> {
        uniform_grid(self.t_max, self.t_steps)
    }

    pub fn suite_config(&self) -> SuiteConfig {
        SuiteConfig {
            seed: self.seed,
            trials: self.trials,
            dims: self.dims.clone(),
            points: self.points,
            h: self.h,
            t_grid: self.t_grid(),
            tolerances: self.tolerances.clone(),
            ..SuiteConfig::default()
        }
    }

    fn load_input(&self) -> Result<Option<RawFields>, CliError> {
        let Some(path) = &self.input_path else {
            return Ok(None);
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let raw = FieldDocument::from_json(&text)
            .and_then(FieldDocument::into_raw)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Ok(Some(raw))
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Input(String),
    Geometry(GeometryError),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(m) => write!(f, "configuration error: {m}"),
            Self::Io(m) => write!(f, "I/O error: {m}"),
            Self::Input(m) => write!(f, "invalid input: {m}"),
            Self::Geometry(e) => write!(f, "{e}"),
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::Config(m) => Self::Config(m),
            e => Self::Geometry(e),
        }
    }
}

/// Rendered command output before it is written.
pub struct Output {
    pub text: String,
    pub extension: &'static str,
    pub passed: bool,
}

// ---------------------------------------------------------------------------
// Tables

#[derive(Debug, Clone)]
enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

struct Table {
    headers: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(headers: &[&'static str]) -> Self {
        Self {
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    fn csv(&self) -> String {
        let mut s = self.headers.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(x) => fmt17(*x),
                    Cell::Int(i) => i.to_string(),
                    Cell::Text(t) => t.clone(),
                })
                .collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    fn json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (h, c) in self.headers.iter().zip(row) {
                    let v = match c {
                        Cell::Num(x) => {
                            serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number)
                        }
                        Cell::Int(i) => Value::from(*i),
                        Cell::Text(t) => Value::from(t.clone()),
                    };
                    m.insert((*h).to_string(), v);
                }
                Value::Object(m)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("tables serialize");
        s.push('\n');
        s
    }

    fn render(&self, format: OutputFormat, passed: bool) -> Output {
        match format {
            OutputFormat::Csv => Output {
                text: self.csv(),
                extension: "csv",
                passed,
            },
            OutputFormat::Report => Output {
                text: self.json(),
                extension: "json",
                passed,
            },
        }
    }
}

fn flag(b: bool) -> Cell {
    Cell::Int(u64::from(b))
}

// ---------------------------------------------------------------------------
// Commands

/// Runs the verification suite. Passes iff every check passes.
pub fn cmd_verify(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut suite = cfg.suite_config();
    suite.input = cfg.load_input()?;
    if let Some(raw) = &suite.input {
        // a field that is not almost complex is an input error, not a failed check
        raw.acs().map_err(|e| CliError::Input(e.to_string()))?;
    }
    let report = run_suite(&suite)?;
    Ok(match cfg.format {
        OutputFormat::Report => {
            let mut text = report.to_json();
            text.push('\n');
            Output {
                text,
                extension: "json",
                passed: report.passed,
            }
        }
        OutputFormat::Csv => {
            let mut t = Table::new(&["check", "passed", "max_residual", "tolerance", "cases"]);
            for r in &report.reports {
                t.push(vec![
                    Cell::Text(r.name.clone()),
                    flag(r.passed),
                    Cell::Num(r.max_residual),
                    Cell::Num(r.tolerance),
                    Cell::Int(r.details.len() as u64),
                ]);
            }
            t.render(OutputFormat::Csv, report.passed)
        }
    })
}

struct GeodesicSetup {
    base: Arc<AcsField>,
    direction: TangentField,
    w: SymplecticField,
}

fn geodesic_setup(cfg: &RunConfig) -> Result<GeodesicSetup, CliError> {
    if let Some(raw) = cfg.load_input()? {
        let base = Arc::new(raw.acs()?);
        let direction = raw.tangent(base.clone())?.ok_or_else(|| {
            CliError::Input("geodesic input needs a `K` direction at every point".into())
        })?;
        let w = match raw.symplectic()? {
            Some(w) => w,
            None => SymplecticField::standard(raw.space.clone()),
        };
        return Ok(GeodesicSetup { base, direction, w });
    }
    let mut rng = stream(cfg.seed, "cli_geodesic");
    let space = Arc::new(random_space(&mut rng, cfg.dims[0], cfg.points)?);
    let base = Arc::new(AcsField::standard(space.clone()));
    let direction = random_tangent(
        &mut rng,
        &base,
        TangentKind::Mixed,
        SuiteConfig::default().chart_bound,
    )?;
    Ok(GeodesicSetup {
        base,
        direction,
        w: SymplecticField::standard(space),
    })
}

/// Traces `K(t) = tanh(t/2·A)` and `J_t = J₀e^{tA}` on the grid. Without
/// `--in` the direction is random at the standard structure of `--dim`.
pub fn cmd_geodesic(cfg: &RunConfig) -> Result<Output, CliError> {
    let GeodesicSetup { base, direction, w } = geodesic_setup(cfg)?;
    let g0 = MetricField::base(base.space().clone());
    let tol = &cfg.tolerances;
    let mut table = Table::new(&[
        "t",
        "k_norm",
        "acs_residual",
        "geodesic_residual",
        "associated",
        "orthogonal",
    ]);
    let mut passed = true;
    for t in cfg.t_grid() {
        let k = geodesic_chart(&direction, t)?;
        let k_norm = k
            .ops()
            .iter()
            .map(|op| op.spectral_norm())
            .fold(0.0, f64::max);
        let jt = geodesic_ambient(&base, &direction, t)?;
        let acs = jt.ops().iter().map(acs_residual).fold(0.0, f64::max);
        let residual = geodesic_equation_residual(&direction, t, cfg.h)?;
        let assoc = validate_associated_with_tol(&jt, &w, &[], tol.associated)?.passed;
        let ortho = validate_orthogonal_with_tol(&jt, &g0, &base, tol.orthogonal)?.passed;
        passed &= residual <= tol.geodesic_fd && acs <= tol.acs;
        table.push(vec![
            Cell::Num(t),
            Cell::Num(k_norm),
            Cell::Num(acs),
            Cell::Num(residual),
            flag(assoc),
            flag(ortho),
        ]);
    }
    Ok(table.render(cfg.format, passed))
}

/// Random triples at random chart points (or at the input's `K`), with the
/// finite-difference residual of the curvature and its Bianchi sum.
pub fn cmd_curvature(cfg: &RunConfig) -> Result<Output, CliError> {
    let input = cfg.load_input()?;
    let tol = &cfg.tolerances;
    let headers = [
        "dim",
        "case",
        "seed",
        "curvature_norm",
        "fd_residual",
        "bianchi_residual",
        "sectional",
    ];
    let mut table = Table::new(&headers);
    let mut passed = true;
    let mut seeds = stream(cfg.seed, "cli_curvature");
    let bound = SuiteConfig::default().curvature_bound;
    let dims = match &input {
        Some(raw) => vec![raw.space.dim()],
        None => cfg.dims.clone(),
    };
    for dim in dims {
        for case in 0..cfg.trials {
            let seed: u64 = seeds.random();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = match &input {
                Some(raw) => {
                    let base = Arc::new(raw.acs()?);
                    match raw.tangent(base.clone())? {
                        Some(k) => ChartField::new(k)?,
                        None => ChartField::origin(base),
                    }
                }
                None => {
                    let space = Arc::new(random_space(&mut rng, dim, cfg.points)?);
                    let base = Arc::new(AcsField::standard(space));
                    ChartField::new(random_tangent(&mut rng, &base, TangentKind::Mixed, bound)?)?
                }
            };
            let base = c.base().clone();
            let a = random_tangent(&mut rng, &base, TangentKind::Mixed, 1.0)?;
            let b = random_tangent(&mut rng, &base, TangentKind::Mixed, 1.0)?;
            let cc = random_tangent(&mut rng, &base, TangentKind::Mixed, 1.0)?;
            let closed = curvature(&c, &a, &b, &cc)?;
            let nabla_nabla = |x: &TangentField, y: &TangentField| -> crate::Result<TangentField> {
                let d = fd_directional_field(
                    |p| crate::geometry::christoffel(p, y, &cc),
                    &c,
                    x,
                    cfg.h,
                )?;
                let inner = crate::geometry::christoffel(&c, y, &cc)?;
                d.add_scaled(&crate::geometry::christoffel(&c, x, &inner)?, 1.0)
            };
            let fd = nabla_nabla(&a, &b)?.add_scaled(&nabla_nabla(&b, &a)?, -1.0)?;
            let fd_residual = fd.dist_max(&closed);
            let bianchi = closed
                .add_scaled(&curvature(&c, &b, &cc, &a)?, 1.0)?
                .add_scaled(&curvature(&c, &cc, &a, &b)?, 1.0)?
                .max_abs();
            let sectional = match sectional_curvature(&c, &a, &b) {
                Ok(k) => k,
                Err(GeometryError::DegeneratePlane(_)) => f64::NAN,
                Err(e) => return Err(e.into()),
            };
            passed &= fd_residual <= tol.curvature_fd && bianchi <= tol.bianchi;
            table.push(vec![
                Cell::Int(dim as u64),
                Cell::Int(case as u64),
                Cell::Int(seed),
                Cell::Num(closed.max_abs()),
                Cell::Num(fd_residual),
                Cell::Num(bianchi),
                Cell::Num(sectional),
            ]);
        }
    }
    Ok(table.render(cfg.format, passed))
}

/// Per-point norms of the symmetric and skew parts of the input's `K`.
pub fn cmd_project(cfg: &RunConfig) -> Result<Output, CliError> {
    let raw = cfg
        .load_input()?
        .ok_or_else(|| CliError::Config("project needs --in <field document>".into()))?;
    let base = Arc::new(raw.acs()?);
    let k = raw
        .tangent(base)?
        .ok_or_else(|| CliError::Input("project input needs `K` at every point".into()))?;
    let g = MetricField::base(raw.space.clone());
    let (p, l) = sym_antisym_split(&k, &g)?;
    let mut table = Table::new(&["id", "p_norm", "l_norm", "class"]);
    for i in 0..k.len() {
        let class = crate::structures::classify_op(k.op(i), g.metric(i));
        table.push(vec![
            Cell::Int(raw.space.ids()[i]),
            Cell::Num(p.op(i).frobenius_norm()),
            Cell::Num(l.op(i).frobenius_norm()),
            Cell::Text(class.as_str().to_string()),
        ]);
    }
    Ok(table.render(cfg.format, true))
}

/// Gram spectra of the metric at the chart center for each dimension.
pub fn cmd_signature(cfg: &RunConfig) -> Result<Output, CliError> {
    let suite = cfg.suite_config();
    if cfg.format == OutputFormat::Report {
        let reports = check_signature(&suite);
        let passed = reports.iter().all(|r| r.passed);
        let mut text = serde_json::to_string_pretty(&reports).expect("reports serialize");
        text.push('\n');
        return Ok(Output {
            text,
            extension: "json",
            passed,
        });
    }
    let thr = cfg.tolerances.signature;
    let mut table = Table::new(&[
        "dim",
        "subspace",
        "basis_dim",
        "min_eigenvalue",
        "max_eigenvalue",
        "expected",
    ]);
    let mut passed = true;
    let mut rng = stream(cfg.seed, "cli_signature");
    for &dim in &cfg.dims {
        let space = Arc::new(random_space(&mut rng, dim, cfg.points)?);
        let base = Arc::new(AcsField::standard(space.clone()));
        let origin = ChartField::origin(base.clone());
        for (kind, name) in [
            (TangentKind::Symmetric, "symmetric"),
            (TangentKind::Antisymmetric, "antisymmetric"),
            (TangentKind::Mixed, "full"),
        ] {
            let bases: Vec<_> = (0..space.len())
                .map(|p| tangent_basis(base.op(p), space.metric(p), kind))
                .collect();
            let basis_dim: usize = bases.iter().map(Vec::len).sum();
            let (lo, hi) = gram_extremes(&origin, &bases)?.unwrap_or((f64::NAN, f64::NAN));
            let (expected, ok) = match kind {
                TangentKind::Symmetric => ("positive", lo > thr),
                TangentKind::Antisymmetric if basis_dim == 0 => ("empty", true),
                TangentKind::Antisymmetric => ("negative", hi < -thr),
                TangentKind::Mixed if dim == 2 => ("positive", lo > thr),
                TangentKind::Mixed => ("indefinite", lo < -thr && hi > thr),
            };
            passed &= ok;
            table.push(vec![
                Cell::Int(dim as u64),
                Cell::Text(name.into()),
                Cell::Int(basis_dim as u64),
                Cell::Num(lo),
                Cell::Num(hi),
                Cell::Text(expected.into()),
            ]);
        }
    }
    Ok(table.render(cfg.format, passed))
}

pub fn execute(cfg: &RunConfig) -> Result<Output, CliError> {
    cfg.validate()?;
    match cfg.command {
        Command::Verify => cmd_verify(cfg),
        Command::Geodesic => cmd_geodesic(cfg),
        Command::Curvature => cmd_curvature(cfg),
        Command::Project => cmd_project(cfg),
        Command::Signature => cmd_signature(cfg),
    }
}

// ---------------------------------------------------------------------------
// Entry points

fn resolve(command: Command, args: CommonArgs) -> Result<RunConfig, CliError> {
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            toml::from_str::<FileConfig>(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let mut cfg = RunConfig::new(command);
    let file_dims = file.dim.map(|d| match d {
        OneOrMany::One(d) => vec![d],
        OneOrMany::Many(d) => d,
    });
    if let Some(d) = args.dim.or(file_dims) {
        cfg.dims = d;
    }
    macro_rules! layer {
        ($($f:ident => $t:ident),*) => {
            $(if let Some(v) = args.$f.or(file.$f) { cfg.$t = v; })*
        };
    }
    layer!(points => points, seed => seed, trials => trials, t_max => t_max,
           t_steps => t_steps, h => h, format => format);
    cfg.input_path = args.input.or(file.input);
    cfg.output_path = args.out.or(file.out);
    args.tol.or(file.tolerances).apply(&mut cfg.tolerances);
    Ok(cfg)
}

/// Parses arguments into a resolved configuration.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let (command, common) = split(cli.command);
    resolve(command, common)
        .map_err(|e| clap::Error::raw(clap::error::ErrorKind::ValueValidation, e))
}

fn split(c: CommandArgs) -> (Command, CommonArgs) {
    match c {
        CommandArgs::Verify(a) => (Command::Verify, a),
        CommandArgs::Geodesic(a) => (Command::Geodesic, a),
        CommandArgs::Curvature(a) => (Command::Curvature, a),
        CommandArgs::Project(a) => (Command::Project, a),
        CommandArgs::Signature(a) => (Command::Signature, a),
    }
}

fn destination(cfg: &RunConfig, out_dir: Option<&Path>, ext: &str) -> Option<PathBuf> {
    match (&cfg.output_path, out_dir) {
        (Some(p), Some(dir)) if p.is_relative() => Some(dir.join(p)),
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => Some(dir.join(format!("{}.{ext}", cfg.command.name()))),
        (None, None) => None,
    }
}

/// Runs one invocation and returns its exit status. `out_dir` plays the role
/// of `ACS_OUT_DIR`.
pub fn run_with<I, T>(args: I, out_dir: Option<&Path>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (command, common) = split(cli.command);
    let result = resolve(command, common).and_then(|cfg| {
        let output = execute(&cfg)?;
        match destination(&cfg, out_dir, output.extension) {
            Some(path) => {
                if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                    fs::create_dir_all(parent)
                        .map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
                }
                fs::write(&path, &output.text)
                    .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                eprintln!("wrote {}", path.display());
            }
            None => {
                std::io::stdout()
                    .write_all(output.text.as_bytes())
                    .map_err(|e| CliError::Io(e.to_string()))?;
            }
        }
        Ok(output.passed)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("{}: check failed", command.name());
            1
        }
        Err(e) => {
            eprintln!("acs {}: {e}", command.name());
            2
        }
    }
}

/// [`run_with`] reading the output directory from `ACS_OUT_DIR`.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let dir = std::env::var_os(OUT_DIR_VAR).map(PathBuf::from);
    run_with(args, dir.as_deref())
}
