//! Acceptance criteria, one PASS/FAIL line each, at their pinned tolerances.
//!
//! Runs without the libtest harness so the lines are always visible; the
//! process exits non-zero if any criterion fails.

use std::process::ExitCode;

use almost_complex::cli;
use almost_complex::verify::{run_suite, CheckReport, SuiteConfig, SuiteReport, CONVERGENCE_RATIO};

struct Tally {
    failed: usize,
}

impl Tally {
    fn line(&mut self, id: &str, title: &str, outcome: Result<String, String>) {
        match outcome {
            Ok(msg) => println!("PASS  {id:<3} {title}: {msg}"),
            Err(msg) => {
                self.failed += 1;
                println!("FAIL  {id:<3} {title}: {msg}");
            }
        }
    }
}

/// Named report exists, passed, carries the pinned tolerance and covers `dims`.
fn require(suite: &SuiteReport, name: &str, tol: f64, dims: &[usize]) -> Result<String, String> {
    let r: &CheckReport = suite
        .report(name)
        .ok_or_else(|| format!("no report `{name}`"))?;
    if r.tolerance != tol {
        return Err(format!(
            "{name}: tolerance {:e}, pinned {tol:e}",
            r.tolerance
        ));
    }
    for d in dims {
        if !r.details.iter().any(|c| c.dim == *d) {
            return Err(format!("{name}: no case in dimension {d}"));
        }
    }
    if let Some(e) = r.details.iter().find_map(|c| c.error.as_ref()) {
        return Err(format!("{name}: case error: {e}"));
    }
    if !r.passed {
        return Err(format!(
            "{name}: max residual {:e} > {tol:e}",
            r.max_residual
        ));
    }
    Ok(format!("{name} {:.2e}", r.max_residual))
}

fn all(parts: impl IntoIterator<Item = Result<String, String>>) -> Result<String, String> {
    let mut ok = Vec::new();
    for p in parts {
        ok.push(p?);
    }
    Ok(ok.join(", "))
}

fn cases_per_dim(suite: &SuiteReport, name: &str, dim: usize) -> usize {
    suite
        .report(name)
        .map_or(0, |r| r.details.iter().filter(|c| c.dim == dim).count())
}

fn determinism() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for name in ["first.json", "second.json"] {
        let path = dir.path().join(name);
        let status = cli::run_with(["acs", "verify", "--out", path.to_str().unwrap()], None);
        if status != 0 {
            return Err(format!("verify exited with {status}"));
        }
        outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    if outputs[0] != outputs[1] {
        return Err("report files differ".into());
    }
    Ok(format!("{} identical bytes", outputs[0].len()))
}

fn main() -> ExitCode {
    let cfg = SuiteConfig {
        seed: 0,
        trials: 100,
        dims: vec![2, 4, 6],
        ..SuiteConfig::default()
    };
    let suite = match run_suite(&cfg) {
        Ok(s) => s,
        Err(e) => {
            println!("FAIL  suite configuration: {e}");
            return ExitCode::FAILURE;
        }
    };
    let d246 = [2, 4, 6];
    let mut t = Tally { failed: 0 };

    t.line(
        "1",
        "Cayley bijection",
        all([
            (cases_per_dim(&suite, "chart_roundtrip", 4) == 100)
                .then(|| "100 cases per dim".to_string())
                .ok_or_else(|| "expected 100 cases per dimension".to_string()),
            (cfg.chart_bound == 0.9)
                .then(|| "bound 0.9".to_string())
                .ok_or_else(|| "chart bound is not 0.9".to_string()),
            require(&suite, "chart_roundtrip", 1e-9, &d246),
            require(&suite, "chart_acs", 1e-10, &d246),
        ]),
    );
    t.line(
        "2",
        "complex-structure identity",
        require(&suite, "theorem1", 1e-9, &d246),
    );

    let ratio = suite
        .report("theorem2_convergence")
        .and_then(|r| r.details.last())
        .map(|c| c.label.clone())
        .unwrap_or_default();
    t.line(
        "3",
        "closedness of the fundamental form",
        all([
            (cfg.h == 1e-4)
                .then(|| "h 1e-4".to_string())
                .ok_or_else(|| "h is not 1e-4".to_string()),
            require(&suite, "theorem2_center", 1e-6, &d246),
            require(&suite, "theorem2_recentered", 1e-6, &d246),
            require(&suite, "theorem2_convergence", 0.0, &[]).map(|_| {
                format!(
                    "{ratio} within [{}, {}]",
                    CONVERGENCE_RATIO.0, CONVERGENCE_RATIO.1
                )
            }),
        ]),
    );
    t.line(
        "4",
        "curvature tensor",
        all([
            (cfg.curvature_bound == 0.5)
                .then(|| "bound 0.5".to_string())
                .ok_or_else(|| "curvature bound is not 0.5".to_string()),
            require(&suite, "curvature_fd", 1e-5, &[2, 4]),
            require(&suite, "curvature_antisymmetry", 0.0, &d246),
            require(&suite, "curvature_bianchi", 1e-10, &d246),
            require(&suite, "curvature_origin", 1e-12, &d246),
            require(&suite, "curvature_hand_case", 1e-12, &[2]),
        ]),
    );
    t.line(
        "5",
        "geodesics",
        all([
            (cfg.fd_times == [0.2, 0.6, 1.0])
                .then(|| "t in {0.2, 0.6, 1.0}".to_string())
                .ok_or_else(|| "fd times differ".to_string()),
            require(&suite, "geodesic_equation", 1e-6, &d246),
            require(&suite, "geodesic_chart_ambient", 1e-9, &d246),
        ]),
    );
    t.line(
        "6",
        "metric structure",
        all([
            require(&suite, "metric_hermitian", 1e-10, &d246),
            require(&suite, "metric_omega_compat", 1e-12, &d246),
            require(&suite, "metric_chart_ambient_inner", 1e-9, &d246),
            require(&suite, "metric_chart_ambient_omega", 1e-9, &d246),
            require(&suite, "metric_connection_compat", 1e-6, &[4]),
        ]),
    );
    t.line(
        "7",
        "signature",
        all([
            require(&suite, "signature_symmetric", -1e-10, &[4]),
            require(&suite, "signature_antisymmetric", -1e-10, &[4]),
            require(&suite, "signature_indefinite", -1e-10, &[4]),
            require(&suite, "signature_dimensions", 0.0, &d246),
        ]),
    );
    t.line(
        "8",
        "totally geodesic submanifolds",
        all([
            (cfg.t_grid.len() == 9 && cfg.t_grid[0] == 0.0 && cfg.t_grid[8] == 2.0)
                .then(|| "9-point grid on [0, 2]".to_string())
                .ok_or_else(|| "time grid is not 9 points on [0, 2]".to_string()),
            require(&suite, "theorem4_compatibility", 1e-9, &d246),
            require(&suite, "theorem4_positivity", -1e-12, &d246),
            require(&suite, "theorem5_orthogonality", 1e-10, &[4]),
            require(&suite, "theorem5_orientation", 0.0, &[4]),
        ]),
    );
    t.line(
        "9",
        "dimension-2 degeneracy",
        require(&suite, "dim2_antisymmetric_zero", 0.0, &[2]),
    );
    t.line("10", "byte-identical verify reports", determinism());

    println!(
        "{} of 10 criteria passed (suite overall: {})",
        10 - t.failed,
        if suite.passed { "pass" } else { "fail" }
    );
    if t.failed == 0 && suite.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
