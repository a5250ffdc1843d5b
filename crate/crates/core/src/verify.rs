//! The oracle suite behind `hessrad verify`: every check compares the pipeline with
//! a closed form or a structural property and reports the measured deviation.
//!
//! Tasks are listed in a fixed order and results are collected in that order, so
//! the rendered table is the same whether the tasks ran serially or in parallel.

use rayon::prelude::*;

use crate::asymptotics::{c0, mu, Tolerances};
use crate::error::Result;
use crate::operator::{Family, OperatorSpec};
use crate::oracles::{
    finite_diff, oracle_mu, oracle_threshold_constant, oracle_w, DiffOrder, SigmaKOracle,
};
use crate::profile::{g_eval, GProfile};
use crate::solution::{assemble_solution, residual_report, DEFAULT_POINTS, DEFAULT_R_OUT};
use crate::trajectory::shoot;

pub const C_STAR_TOL: f64 = 1e-12;
pub const G_ORACLE_TOL: f64 = 1e-10;
pub const G_SLOPE_TOL: f64 = 1e-6;
pub const TRAJECTORY_TOL: f64 = 1e-8;
pub const TAIL_SLOPE_TOL: f64 = 0.05;
pub const MU_TOL: f64 = 1e-7;
pub const THRESHOLD_TOL: f64 = 1e-6;
pub const RESIDUAL_TOL: f64 = 1e-8;
pub const DECAY_SLOPE_TOL: f64 = 0.1;
pub const C_ESTIMATE_TOL: f64 = 1e-5;

/// The σ_k operators with closed forms used by default.
pub const SIGMA_K_SET: [(usize, usize); 8] = [
    (3, 2),
    (3, 3),
    (4, 2),
    (4, 3),
    (4, 4),
    (5, 2),
    (5, 3),
    (5, 5),
];
/// Hessian quotients `(n, k, l)` checked structurally.
pub const QUOTIENT_SET: [(usize, usize, usize); 2] = [(4, 3, 1), (5, 4, 2)];

/// Number of log-spaced `γ` in `(1e−4, 10c*]` for the `g` oracle.
pub const G_SAMPLES: usize = 64;
/// Radii in `[1, 100]` for the trajectory oracle.
pub const R_SAMPLES: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub operator: String,
    pub check: &'static str,
    /// Parameter of the check (an `α`, say), empty when there is none.
    pub param: String,
    pub measured: f64,
    pub limit: f64,
    pub passed: bool,
    /// Error message when the computation itself failed.
    pub note: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    CStar,
    GOracle,
    GStructure,
    Trajectory,
    TailSlope,
    Mu,
    Threshold,
    Residual,
}

#[derive(Debug, Clone, Copy)]
struct Task {
    op: usize,
    kind: Kind,
    /// `α` in units of `c*` when `relative`, absolute otherwise.
    x: f64,
    relative: bool,
}

/// Checks for each operator: closed-form ones for σ_k, structural ones for all.
fn tasks_for(i: usize, op: &OperatorSpec) -> Vec<Task> {
    let t = |kind, x, relative| Task {
        op: i,
        kind,
        x,
        relative,
    };
    let mut v = vec![t(Kind::CStar, 0.0, false), t(Kind::GStructure, 0.0, false)];
    let sigma = op.family() == Family::SigmaK;
    if sigma {
        v.push(t(Kind::GOracle, 0.0, false));
        for (x, rel) in alpha_set() {
            v.push(t(Kind::Trajectory, x, rel));
        }
    }
    // c*/2 lies below γ₀ for the quotients
    let below = if sigma { 0.5 } else { 0.9 };
    for x in [below, 2.0] {
        v.push(t(Kind::TailSlope, x, true));
    }
    if op.n() >= 3 {
        if sigma {
            for (x, rel) in alpha_set() {
                v.push(t(Kind::Mu, x, rel));
            }
            v.push(t(Kind::Threshold, 0.0, false));
        }
        for x in [1.0, 2.0] {
            v.push(t(Kind::Residual, x, true));
        }
    }
    v
}

/// `{0.05, c*/2, c*, 2c*, 5}` as (value, relative-to-c*).
fn alpha_set() -> [(f64, bool); 5] {
    [
        (0.05, false),
        (0.5, true),
        (1.0, true),
        (2.0, true),
        (5.0, false),
    ]
}

/// Run the suite for `ops`, in parallel when asked.
pub fn run_suite(
    ops: &[OperatorSpec],
    tol: &Tolerances,
    parallel: bool,
) -> Result<Vec<CheckResult>> {
    tol.validate()?;
    let profiles: Vec<Result<GProfile>> = if parallel {
        ops.par_iter().map(|op| GProfile::build(*op, 64)).collect()
    } else {
        ops.iter().map(|op| GProfile::build(*op, 64)).collect()
    };
    let tasks: Vec<Task> = ops
        .iter()
        .enumerate()
        .flat_map(|(i, op)| tasks_for(i, op))
        .collect();
    let run = |task: &Task| run_task(task, &ops[task.op], &profiles[task.op], tol);
    Ok(if parallel {
        tasks.par_iter().map(run).collect()
    } else {
        tasks.iter().map(run).collect()
    })
}

/// The default operator set: [`SIGMA_K_SET`] followed by [`QUOTIENT_SET`].
pub fn default_operators() -> Vec<OperatorSpec> {
    SIGMA_K_SET
        .iter()
        .map(|&(n, k)| OperatorSpec::sigma_k(n, k))
        .chain(
            QUOTIENT_SET
                .iter()
                .map(|&(n, k, l)| OperatorSpec::hessian_quotient(n, k, l)),
        )
        .collect::<Result<_>>()
        .expect("valid built-in operators")
}

fn run_task(
    task: &Task,
    op: &OperatorSpec,
    profile: &Result<GProfile>,
    tol: &Tolerances,
) -> CheckResult {
    let (check, limit) = match task.kind {
        Kind::CStar => ("c_star", C_STAR_TOL),
        Kind::GOracle => ("g_oracle", G_ORACLE_TOL),
        Kind::GStructure => ("g_structure", G_SLOPE_TOL),
        Kind::Trajectory => ("trajectory_oracle", TRAJECTORY_TOL),
        Kind::TailSlope => ("tail_exponent", TAIL_SLOPE_TOL),
        Kind::Mu => ("mu_oracle", MU_TOL),
        Kind::Threshold => ("threshold", THRESHOLD_TOL),
        Kind::Residual => ("pde_residual", RESIDUAL_TOL),
    };
    let param = match task.kind {
        Kind::Trajectory | Kind::TailSlope | Kind::Mu | Kind::Residual if task.relative => {
            format!("alpha={}c*", task.x)
        }
        Kind::Trajectory | Kind::Mu => format!("alpha={}", task.x),
        Kind::Threshold => "b=0".into(),
        _ => String::new(),
    };
    let outcome = profile
        .as_ref()
        .map_err(|e| e.to_string())
        .and_then(|p| measure(task, op, p, tol).map_err(|e| e.to_string()));
    let (measured, passed, note) = match outcome {
        Ok((m, extra_ok)) => (m, extra_ok && m <= limit, String::new()),
        Err(e) => (f64::NAN, false, e),
    };
    CheckResult {
        operator: op.label(),
        check,
        param,
        measured,
        limit,
        passed,
        note,
    }
}

/// The measured deviation and whether side conditions of the check hold.
fn measure(task: &Task, op: &OperatorSpec, p: &GProfile, tol: &Tolerances) -> Result<(f64, bool)> {
    let c = p.c_star();
    let alpha = if task.relative { task.x * c } else { task.x };
    let n = op.n();
    match task.kind {
        Kind::CStar => Ok(((op.c_star_by_root()? - c).abs(), true)),
        Kind::GOracle => {
            let o = SigmaKOracle::new(n, op.k())?;
            let (lo, hi) = (1e-4f64, 10.0 * c);
            let mut worst: f64 = 0.0;
            for i in 1..=G_SAMPLES {
                let gamma = lo * (hi / lo).powf(i as f64 / G_SAMPLES as f64);
                let want = o.g(gamma);
                let got = g_eval(op, gamma)?;
                worst = worst.max((got - want).abs() / want.abs().max(1.0));
            }
            Ok((worst, true))
        }
        Kind::GStructure => {
            let structure = p.validate().is_ok();
            let h = 1e-5 * c.max(1.0);
            let slope = finite_diff(
                |x| g_eval(op, x).unwrap_or(f64::NAN),
                c,
                h,
                DiffOrder::First,
            );
            Ok(((slope - (1.0 - n as f64)).abs(), structure))
        }
        Kind::Trajectory => {
            let o = SigmaKOracle::new(n, op.k())?;
            let tr = shoot(p, alpha, &tol.trajectory())?;
            let mut worst: f64 = 0.0;
            for i in 0..=R_SAMPLES {
                let r = 100f64.powf(i as f64 / R_SAMPLES as f64);
                worst = worst.max((tr.w_at(r) - oracle_w(&o, alpha, r)?).abs());
            }
            Ok((worst, true))
        }
        Kind::TailSlope => {
            let tr = shoot(p, alpha, &tol.trajectory())?;
            let slope = tr.tail_slope().unwrap_or(f64::NAN);
            Ok(((slope + n as f64).abs(), true))
        }
        Kind::Mu => {
            let o = SigmaKOracle::new(n, op.k())?;
            let got = mu(p, alpha, tol)?;
            Ok(((got - oracle_mu(&o, alpha, 1e-12)?).abs(), true))
        }
        Kind::Threshold => {
            let o = SigmaKOracle::new(n, op.k())?;
            let report = c0(p, 0.0, tol)?;
            Ok((
                (report.c0 - oracle_threshold_constant(&o, 0.0, 1e-12)?).abs(),
                true,
            ))
        }
        Kind::Residual => {
            let sol = assemble_solution(p, alpha, 0.0, DEFAULT_R_OUT, DEFAULT_POINTS, tol)?;
            let rep = residual_report(&sol);
            let slope_ok = rep
                .decay_slope
                .is_none_or(|s| (s + (n as f64 - 2.0)).abs() <= DECAY_SLOPE_TOL);
            let ok = rep.cone_violations == 0
                && slope_ok
                && (rep.c_estimate - sol.c).abs() <= C_ESTIMATE_TOL;
            Ok((rep.max_residual, ok))
        }
    }
}

/// Fixed-width table, one line per check, and a summary line.
pub fn render_table(results: &[CheckResult]) -> String {
    let mut out = format!(
        "{:<28} {:<18} {:<14} {:>11} {:>9}  {}\n",
        "operator", "check", "param", "measured", "limit", "result"
    );
    for r in results {
        out.push_str(&format!(
            "{:<28} {:<18} {:<14} {:>11.3e} {:>9.0e}  {}",
            r.operator,
            r.check,
            r.param,
            r.measured,
            r.limit,
            if r.passed { "PASS" } else { "FAIL" }
        ));
        if !r.note.is_empty() {
            out.push_str(&format!("  ({})", r.note));
        }
        out.push('\n');
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    out.push_str(&format!("{} checks, {} failed\n", results.len(), failed));
    out
}
