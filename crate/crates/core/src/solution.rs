//! The radial solution `u(r) = b + ∫₁^r s W(s, α) ds` with `u′ = rW`, `u″ = g(W)`,
//! and pointwise checks of the equation and of the expansion
//! `u = c*/2 r² + c + O(r^{2−n})`, `c = μ(α) + b − c*/2`.

use std::fs;
use std::path::Path;

use serde_json::{Map, Value};

use crate::asymptotics::Tolerances;
use crate::error::{Error, Result};
use crate::format::{csv_row, json_num, json_opt};
use crate::operator::{OperatorSpec, RayPoint};
use crate::profile::GProfile;
use crate::trajectory::{least_squares_slope, shoot, Sample};

pub const DEFAULT_POINTS: usize = 512;
pub const DEFAULT_R_OUT: f64 = 1e3;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialSolution {
    pub op: OperatorSpec,
    pub alpha: f64,
    pub b: f64,
    /// Asymptotic constant `μ(α) + b − c*/2`.
    pub c: f64,
    pub c_star: f64,
    pub gamma0: f64,
    /// Log-spaced radii from 1 to `R_out`.
    pub grid: Vec<f64>,
    pub u: Vec<f64>,
    pub uprime: Vec<f64>,
    pub usecond: Vec<f64>,
    /// `u − (c*/2 r² + c) = −∫_r^∞ s (W − c*) ds`, computed directly.
    pub remainder: Vec<f64>,
    /// `f(λ(D²u)) − 1` at each radius.
    pub residual: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub max_residual: f64,
    pub cone_violations: usize,
    /// Least-squares slope of `log|u − (c*/2 r² + c)|` against `log r` over the outer
    /// half of the grid; `None` when the remainder vanishes there (`α = c*`).
    pub decay_slope: Option<f64>,
    /// `c` read off `u − c*/2 r²` at the outer end of the grid, with the known
    /// `r^{2−n}` decay of the remainder removed by two-point extrapolation.
    pub c_estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// `points` log-spaced radii from 1 to `r_out`, both ends exact.
pub fn log_grid(r_out: f64, points: usize) -> Vec<f64> {
    let top = r_out.ln();
    (0..points)
        .map(|i| match i {
            0 => 1.0,
            _ if i == points - 1 => r_out,
            _ => (top * i as f64 / (points - 1) as f64).exp(),
        })
        .collect()
}

pub fn assemble_solution(
    profile: &GProfile,
    alpha: f64,
    b: f64,
    r_out: f64,
    points: usize,
    tol: &Tolerances,
) -> Result<RadialSolution> {
    tol.validate()?;
    if !(alpha > profile.floor()) || !alpha.is_finite() {
        return Err(Error::Admissibility {
            alpha,
            floor: profile.floor(),
        });
    }
    if !(r_out >= 10.0) || !r_out.is_finite() || points < 2 || !b.is_finite() {
        return Err(Error::Parameter(format!(
            "need R_out ≥ 10, points ≥ 2, finite b; got {r_out}, {points}, {b}"
        )));
    }
    let op = *profile.op();
    let n = op.n();
    if n < 3 {
        return Err(Error::Divergence { n });
    }
    let c_star = profile.c_star();
    let tr = shoot(profile, alpha, &tol.trajectory())?;
    let grid = log_grid(r_out, points);
    let ts: Vec<f64> = grid.iter().map(|r| r.ln()).collect();
    let excess = |p: Sample| Ok((2.0 * p.t).exp() * p.dev);
    let piece_tol = tol.quad_tol / points as f64;

    // ∫ s (W − c*) ds between consecutive radii
    let mut pieces = vec![0.0; points];
    for i in 1..points {
        pieces[i] = tr.integrate_along(ts[i - 1], ts[i], excess, piece_tol)?;
    }
    let beyond = tr.integrate_along(
        ts[points - 1].min(tr.t_switch()),
        tr.t_switch(),
        excess,
        piece_tol,
    )? + tr.tail_integral_from(ts[points - 1].max(tr.t_switch()));
    let mu = pieces.iter().sum::<f64>() + beyond;
    let c = mu + b - 0.5 * c_star;

    let mut u = Vec::with_capacity(points);
    let mut forward = 0.0;
    for (i, r) in grid.iter().enumerate() {
        forward += pieces[i];
        u.push(b + 0.5 * c_star * (r * r - 1.0) + forward);
    }
    let mut remainder = vec![0.0; points];
    let mut backward = beyond;
    for i in (0..points).rev() {
        remainder[i] = -backward;
        backward += pieces[i];
    }

    let mut uprime = Vec::with_capacity(points);
    let mut usecond = Vec::with_capacity(points);
    let mut residual = Vec::with_capacity(points);
    for (i, &r) in grid.iter().enumerate() {
        let w = if i == 0 { alpha } else { tr.w_at(r) };
        let g = profile.g(w)?;
        uprime.push(r * w);
        usecond.push(g);
        residual.push(op.eval_ray(RayPoint::new(g, w))? - 1.0);
    }

    Ok(RadialSolution {
        op,
        alpha,
        b,
        c,
        c_star,
        gamma0: profile.gamma0(),
        grid,
        u,
        uprime,
        usecond,
        remainder,
        residual,
    })
}

pub fn residual_report(sol: &RadialSolution) -> ResidualReport {
    let op = &sol.op;
    let mut max_residual: f64 = 0.0;
    let mut cone_violations = 0;
    for i in 0..sol.grid.len() {
        let gamma = sol.uprime[i] / sol.grid[i];
        let p = RayPoint::new(sol.usecond[i], gamma);
        match op.eval_ray(p) {
            Ok(v) => max_residual = max_residual.max((v - 1.0).abs()),
            Err(_) => max_residual = f64::INFINITY,
        }
        if !op.in_cone_ray(p) || !(gamma > sol.gamma0) {
            cone_violations += 1;
        }
    }

    let m = sol.grid.len();
    let outer = m / 2..m;
    let (xs, ys): (Vec<f64>, Vec<f64>) = outer
        .clone()
        .filter(|&i| sol.remainder[i] != 0.0)
        .map(|i| (sol.grid[i].ln(), sol.remainder[i].abs().ln()))
        .unzip();
    let decay_slope = (xs.len() >= 2).then(|| least_squares_slope(&xs, &ys));

    let n = op.n() as f64;
    let plateau = |i: usize| sol.u[i] - 0.5 * sol.c_star * sol.grid[i] * sol.grid[i];
    let (i, j) = (m - 1, (7 * (m - 1)) / 8);
    let c_estimate = if j < i {
        let q = (sol.grid[i] / sol.grid[j]).powf(2.0 - n);
        (plateau(i) - q * plateau(j)) / (1.0 - q)
    } else {
        plateau(i)
    };

    ResidualReport {
        max_residual,
        cone_violations,
        decay_slope,
        c_estimate,
    }
}

impl RadialSolution {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,u,uprime,usecond,residual\n");
        for i in 0..self.grid.len() {
            out.push_str(&csv_row(&[
                self.grid[i],
                self.u[i],
                self.uprime[i],
                self.usecond[i],
                self.residual[i],
            ]));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("family".into(), Value::String(self.op.family().to_string()));
        m.insert("n".into(), self.op.n().into());
        m.insert("k".into(), self.op.k().into());
        m.insert("l".into(), self.op.l().into());
        m.insert("alpha".into(), json_num(self.alpha));
        m.insert("b".into(), json_num(self.b));
        m.insert("c".into(), json_num(self.c));
        m.insert("c_star".into(), json_num(self.c_star));
        m.insert("gamma0".into(), json_num(self.gamma0));
        let col = |v: &[f64]| Value::Array(v.iter().map(|&x| json_num(x)).collect());
        m.insert("r".into(), col(&self.grid));
        m.insert("u".into(), col(&self.u));
        m.insert("uprime".into(), col(&self.uprime));
        m.insert("usecond".into(), col(&self.usecond));
        m.insert("residual".into(), col(&self.residual));
        Value::Object(m)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("plain JSON");
                s.push('\n');
                s
            }
        }
    }
}

impl ResidualReport {
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("max_residual".into(), json_num(self.max_residual));
        m.insert("cone_violations".into(), self.cone_violations.into());
        m.insert("decay_slope".into(), json_opt(self.decay_slope));
        m.insert("c_estimate".into(), json_num(self.c_estimate));
        Value::Object(m)
    }
}

pub fn export_solution(sol: &RadialSolution, path: &Path, format: Format) -> Result<()> {
    fs::write(path, sol.render(format))?;
    Ok(())
}
