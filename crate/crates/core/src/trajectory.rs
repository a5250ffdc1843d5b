//! The shooting equation `dW/dr = (g(W) − W)/r`, `W(1) = α`, for `W = u′/r`.
//!
//! Integration runs in `t = ln r`, where the equation is autonomous,
//! `dW/dt = g(W) − W`, with fixed point `c*`. Near `c*` the linearization is
//! `d(W − c*)/dt ≈ (g′(c*) − 1)(W − c*) = −n (W − c*)`, so once `|W − c*|` drops below
//! the tail band the trajectory is continued analytically as `c* + K r^{−n}`.
//!
//! Starts close to `γ₀` are steep (`g(W) → ∞`); there the inverted equation
//! `dt/dW = 1/(g(W) − W)` is integrated on a `W` grid first.

use crate::error::{Error, Result};
use crate::ode::{interpolate, Dopri5, Node, OdeFailure};
use crate::operator::OperatorSpec;
use crate::profile::{g_eval, g_prime, GProfile};
use crate::quadrature;
use crate::roots::{solve_bracketed_root, try_solve_bracketed_root};

pub const SLOPE_CAP: f64 = 1e3;
pub const T_MAX: f64 = 60.0;
pub const MIN_TOL: f64 = 1e-13;
pub const MAX_TOL: f64 = 1e-6;
/// The controller runs at `tol · LOCAL_MARGIN`: the embedded estimate does not bound
/// the dense-output error, which on steep starts is up to ~100× larger.
pub const LOCAL_MARGIN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryOptions {
    /// Error tolerance of the integrator.
    pub tol: f64,
    /// Width of the band around `c*` where the tail model takes over;
    /// `None` means `1e-9 · max(1, c*)`.
    pub tail_eps: Option<f64>,
    pub t_max: f64,
    pub slope_cap: f64,
    /// Keep integrating for this much log-radius after entering the tail band.
    pub tail_extension: f64,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            tail_eps: None,
            t_max: T_MAX,
            slope_cap: SLOPE_CAP,
            tail_extension: 0.0,
        }
    }
}

impl TrajectoryOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    pub fn tail_eps_for(&self, c_star: f64) -> f64 {
        self.tail_eps.unwrap_or(1e-9 * c_star.max(1.0))
    }

    fn validate(&self) -> Result<()> {
        if !(MIN_TOL..=MAX_TOL).contains(&self.tol) {
            return Err(Error::Parameter(format!(
                "ODE tolerance {} outside [{MIN_TOL}, {MAX_TOL}]",
                self.tol
            )));
        }
        Ok(())
    }
}

/// A point on the trajectory handed to integrands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub w: f64,
    /// `W − c*`, interpolated directly so it keeps its relative accuracy near `c*`.
    pub dev: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotone {
    Increasing,
    Decreasing,
    Constant,
}

/// Dense-output solution `W(r, α)`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    alpha: f64,
    op: OperatorSpec,
    c_star: f64,
    gamma0: f64,
    /// Steep start: `x = W`, `y = t`, `dy = dt/dW`. Empty when not needed.
    stiff: Vec<Node>,
    /// `x = t`, `y = W − c*`, `dy = dW/dt`.
    nodes: Vec<Node>,
    t_switch: f64,
    k_tail: f64,
    monotone: Monotone,
}

fn check_start(profile: &GProfile, alpha: f64) -> Result<()> {
    if !(alpha > profile.floor()) || !alpha.is_finite() {
        return Err(Error::OutsideDomain {
            gamma: alpha,
            gamma0: profile.gamma0(),
            enclosure: profile.gamma0_enclosure(),
        });
    }
    Ok(())
}

/// Integrate in `t = ln r` from `t = 0`.
pub fn integrate_w(profile: &GProfile, alpha: f64, opts: &TrajectoryOptions) -> Result<Trajectory> {
    opts.validate()?;
    check_start(profile, alpha)?;
    let c_star = profile.c_star();
    if alpha == c_star {
        return Ok(Trajectory::constant(profile, alpha));
    }
    let nodes = run_log_phase(profile, alpha, 0.0, alpha - c_star, opts)?;
    Ok(Trajectory::finish(profile, alpha, Vec::new(), nodes))
}

/// Integrate `dt/dW = 1/(g(W) − W)` while `g(W) − W > slope_cap`, then hand off to
/// the `t` integrator. Requires `γ₀ < α < c*`.
pub fn integrate_w_stiff_start(
    profile: &GProfile,
    alpha: f64,
    opts: &TrajectoryOptions,
) -> Result<Trajectory> {
    opts.validate()?;
    check_start(profile, alpha)?;
    let c_star = profile.c_star();
    if alpha >= c_star {
        return Err(Error::Parameter(format!(
            "stiff start needs alpha < c* = {c_star}, got {alpha}"
        )));
    }
    let op = *profile.op();
    let slope = |w: f64| g_eval(&op, w).map(|g| g - w);
    if slope(alpha)? <= opts.slope_cap {
        return integrate_w(profile, alpha, opts);
    }
    let w_switch = solve_bracketed_root(
        |w| {
            slope(w)
                .map(|s| s - opts.slope_cap)
                .unwrap_or(f64::INFINITY)
        },
        alpha,
        c_star,
        0.0,
    )?;
    let tol = opts.tol;
    let solver = Dopri5::new(
        move |_, a: f64, b: f64| tol * a.abs().max(b.abs()) + 1e-30,
        (w_switch - alpha) / 8.0,
    );
    let stiff = solver
        .integrate(
            |w, _| slope(w).map(|s| 1.0 / s),
            alpha,
            0.0,
            w_switch,
            |_, _| false,
        )
        .map_err(|e| ode_error(e, alpha, opts.t_max, f64::NAN))?;
    let handoff = *stiff.last().expect("at least the initial node");
    let nodes = run_log_phase(profile, alpha, handoff.y, handoff.x - c_star, opts)?;
    Ok(Trajectory::finish(profile, alpha, stiff, nodes))
}

/// Pick the integrator for `α`: stiff start below `c*`, plain otherwise.
pub fn shoot(profile: &GProfile, alpha: f64, opts: &TrajectoryOptions) -> Result<Trajectory> {
    if alpha < profile.c_star() {
        integrate_w_stiff_start(profile, alpha, opts)
    } else {
        integrate_w(profile, alpha, opts)
    }
}

fn ode_error(e: OdeFailure, alpha: f64, t_max: f64, deviation: f64) -> Error {
    match e {
        OdeFailure::StepUnderflow { x } => Error::StiffStart { alpha, t: x },
        OdeFailure::TooManySteps { .. } | OdeFailure::Exhausted { .. } => Error::NonConvergence {
            alpha,
            t_max,
            deviation,
        },
        OdeFailure::Rhs(msg) => Error::Domain(msg),
    }
}

/// Half-width, in units of `max(1, c*)`, of the band around `c*` where the right-hand
/// side is evaluated from `g′` instead of `g(W) − W`.
const LINEAR_BAND: f64 = 1e-3;

/// `g(c* + d) − c* − d = d (∫₀¹ g′(c* + s d) ds − 1)` by 3-point Gauss–Legendre;
/// keeps full relative precision in `d` where `g(W) − W` would cancel.
fn deviation_rhs(op: &OperatorSpec, c_star: f64, d: f64) -> Result<f64> {
    const NODES: [f64; 3] = [0.112_701_665_379_258_3, 0.5, 0.887_298_334_620_741_7];
    const WEIGHTS: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
    if d == 0.0 {
        return Ok(0.0);
    }
    let mut mean = 0.0;
    for (s, wt) in NODES.iter().zip(WEIGHTS) {
        mean += wt * g_prime(op, c_star + s * d)?;
    }
    Ok(d * (mean - 1.0))
}

/// Integrate `d = W − c*` in `t` from `(t0, d0)` until `|d| ≤ tail_eps` (plus the
/// requested extension). Node values are deviations, not `W`.
fn run_log_phase(
    profile: &GProfile,
    alpha: f64,
    t0: f64,
    d0: f64,
    opts: &TrajectoryOptions,
) -> Result<Vec<Node>> {
    let op = *profile.op();
    let c_star = profile.c_star();
    let tail_eps = opts.tail_eps_for(c_star);
    let band = LINEAR_BAND * c_star.max(1.0);
    let tol = opts.tol * LOCAL_MARGIN;
    // Error is measured relative to the distance from c*, with an absolute floor
    // weighted by e^{-2t}: quantities built from W (μ, u) carry a factor r² = e^{2t}.
    let abs_floor = tol * c_star.max(1.0);
    let solver = Dopri5::new(
        move |t: f64, _: f64, d: f64| tol * d.abs() + abs_floor * (-2.0 * t).exp(),
        1.0,
    );
    let mut entered: Option<f64> = None;
    let ext = opts.tail_extension;
    let nodes = solver
        .integrate(
            |_, d| {
                if d.abs() <= band {
                    deviation_rhs(&op, c_star, d)
                } else {
                    let w = c_star + d;
                    g_eval(&op, w).map(|g| g - w)
                }
            },
            t0,
            d0,
            opts.t_max,
            |t, d| {
                if d.abs() <= tail_eps && entered.is_none() {
                    entered = Some(t);
                }
                entered.is_some_and(|t_in| t >= t_in + ext)
            },
        )
        .map_err(|e| ode_error(e, alpha, opts.t_max, f64::NAN))?;
    let last = nodes.last().expect("at least the initial node");
    if last.y.abs() > tail_eps {
        return Err(Error::NonConvergence {
            alpha,
            t_max: opts.t_max,
            deviation: last.y.abs(),
        });
    }
    Ok(nodes)
}

impl Trajectory {
    fn constant(profile: &GProfile, alpha: f64) -> Self {
        Self {
            alpha,
            op: *profile.op(),
            c_star: profile.c_star(),
            gamma0: profile.gamma0(),
            stiff: Vec::new(),
            nodes: vec![Node::new(0.0, 0.0, 0.0)],
            t_switch: 0.0,
            k_tail: 0.0,
            monotone: Monotone::Constant,
        }
    }

    fn finish(profile: &GProfile, alpha: f64, stiff: Vec<Node>, nodes: Vec<Node>) -> Self {
        let c_star = profile.c_star();
        let last = nodes.last().expect("at least the initial node");
        let n = profile.op().n() as f64;
        let monotone = if alpha < c_star {
            Monotone::Increasing
        } else if alpha > c_star {
            Monotone::Decreasing
        } else {
            Monotone::Constant
        };
        Self {
            alpha,
            op: *profile.op(),
            c_star,
            gamma0: profile.gamma0(),
            t_switch: last.x,
            k_tail: last.y * (n * last.x).exp(),
            stiff,
            nodes,
            monotone,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn op(&self) -> &OperatorSpec {
        &self.op
    }

    pub fn c_star(&self) -> f64 {
        self.c_star
    }

    /// Log-radius beyond which `W = c* + K r^{−n}`.
    pub fn t_switch(&self) -> f64 {
        self.t_switch
    }

    pub fn k_tail(&self) -> f64 {
        self.k_tail
    }

    /// Nodes of the stiff-start segment in `W`; zero when it was not needed.
    pub fn stiff_nodes(&self) -> usize {
        self.stiff.len()
    }

    pub fn monotone(&self) -> Monotone {
        self.monotone
    }

    /// All integration nodes as `(t, W)`, steep-start nodes first.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let stiff = self.stiff.iter().map(|nd| (nd.y, nd.x));
        let main = self.nodes.iter().map(|nd| (nd.x, self.c_star + nd.y));
        if self.stiff.is_empty() {
            main.collect()
        } else {
            stiff.chain(main.skip(1)).collect()
        }
    }

    fn t_start_log_phase(&self) -> f64 {
        self.nodes[0].x
    }

    fn tail_dev(&self, t: f64) -> f64 {
        self.k_tail * (-(self.op.n() as f64) * t).exp()
    }

    fn tail_w(&self, t: f64) -> f64 {
        self.c_star + self.tail_dev(t)
    }

    /// `W(r, α)` for `r ≥ 1`.
    pub fn w_at(&self, r: f64) -> f64 {
        if r <= 1.0 {
            return self.alpha;
        }
        self.w_at_log(r.ln())
    }

    /// `W` as a function of `t = ln r`.
    pub fn w_at_log(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.alpha;
        }
        if t >= self.t_switch {
            return self.tail_w(t);
        }
        if t < self.t_start_log_phase() {
            return self.stiff_w(t);
        }
        let j = self
            .nodes
            .partition_point(|nd| nd.x <= t)
            .clamp(1, self.nodes.len() - 1);
        self.c_star + interpolate(&self.nodes[j - 1], &self.nodes[j], t)
    }

    /// `W − c*` as a function of `t`, without cancellation near `c*`.
    pub fn dev_at_log(&self, t: f64) -> f64 {
        if t >= self.t_switch {
            return self.tail_dev(t);
        }
        if t <= 0.0 || t < self.t_start_log_phase() {
            return self.w_at_log(t) - self.c_star;
        }
        let j = self
            .nodes
            .partition_point(|nd| nd.x <= t)
            .clamp(1, self.nodes.len() - 1);
        interpolate(&self.nodes[j - 1], &self.nodes[j], t)
    }

    /// Least-squares slope of `log|W − c*|` against `log r` on `[e^{T−1}, e^T]`,
    /// `T` the switch radius. `None` for the constant trajectory.
    pub fn tail_slope(&self) -> Option<f64> {
        if self.monotone == Monotone::Constant {
            return None;
        }
        let hi = self.t_switch;
        let lo = (hi - 1.0).max(0.0);
        let (ts, ys): (Vec<f64>, Vec<f64>) = (0..=64)
            .map(|i| lo + (hi - lo) * i as f64 / 64.0)
            .map(|t| (t, self.dev_at_log(t).abs().ln()))
            .unzip();
        Some(least_squares_slope(&ts, &ys))
    }

    /// Invert the interpolant of `t(W)` on the steep segment.
    fn stiff_w(&self, t: f64) -> f64 {
        let j = self
            .stiff
            .partition_point(|nd| nd.y <= t)
            .clamp(1, self.stiff.len() - 1);
        let (a, b) = (&self.stiff[j - 1], &self.stiff[j]);
        solve_bracketed_root(|w| interpolate(a, b, w) - t, a.x, b.x, 0.0).unwrap_or_else(|_| {
            // Non-monotone interpolant: fall back to linear inverse.
            a.x + (b.x - a.x) * (t - a.y) / (b.y - a.y)
        })
    }

    /// `∫_{t_a}^{t_b} F(sample) dt`, split at the integration nodes. On the steep
    /// segment the variable is `v = ln(W − γ₀)` with the exact Jacobian
    /// `dt/dW = 1/(g(W) − W)`.
    pub fn integrate_along<F>(&self, t_a: f64, t_b: f64, mut f: F, tol: f64) -> Result<f64>
    where
        F: FnMut(Sample) -> Result<f64>,
    {
        if t_b < t_a {
            return self.integrate_along(t_b, t_a, f, tol).map(|v| -v);
        }
        let pieces = (self.stiff.len() + self.nodes.len() + 1) as f64;
        let tol_piece = tol / pieces;
        let c = self.c_star;
        let mut total = 0.0;

        let t_log = self.t_start_log_phase();
        if !self.stiff.is_empty() && t_a < t_log {
            let w_from = if t_a <= 0.0 {
                self.alpha
            } else {
                self.stiff_w(t_a)
            };
            let w_to = if t_b >= t_log {
                self.stiff.last().unwrap().x
            } else {
                self.stiff_w(t_b)
            };
            let g0 = self.gamma0;
            let op = self.op;
            for pair in self.stiff.windows(2) {
                let (a, b) = (&pair[0], &pair[1]);
                let lo = a.x.max(w_from);
                let hi = b.x.min(w_to);
                if hi <= lo {
                    continue;
                }
                total += quadrature::integrate(
                    |v| {
                        let dw = v.exp();
                        let w = g0 + dw;
                        let t = interpolate(a, b, w);
                        let slope = g_eval(&op, w)? - w;
                        Ok(f(Sample { t, w, dev: w - c })? * dw / slope)
                    },
                    (lo - g0).ln(),
                    (hi - g0).ln(),
                    tol_piece,
                )?;
            }
        }

        let lo = t_a.max(t_log);
        let hi = t_b.min(self.t_switch);
        if hi > lo {
            for pair in self.nodes.windows(2) {
                let (a, b) = (&pair[0], &pair[1]);
                let s = a.x.max(lo);
                let e = b.x.min(hi);
                if e <= s {
                    continue;
                }
                total += quadrature::integrate(
                    |t| {
                        let dev = interpolate(a, b, t);
                        f(Sample { t, w: c + dev, dev })
                    },
                    s,
                    e,
                    tol_piece,
                )?;
            }
        }

        if t_b > self.t_switch {
            let s = t_a.max(self.t_switch);
            total += quadrature::integrate(
                |t| {
                    let dev = self.tail_dev(t);
                    f(Sample { t, w: c + dev, dev })
                },
                s,
                t_b,
                tol_piece,
            )?;
        }
        Ok(total)
    }

    /// `μ(α) = ∫₁^∞ s (W(s) − c*) ds`: quadrature up to the switch radius plus the
    /// exact tail `K R^{2−n}/(n − 2)`.
    pub fn mu(&self, tol: f64) -> Result<f64> {
        let n = self.op.n();
        if n < 3 {
            return Err(Error::Divergence { n });
        }
        let body =
            self.integrate_along(0.0, self.t_switch, |p| Ok((2.0 * p.t).exp() * p.dev), tol)?;
        Ok(body + self.tail_integral_from(self.t_switch))
    }

    /// `∫_{e^t}^∞ s (W − c*) ds` under the tail model, valid for `t ≥ t_switch`.
    pub fn tail_integral_from(&self, t: f64) -> f64 {
        let n = self.op.n() as f64;
        self.k_tail * ((2.0 - n) * t).exp() / (n - 2.0)
    }

    /// `∂W/∂α (r) = exp ∫₀^{ln r} (g′(W) − 1) dt`.
    pub fn dw_dalpha(&self, r: f64, tol: f64) -> Result<f64> {
        if r <= 1.0 {
            return Ok(1.0);
        }
        let op = self.op;
        let expo = self.integrate_along(0.0, r.ln(), |p| Ok(g_prime(&op, p.w)? - 1.0), tol)?;
        Ok(expo.exp())
    }
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// `∂W/∂α (r, α)` through a fresh trajectory.
pub fn dw_dalpha(
    profile: &GProfile,
    alpha: f64,
    r: f64,
    opts: &TrajectoryOptions,
    quad_tol: f64,
) -> Result<f64> {
    shoot(profile, alpha, opts)?.dw_dalpha(r, quad_tol)
}

/// The `α` with `W(r, α) = target`, by bracketed root finding in `α`
/// (`W(r, ·)` is strictly increasing and unbounded).
pub fn w_inverse_in_alpha(
    profile: &GProfile,
    r: f64,
    target: f64,
    opts: &TrajectoryOptions,
    tol: f64,
) -> Result<f64> {
    let floor = profile.floor();
    if r <= 1.0 {
        if target > floor {
            return Ok(target);
        }
        return Err(Error::Range {
            target,
            lo: floor,
            hi: f64::INFINITY,
        });
    }
    let w = |alpha: f64| shoot(profile, alpha, opts).map(|tr| tr.w_at(r));
    let lo = floor * (1.0 + 1e-9);
    if w(lo)? > target {
        return Err(Error::Range { target, lo, hi: lo });
    }
    let mut hi = (2.0 * target).max(2.0 * profile.c_star());
    let mut doublings = 0;
    while w(hi)? <= target {
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::Range { target, lo, hi });
        }
    }
    try_solve_bracketed_root(|a| w(a).map(|v| v - target), lo, hi, tol)
}
