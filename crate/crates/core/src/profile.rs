//! The implicit profile `β = g(γ)` solving `f(g(γ), γ, …, γ) = 1` inside the cone.
//!
//! `g` lives on a maximal interval `(γ₀, ∞)` with `0 ≤ γ₀ < c*`, is strictly
//! decreasing and convex, satisfies `g(c*) = c*`, `g′(c*) = 1 − n`, and blows up as
//! `γ → γ₀⁺`.

use crate::error::{Error, Result};
use crate::operator::{OperatorSpec, RayPoint};
use crate::roots::{bisect_predicate, try_solve_bracketed_root};

/// `γ₀` is placed where `g` crosses this value (extrapolated, see [`gamma0`]).
pub const BLOWUP_CAP: f64 = 1e8;

/// Default enclosure width requested for `γ₀`.
pub const GAMMA0_TOL: f64 = 1e-10;

pub const MIN_GRID: usize = 16;

/// Lower edge of `Γ_k` in `β` at fixed `γ > 0`: `σ_j > 0` iff `β > −C(n−1,j)/C(n−1,j−1) γ`,
/// and the binding constraint is the largest of these.
fn cone_edge_beta(op: &OperatorSpec, gamma: f64) -> f64 {
    use crate::operator::binomial;
    let m = op.n() - 1;
    (1..=op.k())
        .map(|j| -binomial(m, j) / binomial(m, j - 1) * gamma)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `g(γ)` by bracketed root finding in `β`, with no check against `γ₀`.
///
/// Fails with [`Error::OutsideDomain`] when `f(β, γ, …, γ)` never reaches 1, which is
/// exactly the case `γ ≤ γ₀`.
pub fn g_eval(op: &OperatorSpec, gamma: f64) -> Result<f64> {
    let outside = || Error::OutsideDomain {
        gamma,
        gamma0: f64::NAN,
        enclosure: f64::NAN,
    };
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(outside());
    }
    let edge = cone_edge_beta(op, gamma);
    let mut nudge = edge.abs().max(gamma) * 4.0 * f64::EPSILON;
    let mut lo = edge + nudge;
    while !op.in_cone_ray(RayPoint::new(lo, gamma)) {
        nudge *= 2.0;
        lo = edge + nudge;
    }
    let h = |beta: f64| op.eval_ray(RayPoint::new(beta, gamma)).map(|f| f - 1.0);
    if h(lo)? >= 0.0 {
        return Ok(lo);
    }
    let mut step = lo.abs().max(gamma).max(1.0);
    let mut hi = lo + step;
    while h(hi)? <= 0.0 {
        step *= 2.0;
        if step > 1e300 {
            return Err(outside());
        }
        hi = lo + step;
    }
    try_solve_bracketed_root(h, lo, hi, 0.0)
}

/// `g′(γ) = −Σ_{j≥2} f_{λ_j} / f_{λ₁}` at `(g(γ), γ)`.
pub fn g_prime(op: &OperatorSpec, gamma: f64) -> Result<f64> {
    let beta = g_eval(op, gamma)?;
    g_prime_at(op, beta, gamma)
}

/// `g′` when `g(γ)` is already known.
pub fn g_prime_at(op: &OperatorSpec, beta: f64, gamma: f64) -> Result<f64> {
    let d = op.ray_partials(RayPoint::new(beta, gamma))?;
    Ok(-d.dfdgamma_total / d.dfdbeta)
}

/// True iff `g(γ) < cap`, i.e. `f(cap, γ, …, γ) > 1` (f increases in β).
fn below_cap(op: &OperatorSpec, gamma: f64, cap: f64) -> bool {
    let p = RayPoint::new(cap, gamma);
    op.in_cone_ray(p) && op.eval_ray(p).map(|f| f > 1.0).unwrap_or(false)
}

/// Aitken Δ² limit of three terms of a geometrically converging sequence.
fn aitken(x: [f64; 3]) -> f64 {
    let d1 = x[1] - x[0];
    let d2 = x[2] - x[1];
    let den = d2 - d1;
    if den == 0.0 {
        x[2]
    } else {
        x[2] - d2 * d2 / den
    }
}

/// Left endpoint `γ₀` of the interval of `g`, with a certified enclosure width.
///
/// For caps `C, 2C, 4C, 8C` (`C = BLOWUP_CAP`) the crossing `g(γ) = cap` is located by
/// predicate bisection on `[0, c*]`. Near a power-law blow-up these crossings approach
/// `γ₀` geometrically, so Aitken's Δ² extrapolation of consecutive triples gives `γ₀`
/// and their disagreement the enclosure. The result is clipped at 0 (`γ > 0` on the
/// cone ray) and the enclosure is widened until `g(γ₀ + enclosure) > C/2`.
pub fn gamma0(op: &OperatorSpec, tol: f64) -> Result<(f64, f64)> {
    let c_star = op.c_star();
    let mut crossings = [0.0; 4];
    for (i, x) in crossings.iter_mut().enumerate() {
        let cap = BLOWUP_CAP * f64::from(1u32 << i);
        let (_, hi) = bisect_predicate(|g| below_cap(op, g, cap), 0.0, c_star, 1e-15)?;
        *x = hi;
    }
    let a1 = aitken([crossings[0], crossings[1], crossings[2]]);
    let a2 = aitken([crossings[1], crossings[2], crossings[3]]);
    let g0 = a2.max(0.0);
    let mut enclosure = tol.max((a1 - a2).abs());
    let mut iter = 0;
    while below_cap(op, g0 + enclosure, 0.5 * BLOWUP_CAP) {
        enclosure *= 2.0;
        iter += 1;
        if iter > crate::roots::MAX_ITER {
            return Err(Error::MaxIter(iter));
        }
    }
    if g0 >= c_star {
        return Err(Error::Invariant(format!(
            "gamma0 = {g0} is not below c* = {c_star}"
        )));
    }
    Ok((g0, enclosure))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    pub gamma: f64,
    pub g: f64,
    pub gprime: f64,
}

/// `c*`, `γ₀` and a validated log-spaced table of `g` and `g′`.
///
/// The table is a cache for inspection and export; [`GProfile::g`] and
/// [`GProfile::g_prime`] always solve afresh.
#[derive(Debug, Clone)]
pub struct GProfile {
    op: OperatorSpec,
    c_star: f64,
    gamma0: f64,
    gamma0_tol: f64,
    table: Vec<ProfileRow>,
}

impl GProfile {
    pub fn build(op: OperatorSpec, grid_size: usize) -> Result<Self> {
        Self::build_with_tol(op, grid_size, GAMMA0_TOL)
    }

    pub fn build_with_tol(op: OperatorSpec, grid_size: usize, gamma0_tol: f64) -> Result<Self> {
        if grid_size < MIN_GRID {
            return Err(Error::Parameter(format!(
                "grid size {grid_size} is below the minimum {MIN_GRID}"
            )));
        }
        let c_star = op.c_star();
        let (g0, enclosure) = gamma0(&op, gamma0_tol)?;
        let mut profile = Self {
            op,
            c_star,
            gamma0: g0,
            gamma0_tol: enclosure,
            table: Vec::with_capacity(grid_size),
        };
        let lo = g0 + (g0 * 1e-6 + 1e-12).max(2.0 * enclosure);
        let hi = (10.0 * c_star).max(10.0);
        let ratio = (hi / lo).ln() / (grid_size - 1) as f64;
        for i in 0..grid_size {
            let gamma = if i + 1 == grid_size {
                hi
            } else {
                lo * (ratio * i as f64).exp()
            };
            let g = g_eval(&op, gamma)?;
            let gprime = g_prime_at(&op, g, gamma)?;
            profile.table.push(ProfileRow { gamma, g, gprime });
        }
        profile.validate()?;
        Ok(profile)
    }

    /// Re-check the structural properties of `g` on the table: the implicit
    /// equation, `g′ < 0`, `g > (1 − n)γ`, `g′ > 1 − n` above `c*`, strict decrease and
    /// positive second divided differences.
    pub fn validate(&self) -> Result<()> {
        let n = self.op.n() as f64;
        let fail = |msg: String| Err(Error::Invariant(format!("{}: {msg}", self.op)));
        if !(0.0..self.c_star).contains(&self.gamma0) {
            return fail(format!("gamma0 = {} outside [0, c*)", self.gamma0));
        }
        let gc = g_eval(&self.op, self.c_star)?;
        if (gc - self.c_star).abs() > 1e-10 {
            return fail(format!("g(c*) = {gc} differs from c* = {}", self.c_star));
        }
        for row in &self.table {
            let f = self.op.eval_ray(RayPoint::new(row.g, row.gamma))?;
            if (f - 1.0).abs() >= 1e-10 {
                return fail(format!("f(g(γ), γ) = {f} at γ = {}", row.gamma));
            }
            if row.gprime >= 0.0 {
                return fail(format!(
                    "g'({}) = {} is not negative",
                    row.gamma, row.gprime
                ));
            }
            if row.g <= (1.0 - n) * row.gamma {
                return fail(format!(
                    "g({}) = {} below the line (1-n)γ",
                    row.gamma, row.g
                ));
            }
            if row.gamma > self.c_star && row.gprime <= 1.0 - n {
                return fail(format!("g'({}) = {} not above 1-n", row.gamma, row.gprime));
            }
        }
        for w in self.table.windows(3) {
            if !(w[1].g < w[0].g && w[2].g < w[1].g) {
                return fail(format!("g not decreasing near γ = {}", w[1].gamma));
            }
            let s1 = (w[1].g - w[0].g) / (w[1].gamma - w[0].gamma);
            let s2 = (w[2].g - w[1].g) / (w[2].gamma - w[1].gamma);
            if s2 - s1 <= 0.0 {
                return fail(format!("g not convex near γ = {}", w[1].gamma));
            }
        }
        Ok(())
    }

    pub fn op(&self) -> &OperatorSpec {
        &self.op
    }

    pub fn c_star(&self) -> f64 {
        self.c_star
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn gamma0_enclosure(&self) -> f64 {
        self.gamma0_tol
    }

    /// `γ₀ + enclosure`: arguments at or below this are rejected.
    pub fn floor(&self) -> f64 {
        self.gamma0 + self.gamma0_tol
    }

    pub fn table(&self) -> &[ProfileRow] {
        &self.table
    }

    fn check(&self, gamma: f64) -> Result<()> {
        if gamma <= self.floor() || gamma.is_nan() {
            return Err(Error::OutsideDomain {
                gamma,
                gamma0: self.gamma0,
                enclosure: self.gamma0_tol,
            });
        }
        Ok(())
    }

    pub fn g(&self, gamma: f64) -> Result<f64> {
        self.check(gamma)?;
        g_eval(&self.op, gamma)
    }

    pub fn g_prime(&self, gamma: f64) -> Result<f64> {
        self.check(gamma)?;
        g_prime(&self.op, gamma)
    }
}
