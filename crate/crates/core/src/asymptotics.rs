//! `μ(α) = ∫₁^∞ s (W(s, α) − c*) ds`, the admissibility floor `α_min`, the threshold
//! `c₀ = μ(α_min) + b − c*/2` and the existence classifier `c ≥ c₀`.
//!
//! The radial solution with `u′(1) = α` has `u(r) = c*/2 r² + μ(α) + b − c*/2 + O(r^{2−n})`,
//! and `μ` is strictly increasing and unbounded, so `c` determines `α` when `c ≥ c₀`.

use crate::error::{Error, Result};
use crate::profile::GProfile;
use crate::roots::try_solve_bracketed_root;
use crate::trajectory::{shoot, w_inverse_in_alpha, TrajectoryOptions};

/// Offsets above `α_min`, in units of `max(1, c*)`, whose μ values are extrapolated.
pub const EPS_LADDER: [f64; 3] = [1e-3, 1e-4, 1e-5];
const MAX_SUP_DOUBLINGS: u32 = 40;
const MIN_SUP_DOUBLINGS: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub ode_tol: f64,
    pub quad_tol: f64,
    pub root_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ode_tol: 1e-10,
            quad_tol: 1e-9,
            root_tol: 1e-10,
        }
    }
}

impl Tolerances {
    pub const MIN: f64 = 1e-13;
    pub const MAX: f64 = 1e-4;
    pub const MAX_ODE: f64 = 1e-6;

    pub fn validate(&self) -> Result<()> {
        for (name, v, hi) in [
            ("ode_tol", self.ode_tol, Self::MAX_ODE),
            ("quad_tol", self.quad_tol, Self::MAX),
            ("root_tol", self.root_tol, Self::MAX),
        ] {
            if !(Self::MIN..=hi).contains(&v) {
                return Err(Error::Parameter(format!(
                    "{name} = {v} outside [{}, {hi}]",
                    Self::MIN
                )));
            }
        }
        Ok(())
    }

    pub fn trajectory(&self) -> TrajectoryOptions {
        TrajectoryOptions::with_tol(self.ode_tol)
    }
}

/// `μ(α)` with absolute error about `tol.quad_tol`.
pub fn mu(profile: &GProfile, alpha: f64, tol: &Tolerances) -> Result<f64> {
    tol.validate()?;
    let n = profile.op().n();
    if n < 3 {
        return Err(Error::Divergence { n });
    }
    shoot(profile, alpha, &tol.trajectory())?.mu(tol.quad_tol)
}

/// `sup_{r ≥ 1} W_r^{−1}(γ₀⁺)` over `r ∈ {1, 2, 4, …}`, with `γ₀⁺` the profile floor.
///
/// A radius at which no admissible `α` reaches the floor imposes no constraint and
/// contributes the floor itself.
pub fn alpha_min(profile: &GProfile, tol: &Tolerances) -> Result<f64> {
    tol.validate()?;
    let floor = profile.floor();
    let opts = tol.trajectory();
    let at = |r: f64| match w_inverse_in_alpha(profile, r, floor, &opts, tol.root_tol) {
        Ok(a) => Ok(a),
        Err(Error::Range { .. }) => Ok(floor),
        Err(e) => Err(e),
    };
    let mut sup = at(1.0)?;
    let mut r = 1.0;
    for doubling in 1..=MAX_SUP_DOUBLINGS {
        r *= 2.0;
        let next = sup.max(at(r)?);
        let change = next - sup;
        sup = next;
        if doubling >= MIN_SUP_DOUBLINGS && change < tol.root_tol {
            return Ok(sup);
        }
    }
    Err(Error::Tolerance(format!(
        "alpha_min still moving at r = 2^{MAX_SUP_DOUBLINGS}"
    )))
}

/// The `b`-independent part of the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Threshold {
    pub gamma0: f64,
    pub alpha_min: f64,
    /// One-sided limit `μ(α_min⁺)`.
    pub mu_min: f64,
    /// `μ(α_min + ε·max(1, c*))` for each ε of [`EPS_LADDER`].
    pub ladder: [f64; 3],
    pub extrapolation_spread: f64,
    /// Share of the analytic tail in `μ` at the smallest ε.
    pub tail_fraction_of_mu: f64,
    pub alpha_min_is_gamma0: bool,
    pub c_star: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    pub threshold: Threshold,
    pub b: f64,
    pub c0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExistenceVerdict {
    pub exists: bool,
    pub alpha: Option<f64>,
    /// `c − c₀`.
    pub margin: f64,
    pub c0: f64,
}

/// `α_min` and the extrapolated `μ(α_min⁺)`.
pub fn threshold(profile: &GProfile, tol: &Tolerances) -> Result<Threshold> {
    let n = profile.op().n();
    if n < 3 {
        return Err(Error::Divergence { n });
    }
    let alpha_min = alpha_min(profile, tol)?;
    let c_star = profile.c_star();
    let unit = c_star.max(1.0);
    let opts = tol.trajectory();
    let mut ladder = [0.0; 3];
    let mut tail_fraction = 0.0;
    for (slot, eps) in ladder.iter_mut().zip(EPS_LADDER) {
        let tr = shoot(profile, alpha_min + eps * unit, &opts)?;
        let m = tr.mu(tol.quad_tol)?;
        *slot = m;
        tail_fraction = if m == 0.0 {
            0.0
        } else {
            (tr.tail_integral_from(tr.t_switch()) / m).abs()
        };
    }
    let noise = 10.0 * tol.quad_tol;
    let (mu_min, spread) = extrapolate(ladder, noise)?;
    let gamma0 = profile.gamma0();
    Ok(Threshold {
        gamma0,
        alpha_min,
        mu_min,
        ladder,
        extrapolation_spread: spread,
        tail_fraction_of_mu: tail_fraction,
        alpha_min_is_gamma0: (alpha_min - gamma0).abs()
            <= profile.gamma0_enclosure() + tol.root_tol,
        c_star,
    })
}

/// Limit of `x₁, x₂, x₃` by Aitken's Δ² when the differences shrink geometrically,
/// or `x₃` when they are at the noise level. Returns `(limit, spread)`.
pub fn extrapolate(x: [f64; 3], noise: f64) -> Result<(f64, f64)> {
    let d1 = x[1] - x[0];
    let d2 = x[2] - x[1];
    if d2.abs() > d1.abs().max(noise) {
        return Err(Error::Extrapolation(format!(
            "mu ladder {x:?} is not Cauchy-decreasing"
        )));
    }
    if d2.abs() <= noise || d1.abs() <= noise {
        return Ok((x[2], d2.abs()));
    }
    let ratio = d2 / d1;
    if !(0.0..1.0).contains(&ratio) {
        return Ok((x[2], d2.abs()));
    }
    let limit = x[2] + d2 * ratio / (1.0 - ratio);
    Ok((limit, (limit - x[2]).abs().max(d2.abs() * ratio)))
}

/// `c₀ = μ(α_min⁺) + b − c*/2`.
pub fn c0(profile: &GProfile, b: f64, tol: &Tolerances) -> Result<ThresholdReport> {
    Ok(threshold(profile, tol)?.report(b))
}

impl Threshold {
    pub fn c0(&self, b: f64) -> f64 {
        self.mu_min + b - 0.5 * self.c_star
    }

    pub fn report(self, b: f64) -> ThresholdReport {
        ThresholdReport {
            c0: self.c0(b),
            b,
            threshold: self,
        }
    }
}

/// The `α` with `μ(α) = target`. Targets within `tol.quad_tol` below `μ(α_min⁺)`
/// map to `α_min`.
pub fn mu_inverse(
    profile: &GProfile,
    thr: &Threshold,
    target: f64,
    tol: &Tolerances,
) -> Result<f64> {
    if !target.is_finite() {
        return Err(Error::Parameter(format!("mu target {target}")));
    }
    if target < thr.mu_min - tol.quad_tol {
        return Err(Error::Range {
            target,
            lo: thr.mu_min,
            hi: f64::INFINITY,
        });
    }
    if target <= thr.mu_min {
        return Ok(thr.alpha_min);
    }
    if target == 0.0 {
        return Ok(profile.c_star());
    }
    let h = |a: f64| -> Result<f64> {
        if a <= thr.alpha_min {
            return Ok(thr.mu_min - target);
        }
        Ok(mu(profile, a, tol)? - target)
    };
    // μ(c*) = 0 splits the search.
    let c_star = profile.c_star();
    let (lo, hi) = if target < 0.0 {
        (thr.alpha_min, c_star)
    } else {
        let mut hi = 2.0 * c_star;
        let mut doublings = 0;
        while h(hi)? <= 0.0 {
            hi *= 2.0;
            doublings += 1;
            if doublings > 60 {
                return Err(Error::Range {
                    target,
                    lo: thr.mu_min,
                    hi: f64::INFINITY,
                });
            }
        }
        (c_star, hi)
    };
    try_solve_bracketed_root(h, lo, hi, tol.root_tol)
}

/// Existence of a radial solution with `u = b` on the unit sphere and asymptotic
/// constant `c`; `band` is the tolerance on `c − c₀`.
pub fn classify_existence(
    profile: &GProfile,
    thr: &Threshold,
    b: f64,
    c: f64,
    band: f64,
    tol: &Tolerances,
) -> Result<ExistenceVerdict> {
    if !b.is_finite() || !c.is_finite() {
        return Err(Error::Parameter(format!("b = {b}, c = {c}")));
    }
    let c0 = thr.c0(b);
    let margin = c - c0;
    if margin < -band {
        return Ok(ExistenceVerdict {
            exists: false,
            alpha: None,
            margin,
            c0,
        });
    }
    let target = c - b + 0.5 * thr.c_star;
    let alpha = if target <= thr.mu_min {
        thr.alpha_min
    } else {
        mu_inverse(profile, thr, target, tol)?
    };
    Ok(ExistenceVerdict {
        exists: true,
        alpha: Some(alpha),
        margin,
        c0,
    })
}
