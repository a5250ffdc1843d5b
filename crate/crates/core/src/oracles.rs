//! Ground truth that shares no code with the solver: closed-form σ_k radial
//! solutions, the threshold constant of the σ_k equation, an improper-integral
//! quadrature and central differences.
//!
//! For `f = σ_k^{1/k}` the radial equation has the first integral
//! `r^{n−k} (u′)^k = a^k r^n + (α^k − a^k)`, so `W = u′/r` is explicit.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::operator::binomial;

/// Closed forms for `f = σ_k^{1/k}` in dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaKOracle {
    pub n: usize,
    pub k: usize,
    /// `(C_n^k)^{−1/k}`, the diagonal value `c*`.
    pub a: f64,
}

impl SigmaKOracle {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n < 2 || k == 0 || k > n {
            return Err(Error::Parameter(format!(
                "need 1 ≤ k ≤ n, n ≥ 2; got n={n}, k={k}"
            )));
        }
        Ok(Self {
            n,
            k,
            a: binomial(n, k).powf(-1.0 / k as f64),
        })
    }

    /// `g(γ) = (1 − C_{n−1}^k γ^k) / (C_{n−1}^{k−1} γ^{k−1})`.
    pub fn g(&self, gamma: f64) -> f64 {
        let (n, k) = (self.n, self.k);
        (1.0 - binomial(n - 1, k) * gamma.powi(k as i32))
            / (binomial(n - 1, k - 1) * gamma.powi(k as i32 - 1))
    }

    /// `(a^k + (α^k − a^k) r^{−n})^{1/k} − a`, without cancellation near `a`.
    fn w_minus_a(&self, alpha: f64, r: f64) -> Result<f64> {
        let k = self.k as i32;
        let x = ((alpha / self.a).powi(k) - 1.0) * r.powi(-(self.n as i32));
        if x < -1.0 {
            return Err(Error::Domain(format!(
                "negative radicand in closed-form W at alpha={alpha}, r={r}"
            )));
        }
        Ok(self.a * (x.ln_1p() / k as f64).exp_m1())
    }
}

/// `W(r, α) = (a^k + (α^k − a^k) r^{−n})^{1/k}`.
pub fn oracle_w(o: &SigmaKOracle, alpha: f64, r: f64) -> Result<f64> {
    if alpha < 0.0 || r < 1.0 {
        return Err(Error::Parameter(format!(
            "need alpha ≥ 0, r ≥ 1; got {alpha}, {r}"
        )));
    }
    if r == 1.0 {
        return Ok(alpha);
    }
    Ok(o.a + o.w_minus_a(alpha, r)?)
}

/// `μ(α) = ∫₁^∞ s (W(s, α) − a) ds` from the closed form.
pub fn oracle_mu(o: &SigmaKOracle, alpha: f64, tol: f64) -> Result<f64> {
    require_n3(o)?;
    quad_improper(
        |s| Ok(s * o.w_minus_a(alpha, s)?),
        1.0,
        1.0 - o.n as f64,
        tol,
    )
}

/// `â − a/2 + a ∫₁^∞ s((1 − s^{−n})^{1/k} − 1) ds`.
pub fn oracle_threshold_constant(o: &SigmaKOracle, a_hat: f64, quad_tol: f64) -> Result<f64> {
    require_n3(o)?;
    let (n, k) = (o.n as i32, o.k as f64);
    let integral = quad_improper(
        |s| Ok(s * ((-s.powi(-n)).ln_1p() / k).exp_m1()),
        1.0,
        1.0 - o.n as f64,
        quad_tol / o.a,
    )?;
    Ok(a_hat - 0.5 * o.a + o.a * integral)
}

fn require_n3(o: &SigmaKOracle) -> Result<()> {
    if o.n < 3 {
        return Err(Error::Divergence { n: o.n });
    }
    Ok(())
}

/// Number of geometric panels `[L·2^j, L·2^{j+1}]` before the tail estimate.
pub const CUT_DOUBLINGS: u32 = 24;
const MAX_LEVEL: u32 = 12;
const T_MAX: f64 = 4.0;

/// `∫_lower^∞ f` for `|f(s)| ≤ C s^p`, `p = tail_exponent < −1`.
///
/// Tanh–sinh on geometric panels up to `R = lower · 2^CUT_DOUBLINGS`, then the tail
/// from two Richardson levels on the partial integrals at `R/4, R/2, R`. The result
/// is compared with the same estimate at `2R`.
pub fn quad_improper<F>(f: F, lower: f64, tail_exponent: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    quad_improper_cut(f, lower, tail_exponent, tol, CUT_DOUBLINGS)
}

/// [`quad_improper`] with an explicit number of panel doublings.
pub fn quad_improper_cut<F>(
    mut f: F,
    lower: f64,
    tail_exponent: f64,
    tol: f64,
    doublings: u32,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lower > 0.0) || !(tail_exponent < -1.0) || !(tol > 0.0) || doublings < 3 {
        return Err(Error::Parameter(format!(
            "quad_improper needs lower > 0, tail_exponent < −1, tol > 0, doublings ≥ 3; \
             got {lower}, {tail_exponent}, {tol}, {doublings}"
        )));
    }
    let panels = doublings as usize + 1;
    let panel_tol = 0.1 * tol / panels as f64;
    // partial[j] = ∫_lower^{lower·2^j}
    let mut partial = vec![0.0; panels + 1];
    for j in 0..panels {
        let a = lower * 2f64.powi(j as i32);
        partial[j + 1] = partial[j] + tanh_sinh(&mut f, a, 2.0 * a, panel_tol)?;
    }
    let q1 = 2f64.powf(tail_exponent + 1.0);
    let q2 = 2f64.powf(tail_exponent);
    let estimate = |m: usize| {
        let rich = |i: usize| partial[i] + q1 * (partial[i] - partial[i - 1]) / (1.0 - q1);
        let (e1, e2) = (rich(m - 1), rich(m));
        e2 + q2 * (e2 - e1) / (1.0 - q2)
    };
    let coarse = estimate(panels - 1);
    let fine = estimate(panels);
    if (fine - coarse).abs() > tol {
        return Err(Error::Tolerance(format!(
            "tail estimate unstable under cut doubling: {coarse} vs {fine}"
        )));
    }
    Ok(fine)
}

/// Tanh–sinh quadrature on `[a, b]`, halving the step until successive levels agree.
pub fn tanh_sinh<F>(f: &mut F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let hw = 0.5 * (b - a);
    // Node at parameter t, with the distance to the nearer end computed directly.
    let mut term = |t: f64| -> Result<f64> {
        let u = FRAC_PI_2 * t.sinh();
        let cu = u.cosh();
        let w = FRAC_PI_2 * t.cosh() / (cu * cu);
        if w == 0.0 {
            return Ok(0.0);
        }
        let d = hw * 2.0 / ((2.0 * u.abs()).exp() + 1.0);
        let x = if t < 0.0 { a + d } else { b - d };
        Ok(hw * w * f(x)?)
    };
    let mut h = 1.0;
    let mut sum = term(0.0)?;
    let mut j = 1.0;
    while j * h <= T_MAX {
        sum += term(j * h)? + term(-j * h)?;
        j += 1.0;
    }
    let mut value = h * sum;
    for _ in 0..MAX_LEVEL {
        h *= 0.5;
        let mut t = h;
        while t <= T_MAX {
            sum += term(t)? + term(-t)?;
            t += 2.0 * h;
        }
        let next = h * sum;
        let diff = (next - value).abs();
        value = next;
        if !value.is_finite() {
            return Err(Error::Domain(format!("non-finite integrand on [{a}, {b}]")));
        }
        if diff <= tol.max(4.0 * f64::EPSILON * value.abs()) {
            return Ok(value);
        }
    }
    Err(Error::Tolerance(format!(
        "tanh-sinh did not converge on [{a}, {b}] to {tol}"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffOrder {
    First,
    Second,
}

/// Central difference: `(f(x+h) − f(x−h))/2h` or `(f(x+h) − 2f(x) + f(x−h))/h²`.
pub fn finite_diff<F>(mut f: F, x: f64, h: f64, order: DiffOrder) -> f64
where
    F: FnMut(f64) -> f64,
{
    match order {
        DiffOrder::First => (f(x + h) - f(x - h)) / (2.0 * h),
        DiffOrder::Second => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
    }
}
