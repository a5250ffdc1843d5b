//! Symmetric operators `f(λ)` restricted to the ray `λ = (β, γ, …, γ)`.
//!
//! On the ray every elementary symmetric polynomial is affine in `β`:
//!
//! ```text
//! σ_j(β, γ, …, γ) = C(n−1, j) γ^j + C(n−1, j−1) γ^(j−1) β
//! ```
//!
//! so evaluations, partials and the Gårding cone test are all closed form.

use std::fmt;

use crate::error::{Error, Result};
use crate::roots::solve_bracketed_root;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `f = σ_k^(1/k)` on `Γ_k`.
    SigmaK,
    /// `f = (σ_k / σ_l)^(1/(k−l))` on `Γ_k`.
    HessianQuotient,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::SigmaK => f.write_str("sigma-k"),
            Family::HessianQuotient => f.write_str("hessian-quotient"),
        }
    }
}

/// A validated operator: dimension, family and orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OperatorSpec {
    n: usize,
    family: Family,
    k: usize,
    l: usize,
}

/// Eigenvalue pair on the ray: `beta` is `λ₁ = u″`, `gamma` is `λ₂ = … = λ_n = u′/r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayPoint {
    pub beta: f64,
    pub gamma: f64,
}

impl RayPoint {
    pub fn new(beta: f64, gamma: f64) -> Self {
        Self { beta, gamma }
    }

    pub fn diagonal(c: f64) -> Self {
        Self { beta: c, gamma: c }
    }
}

/// Partials of `f` at a ray point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayPartials {
    /// `f_{λ₁}`.
    pub dfdbeta: f64,
    /// `Σ_{j=2}^n f_{λ_j}`, the derivative along `γ` with `β` fixed.
    pub dfdgamma_total: f64,
}

/// Binomial coefficient as a float; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0_f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Build and validate an operator. `l` is ignored for [`Family::SigmaK`].
pub fn make_operator(family: Family, n: usize, k: usize, l: usize) -> Result<OperatorSpec> {
    OperatorSpec::new(family, n, k, l)
}

impl OperatorSpec {
    pub fn new(family: Family, n: usize, k: usize, l: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Parameter(format!(
                "dimension n = {n} must be at least 3"
            )));
        }
        match family {
            Family::SigmaK => {
                if !(2..=n).contains(&k) {
                    return Err(Error::Parameter(format!(
                        "sigma-k needs 2 <= k <= n, got k = {k}, n = {n}"
                    )));
                }
                Ok(Self { n, family, k, l: 0 })
            }
            Family::HessianQuotient => {
                if !(2..=n).contains(&k) || l < 1 || l >= k {
                    return Err(Error::Parameter(format!(
                        "hessian quotient needs 1 <= l < k <= n and k >= 2, got k = {k}, l = {l}, n = {n}"
                    )));
                }
                Ok(Self { n, family, k, l })
            }
        }
    }

    pub fn sigma_k(n: usize, k: usize) -> Result<Self> {
        Self::new(Family::SigmaK, n, k, 0)
    }

    pub fn hessian_quotient(n: usize, k: usize, l: usize) -> Result<Self> {
        Self::new(Family::HessianQuotient, n, k, l)
    }

    /// `σ_n^(1/n)`, the Monge–Ampère operator.
    pub fn monge_ampere(n: usize) -> Result<Self> {
        Self::sigma_k(n, n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Zero for [`Family::SigmaK`].
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Short display name such as `sigma_2^(1/2) n=3`.
    pub fn label(&self) -> String {
        match self.family {
            Family::SigmaK if self.k == self.n => format!("monge-ampere n={}", self.n),
            Family::SigmaK => format!("sigma_{}^(1/{}) n={}", self.k, self.k, self.n),
            Family::HessianQuotient => format!(
                "(sigma_{}/sigma_{})^(1/{}) n={}",
                self.k,
                self.l,
                self.k - self.l,
                self.n
            ),
        }
    }

    /// `σ_j(β, γ, …, γ)`.
    pub fn sigma_ray(&self, j: usize, p: RayPoint) -> f64 {
        if j == 0 {
            return 1.0;
        }
        let m = self.n - 1;
        let mut s = binomial(m, j - 1) * p.gamma.powi(j as i32 - 1) * p.beta;
        let cg = binomial(m, j);
        if cg != 0.0 {
            s += cg * p.gamma.powi(j as i32);
        }
        s
    }

    /// `(∂σ_j/∂β, ∂σ_j/∂γ)` along the ray.
    fn sigma_ray_partials(&self, j: usize, p: RayPoint) -> (f64, f64) {
        if j == 0 {
            return (0.0, 0.0);
        }
        let m = self.n - 1;
        let dbeta = binomial(m, j - 1) * p.gamma.powi(j as i32 - 1);
        let mut dgamma = 0.0;
        let cg = binomial(m, j);
        if cg != 0.0 {
            dgamma += j as f64 * cg * p.gamma.powi(j as i32 - 1);
        }
        if j >= 2 {
            dgamma += (j - 1) as f64 * binomial(m, j - 1) * p.gamma.powi(j as i32 - 2) * p.beta;
        }
        (dbeta, dgamma)
    }

    /// Membership in `Γ_k`: `σ_j > 0` for `j = 1..=k`. Both families use `Γ_k`.
    pub fn in_cone_ray(&self, p: RayPoint) -> bool {
        p.beta.is_finite()
            && p.gamma.is_finite()
            && (1..=self.k).all(|j| self.sigma_ray(j, p) > 0.0)
    }

    /// `f(β, γ, …, γ)`.
    ///
    /// Outside the cone the raw formula value is returned where it is real, which keeps
    /// sign information for bracketing; an even root of a negative number is a
    /// [`Error::Domain`].
    pub fn eval_ray(&self, p: RayPoint) -> Result<f64> {
        match self.family {
            Family::SigmaK => real_root(self.sigma_ray(self.k, p), self.k),
            Family::HessianQuotient => {
                let sl = self.sigma_ray(self.l, p);
                if sl == 0.0 {
                    return Err(Error::Domain(format!(
                        "sigma_{} vanishes at (beta, gamma) = ({}, {})",
                        self.l, p.beta, p.gamma
                    )));
                }
                real_root(self.sigma_ray(self.k, p) / sl, self.k - self.l)
            }
        }
    }

    /// Analytic `f_{λ₁}` and `Σ_{j≥2} f_{λ_j}` at a cone point.
    pub fn ray_partials(&self, p: RayPoint) -> Result<RayPartials> {
        if !self.in_cone_ray(p) {
            return Err(Error::Domain(format!(
                "(beta, gamma) = ({}, {}) is outside the cone",
                p.beta, p.gamma
            )));
        }
        let f = self.eval_ray(p)?;
        // Logarithmic derivative: d ln f = (1/m) (d ln σ_k − d ln σ_l).
        let sk = self.sigma_ray(self.k, p);
        let (dkb, dkg) = self.sigma_ray_partials(self.k, p);
        let (mut lb, mut lg, m) = (dkb / sk, dkg / sk, self.k - self.l);
        if self.family == Family::HessianQuotient {
            let sl = self.sigma_ray(self.l, p);
            let (dlb, dlg) = self.sigma_ray_partials(self.l, p);
            lb -= dlb / sl;
            lg -= dlg / sl;
        }
        let scale = f / m as f64;
        lb *= scale;
        lg *= scale;
        Ok(RayPartials {
            dfdbeta: lb,
            dfdgamma_total: lg,
        })
    }

    /// Closed-form `c*` with `f(c*, …, c*) = 1`.
    pub fn c_star(&self) -> f64 {
        let n = self.n;
        match self.family {
            Family::SigmaK => binomial(n, self.k).powf(-1.0 / self.k as f64),
            Family::HessianQuotient => {
                (binomial(n, self.l) / binomial(n, self.k)).powf(1.0 / (self.k - self.l) as f64)
            }
        }
    }

    /// `c*` by bracketed root finding on `f(c, …, c) − 1`, independent of [`Self::c_star`].
    pub fn c_star_by_root(&self) -> Result<f64> {
        let h = |c: f64| self.eval_ray(RayPoint::diagonal(c)).map(|v| v - 1.0);
        let mut hi = 1.0;
        while h(hi)? <= 0.0 {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::MaxIter(1024));
            }
        }
        solve_bracketed_root(|c| h(c).unwrap_or(-1.0), 0.0, hi, 0.0)
    }
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn real_root(x: f64, m: usize) -> Result<f64> {
    if m == 1 {
        return Ok(x);
    }
    let inv = 1.0 / m as f64;
    if x >= 0.0 {
        Ok(x.powf(inv))
    } else if m % 2 == 1 {
        Ok(-(-x).powf(inv))
    } else {
        Err(Error::Domain(format!("even root of negative radicand {x}")))
    }
}
