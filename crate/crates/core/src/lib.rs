//! Radially symmetric admissible solutions of `f(λ(D²u)) = 1` outside the unit ball.
//!
//! Every radial function has Hessian eigenvalues `(u″, u′/r, …, u′/r)`, so the whole
//! theory lives on the ray `λ = (β, γ, …, γ)`. The pipeline is:
//!
//! 1. [`operator`]: evaluate `f` and its partials on the ray, find `c*` with `f(c*, …, c*) = 1`.
//! 2. [`profile`]: solve `f(g(γ), γ, …, γ) = 1` for the implicit profile `g` on `(γ₀, ∞)`.
//! 3. [`trajectory`]: integrate `dW/dr = (g(W) − W)/r`, `W(1) = α`, where `W = u′/r`.
//! 4. [`asymptotics`]: `μ(α) = ∫₁^∞ s (W(s, α) − c*) ds`, the threshold `c₀`, and the
//!    existence classifier for the asymptotic constant `c`.
//! 5. [`solution`]: reconstruct `u`, check the equation and the cone pointwise.
//!
//! [`oracles`] holds closed-form `σ_k` solutions and an independent quadrature used
//! to cross-check the pipeline.

// NaN-rejecting `!(x > y)` guards are deliberate; quadrature nodes keep their published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod format;
pub mod ode;
pub mod operator;
pub mod oracles;
pub mod profile;
pub mod quadrature;
pub mod roots;
pub mod solution;
pub mod trajectory;
pub mod verify;

pub use asymptotics::{
    alpha_min, c0, classify_existence, mu, mu_inverse, threshold, ExistenceVerdict, Threshold,
    ThresholdReport, Tolerances,
};
pub use error::{Error, Result};
pub use operator::{Family, OperatorSpec, RayPoint};
pub use profile::{g_eval, g_prime, gamma0, GProfile, ProfileRow};
pub use solution::{assemble_solution, residual_report, RadialSolution, ResidualReport};
pub use trajectory::{Trajectory, TrajectoryOptions};
