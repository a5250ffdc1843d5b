use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The ray point is outside the region where the operator formula is real.
    #[error("outside the operator domain: {0}")]
    Domain(String),

    /// Query below the certified left endpoint of the profile interval.
    #[error("gamma = {gamma} is not above gamma0 = {gamma0} (enclosure {enclosure})")]
    OutsideDomain {
        gamma: f64,
        gamma0: f64,
        enclosure: f64,
    },

    #[error("no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("no convergence after {0} iterations")]
    MaxIter(usize),

    #[error("step size underflow at t = {t} for alpha = {alpha}; use the stiff-start integrator")]
    StiffStart { alpha: f64, t: f64 },

    #[error("trajectory for alpha = {alpha} did not reach the tail band by t = {t_max} (|W - c*| = {deviation})")]
    NonConvergence {
        alpha: f64,
        t_max: f64,
        deviation: f64,
    },

    #[error("target {target} is not attainable (searched [{lo}, {hi}])")]
    Range { target: f64, lo: f64, hi: f64 },

    #[error("improper integral diverges for n = {n} (need n >= 3)")]
    Divergence { n: usize },

    #[error("extrapolation failed: {0}")]
    Extrapolation(String),

    #[error("alpha = {alpha} is below the admissibility floor {floor}")]
    Admissibility { alpha: f64, floor: f64 },

    #[error("tolerance not met: {0}")]
    Tolerance(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of a numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoBracket { .. }
                | Error::MaxIter(_)
                | Error::StiffStart { .. }
                | Error::NonConvergence { .. }
                | Error::Extrapolation(_)
                | Error::Tolerance(_)
                | Error::Invariant(_)
        )
    }
}
