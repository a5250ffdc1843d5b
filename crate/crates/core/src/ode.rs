//! Dormand–Prince 5(4) for scalar equations `y′ = F(x, y)`, keeping every accepted
//! node with its slope and the coefficient of the 4th order continuous extension.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub x: f64,
    pub y: f64,
    /// `F(x, y)` at the node.
    pub dy: f64,
    /// Quartic correction to the cubic Hermite interpolant on the step ending here.
    pub dense: f64,
}

impl Node {
    pub fn new(x: f64, y: f64, dy: f64) -> Self {
        Self {
            x,
            y,
            dy,
            dense: 0.0,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
const BETA: f64 = 0.04;
const EXPO: f64 = 0.2 - 0.75 * BETA;

pub const MAX_STEPS: usize = 200_000;

/// Why an integration stopped without reaching its goal.
#[derive(Debug, Clone, PartialEq)]
pub enum OdeFailure {
    StepUnderflow {
        x: f64,
    },
    TooManySteps {
        x: f64,
    },
    /// Passed `x_end` without the stop predicate firing.
    Exhausted {
        x: f64,
        y: f64,
    },
    Rhs(String),
}

/// Step-size settings. The error of a step from `y_old` to `y_new` at `x_new` is
/// accepted when it is below `scale(x_new, y_old, y_new)`.
pub struct Dopri5<S> {
    pub scale: S,
    pub h_max: f64,
    pub max_steps: usize,
}

impl<S> Dopri5<S>
where
    S: Fn(f64, f64, f64) -> f64,
{
    pub fn new(scale: S, h_max: f64) -> Self {
        Self {
            scale,
            h_max,
            max_steps: MAX_STEPS,
        }
    }

    /// Integrate from `(x0, y0)` towards `x_end` (which may be `+∞`).
    ///
    /// The run ends successfully at `x_end` or at the first accepted node where
    /// `stop(x, y)` returns true. A failing right-hand side evaluation rejects the
    /// step and shrinks `h`.
    pub fn integrate<F, P>(
        &self,
        mut rhs: F,
        x0: f64,
        y0: f64,
        x_end: f64,
        mut stop: P,
    ) -> std::result::Result<Vec<Node>, OdeFailure>
    where
        F: FnMut(f64, f64) -> Result<f64>,
        P: FnMut(f64, f64) -> bool,
    {
        let f0 = rhs(x0, y0).map_err(|e| OdeFailure::Rhs(e.to_string()))?;
        let mut nodes = vec![Node::new(x0, y0, f0)];
        if stop(x0, y0) || x0 >= x_end {
            return Ok(nodes);
        }
        let mut h = self.initial_step(&mut rhs, x0, y0, f0, x_end);
        let (mut x, mut y, mut k1) = (x0, y0, f0);
        let mut err_old: f64 = 1e-4;
        let mut rejected = false;

        for _ in 0..self.max_steps {
            let last = x + h >= x_end;
            if last {
                h = x_end - x;
            }
            if h <= 16.0 * f64::EPSILON * x.abs().max(1e-300) || h < 1e-300 {
                return Err(OdeFailure::StepUnderflow { x });
            }
            let Some((y_new, k7, err, dense)) = self.try_step(&mut rhs, x, y, k1, h) else {
                h *= 0.25;
                rejected = true;
                continue;
            };
            let x_new = if last { x_end } else { x + h };
            let sc = (self.scale)(x_new, y, y_new);
            let err = err / sc;
            if !err.is_finite() {
                h *= 0.25;
                rejected = true;
                continue;
            }
            if err <= 1.0 {
                let mut fac = err.max(1e-10).powf(EXPO) / err_old.powf(BETA) / SAFETY;
                fac = fac.clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let mut h_new = h / fac;
                if rejected {
                    h_new = h_new.min(h);
                }
                err_old = err.max(1e-4);
                x = x_new;
                y = y_new;
                k1 = k7;
                nodes.push(Node {
                    x,
                    y,
                    dy: k7,
                    dense,
                });
                if stop(x, y) || last {
                    return Ok(nodes);
                }
                h = h_new.min(self.h_max);
                rejected = false;
            } else {
                let fac = (err.powf(EXPO) / SAFETY).min(1.0 / FAC_MIN);
                h /= fac;
                rejected = true;
            }
        }
        if x >= x_end {
            return Err(OdeFailure::Exhausted { x, y });
        }
        Err(OdeFailure::TooManySteps { x })
    }

    /// One step; `None` if a stage evaluation fails.
    fn try_step<F>(
        &self,
        rhs: &mut F,
        x: f64,
        y: f64,
        k1: f64,
        h: f64,
    ) -> Option<(f64, f64, f64, f64)>
    where
        F: FnMut(f64, f64) -> Result<f64>,
    {
        let mut f = |xx: f64, yy: f64| rhs(xx, yy).ok().filter(|v| v.is_finite());
        let k2 = f(x + C2 * h, y + h * A21 * k1)?;
        let k3 = f(x + C3 * h, y + h * (A31 * k1 + A32 * k2))?;
        let k4 = f(x + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3))?;
        let k5 = f(
            x + C5 * h,
            y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4),
        )?;
        let k6 = f(
            x + h,
            y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
        )?;
        let y_new = y + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6);
        let k7 = f(x + h, y_new)?;
        let err = (h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)).abs();
        let dense = h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7);
        Some((y_new, k7, err, dense))
    }

    fn initial_step<F>(&self, rhs: &mut F, x0: f64, y0: f64, f0: f64, x_end: f64) -> f64
    where
        F: FnMut(f64, f64) -> Result<f64>,
    {
        let sc = (self.scale)(x0, y0, y0);
        let d0 = y0.abs() / sc;
        let d1 = f0.abs() / sc;
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h0 = h0.min(self.h_max).min(x_end - x0);
        let d2 = match rhs(x0 + h0, y0 + h0 * f0) {
            Ok(f1) if f1.is_finite() => (f1 - f0).abs() / sc / h0,
            _ => return h0 * 1e-3,
        };
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        // A tenth of the usual guess: the first step's dense output sees the largest
        // derivatives of a steep start.
        (0.1 * (100.0 * h0).min(h1)).min(self.h_max).min(x_end - x0)
    }
}

/// Dense output between consecutive nodes: cubic Hermite plus the quartic
/// correction `s²(1 − s)² · b.dense`.
pub fn interpolate(a: &Node, b: &Node, x: f64) -> f64 {
    let h = b.x - a.x;
    if h == 0.0 {
        return a.y;
    }
    let s = (x - a.x) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let s1 = 1.0 - s;
    h00 * a.y + h10 * h * a.dy + h01 * b.y + h11 * h * b.dy + s2 * s1 * s1 * b.dense
}

impl From<OdeFailure> for Error {
    fn from(f: OdeFailure) -> Self {
        match f {
            OdeFailure::StepUnderflow { x } => Error::StiffStart {
                alpha: f64::NAN,
                t: x,
            },
            OdeFailure::TooManySteps { x } | OdeFailure::Exhausted { x, .. } => {
                Error::NonConvergence {
                    alpha: f64::NAN,
                    t_max: x,
                    deviation: f64::NAN,
                }
            }
            OdeFailure::Rhs(msg) => Error::Domain(msg),
        }
    }
}
