//! Bracketed scalar root finding.

use crate::error::{Error, Result};

pub const MAX_ITER: usize = 200;

/// Root of `h` on `[lo, hi]` by Brent's method (inverse quadratic / secant steps,
/// falling back to bisection, bracket always maintained).
///
/// Stops when the bracket is narrower than `tol` plus a few ulps of the iterate, so
/// `tol = 0` means "as tight as double precision allows".
pub fn solve_bracketed_root<F>(mut h: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    try_solve_bracketed_root(|x| Ok(h(x)), lo, hi, tol)
}

/// Same as [`solve_bracketed_root`] for fallible functions.
pub fn try_solve_bracketed_root<F>(mut h: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi);
    let mut fa = h(a)?;
    let mut fb = h(b)?;
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::Domain(format!("NaN at bracket end [{lo}, {hi}]")));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoBracket { lo, hi });
    }

    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = h(b)?;
        if fb.is_nan() {
            return Err(Error::Domain(format!("NaN at x = {b}")));
        }
    }
    Err(Error::MaxIter(MAX_ITER))
}

/// Bisection on a monotone predicate with `pred(lo) == false`, `pred(hi) == true`.
///
/// Returns the final `(lo, hi)` with `hi − lo ≤ rel_tol · |hi|` or adjacent floats.
pub fn bisect_predicate<P>(
    mut pred: P,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
) -> Result<(f64, f64)>
where
    P: FnMut(f64) -> bool,
{
    for _ in 0..MAX_ITER {
        if hi - lo <= rel_tol * hi.abs() {
            return Ok((lo, hi));
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok((lo, hi));
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::MaxIter(MAX_ITER))
}
