//! Bracketing and root refinement for monotone scalar maps.

use crate::error::{Error, Result};

/// Grow `[0, hi]` geometrically until `f(hi) >= 0`, starting from `hi0`.
///
/// `f` must be increasing with `f(0) <= 0`. Returns the bracket, or `None`
/// if `hi` would exceed `max`.
pub fn bracket_upward<F: FnMut(f64) -> f64>(
    mut f: F,
    hi0: f64,
    max: f64,
) -> Option<(f64, f64, f64, f64)> {
    let mut lo = 0.0;
    let mut f_lo = f(lo);
    let mut hi = hi0.min(max);
    loop {
        let f_hi = f(hi);
        if f_hi >= 0.0 {
            return Some((lo, f_lo, hi, f_hi));
        }
        if hi >= max {
            return None;
        }
        lo = hi;
        f_lo = f_hi;
        hi = (hi * 4.0).min(max);
    }
}

/// Illinois-modified regula falsi on a sign-changing bracket.
///
/// Stops when the bracket is narrower than `x_tol` relative to the current
/// estimate, or when `f` hits zero exactly.
pub fn illinois<F: FnMut(f64) -> f64>(
    mut f: F,
    (mut a, mut fa): (f64, f64),
    (mut b, mut fb): (f64, f64),
    x_tol: f64,
    max_iter: usize,
) -> Result<f64> {
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Precondition("root is not bracketed".into()));
    }
    let mut side = 0i8;
    for _ in 0..max_iter {
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = f(c);
        if fc == 0.0 {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() <= x_tol * c.abs() {
            return Ok(if fa.abs() < fb.abs() { a } else { b });
        }
    }
    Err(Error::Precondition(format!(
        "root refinement did not converge in {max_iter} iterations"
    )))
}
