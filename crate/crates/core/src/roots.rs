//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Finds a sign change of `f` on `[a, b]` with the Illinois variant of regula falsi.
///
/// Terminates when the bracket is narrower than `xtol` (absolute) or the
/// function value is exactly zero.
pub fn illinois<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, xtol: f64) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::RootNotFound(format!(
            "NaN at bracket ends [{a}, {b}]"
        )));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::RootNotFound(format!(
            "no sign change on [{a}, {b}]: f = {fa}, {fb}"
        )));
    }
    let mut side = 0i8;
    for _ in 0..400 {
        let width = (b - a).abs();
        if width <= xtol {
            break;
        }
        // Fall back to bisection when the secant step is not usable.
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !c.is_finite() || c <= a.min(b) || c >= a.max(b) {
            c = 0.5 * (a + b);
        }
        let fc = f(c);
        if fc.is_nan() {
            return Err(Error::RootNotFound(format!("NaN at {c}")));
        }
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
        // Guarantee progress on stubborn brackets.
        if (b - a).abs() > 0.5 * width {
            let m = 0.5 * (a + b);
            let fm = f(m);
            if fm == 0.0 {
                return Ok(m);
            }
            if fm.signum() == fb.signum() {
                b = m;
                fb = fm;
            } else {
                a = m;
                fa = fm;
            }
            side = 0;
        }
    }
    Ok(0.5 * (a + b))
}

/// Doubles `hi` away from `lo` until `f(hi)` differs in sign from `f(lo)`.
pub fn expand_upward<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    mut hi: f64,
    max_doublings: usize,
) -> Result<(f64, f64)> {
    let flo = f(lo);
    let mut step = hi - lo;
    for _ in 0..max_doublings {
        let fhi = f(hi);
        if fhi.signum() != flo.signum() || fhi == 0.0 {
            return Ok((lo, hi));
        }
        step *= 2.0;
        hi = lo + step;
    }
    Err(Error::RootNotFound(format!(
        "no sign change found above {lo}"
    )))
}
