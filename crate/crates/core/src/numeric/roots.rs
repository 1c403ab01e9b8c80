use crate::error::{Error, Result};

/// Default iteration cap for bracketing searches.
pub const MAX_BISECT: usize = 200;

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `abs_tol + rel_tol * |mid|`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::Convergence { routine: "bisect", detail: format!("no sign change on [{lo:.6e}, {hi:.6e}]") });
    }
    for _ in 0..MAX_BISECT {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= abs_tol + rel_tol * mid.abs() || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Expand `[lo, hi]` geometrically (in the positive reals) until `f` changes sign.
pub fn bracket_positive<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> Result<(f64, f64)> {
    let s_lo = f(lo).signum();
    let s_hi = f(hi).signum();
    if s_lo != s_hi {
        return Ok((lo, hi));
    }
    for _ in 0..MAX_BISECT {
        lo *= 0.5;
        hi *= 2.0;
        if f(lo).signum() != s_hi {
            return Ok((lo, lo * 2.0));
        }
        if f(hi).signum() != s_lo {
            return Ok((hi * 0.5, hi));
        }
    }
    Err(Error::Convergence { routine: "bracket", detail: "no sign change found".into() })
}
