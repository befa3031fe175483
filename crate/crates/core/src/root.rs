//! Bracketing root search.

use crate::error::{Error, Result};

pub const REL_TOL: f64 = 1e-13;
pub const MAX_ITER: usize = 200;

/// Bisection on `[lo, hi]`; the residual must change sign across the bracket.
pub fn bisect(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.signum() != fhi.signum() && flo.is_finite() && fhi.is_finite()) {
        return Err(Error::NoSignChange { lo, hi, flo, fhi });
    }
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
        if hi - lo <= REL_TOL * lo.abs().max(hi.abs()) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn endpoint_roots_are_returned() {
        assert_eq!(bisect(|x| x - 1.0, 1.0, 3.0).unwrap(), 1.0);
        assert_eq!(bisect(|x| x - 3.0, 1.0, 3.0).unwrap(), 3.0);
    }

    #[test]
    fn missing_sign_change_is_an_error() {
        assert!(matches!(
            bisect(|x| x * x + 1.0, -1.0, 1.0),
            Err(Error::NoSignChange { .. })
        ));
    }
}
