//! Bracketed scalar root finding.

use crate::{Error, Result};

/// Illinois variant of regula falsi on a sign-changing bracket.
/// `lo` and `hi` are `(x, f(x))` pairs with opposite signs.
pub fn illinois(mut f: impl FnMut(f64) -> Result<f64>, lo: (f64, f64), hi: (f64, f64), rel_tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    if lo.1 == 0.0 {
        return Ok(lo.0);
    }
    if hi.1 == 0.0 {
        return Ok(hi.0);
    }
    if lo.1.signum() == hi.1.signum() {
        return Err(Error::BracketFailure(format!("no sign change between {lo:?} and {hi:?}")));
    }
    let mut side = 0;
    for _ in 0..200 {
        let x = (lo.0 * hi.1 - hi.0 * lo.1) / (hi.1 - lo.1);
        let fx = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == lo.1.signum() {
            lo = (x, fx);
            if side == 1 {
                hi.1 *= 0.5;
            }
            side = 1;
        } else {
            hi = (x, fx);
            if side == -1 {
                lo.1 *= 0.5;
            }
            side = -1;
        }
        if (hi.0 - lo.0).abs() <= rel_tol * hi.0.abs().max(lo.0.abs()) {
            break;
        }
    }
    Ok(if lo.1.abs() < hi.1.abs() { lo.0 } else { hi.0 })
}
