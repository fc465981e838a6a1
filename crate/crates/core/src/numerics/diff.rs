use crate::error::{Error, Result};
use crate::numerics::Real;

/// Central finite difference of order 1 or 2 with step `h`; error O(h²).
///
/// A non-finite value anywhere on the stencil is reported as a domain error.
pub fn finite_diff<T: Real, F: Fn(T) -> T>(f: F, x: T, order: u8, h: T) -> Result<T> {
    let two = T::from_f64(2.0);
    let (fm, fp) = (f(x - h), f(x + h));
    let out = match order {
        1 => (fp - fm) / (two * h),
        2 => {
            let f0 = f(x);
            if !f0.is_finite() {
                return Err(stencil_error(x, h));
            }
            (fp - two * f0 + fm) / (h * h)
        }
        _ => return Err(Error::Input(format!("finite_diff order must be 1 or 2, got {order}"))),
    };
    if fm.is_finite() && fp.is_finite() && out.is_finite() {
        Ok(out)
    } else {
        Err(stencil_error(x, h))
    }
}

fn stencil_error<T: Real>(x: T, h: T) -> Error {
    Error::Domain {
        value: x.to_f64(),
        lo: (x - h).to_f64(),
        hi: (x + h).to_f64(),
    }
}
