use std::ops::{Div, Mul, Sub};

use crate::error::{Error, Result};

/// Thomas algorithm for `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`.
/// `sub[0]` and `sup[n-1]` are ignored. Works for real and complex systems;
/// no pivoting, so the matrix should be diagonally dominant.
pub fn solve_tridiagonal<T>(sub: &[T], diag: &[T], sup: &[T], rhs: &[T]) -> Result<Vec<T>>
where
    T: Copy + Sub<Output = T> + Mul<Output = T> + Div<Output = T> + PartialEq + Default,
{
    let n = diag.len();
    if sub.len() != n || sup.len() != n || rhs.len() != n {
        return Err(Error::Input("tridiagonal bands must have equal length".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let zero = T::default();
    let mut c = vec![zero; n];
    let mut d = vec![zero; n];
    let mut denom = diag[0];
    if denom == zero {
        return Err(Error::Input("zero pivot in tridiagonal solve".into()));
    }
    c[0] = sup[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - sub[i] * c[i - 1];
        if denom == zero {
            return Err(Error::Input("zero pivot in tridiagonal solve".into()));
        }
        c[i] = sup[i] / denom;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] = x[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn real_system() {
        // [2 1 0; 1 3 1; 0 1 2] x = [3 5 3] -> x = [1 1 1]
        let x = solve_tridiagonal(&[0.0, 1.0, 1.0], &[2.0, 3.0, 2.0], &[1.0, 1.0, 0.0], &[3.0, 5.0, 3.0]).unwrap();
        for v in x {
            assert!((v - 1.0f64).abs() < 1e-14);
        }
    }

    #[test]
    fn complex_system_matches_product() {
        let n = 50;
        let i = Complex64::i();
        let sub: Vec<_> = (0..n).map(|k| Complex64::new(-1.0, 0.1 * k as f64)).collect();
        let sup: Vec<_> = (0..n).map(|k| Complex64::new(-1.0, -0.05 * k as f64)).collect();
        let diag: Vec<_> = (0..n).map(|_| 4.0 + i).collect();
        let xs: Vec<_> = (0..n).map(|k| Complex64::new((k as f64).sin(), (k as f64).cos())).collect();
        let mut rhs = vec![Complex64::default(); n];
        for k in 0..n {
            rhs[k] = diag[k] * xs[k];
            if k > 0 {
                rhs[k] += sub[k] * xs[k - 1];
            }
            if k + 1 < n {
                rhs[k] += sup[k] * xs[k + 1];
            }
        }
        let got = solve_tridiagonal(&sub, &diag, &sup, &rhs).unwrap();
        for (a, b) in got.iter().zip(&xs) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
