use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::tridiag::solve_tridiagonal;

/// Not-a-knot cubic spline: C² everywhere, reproduces cubics exactly, and
/// has a piecewise-constant third derivative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
    /// Running integral from `x[0]` to each knot.
    cumulative: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(Error::Input("spline abscissae and ordinates differ in length".into()));
        }
        if n < 4 {
            return Err(Error::Input("a not-a-knot spline needs at least 4 knots".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Input("spline abscissae must be strictly increasing".into()));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::Input("spline data must be finite".into()));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();

        // Unknowns M_1 .. M_{n-2}; M_0 and M_{n-1} are eliminated with the
        // not-a-knot conditions.
        let k = n - 2;
        let mut sub = vec![0.0; k];
        let mut diag = vec![0.0; k];
        let mut sup = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for j in 0..k {
            let i = j + 1;
            sub[j] = h[i - 1];
            diag[j] = 2.0 * (h[i - 1] + h[i]);
            sup[j] = h[i];
            rhs[j] = 6.0 * (slope[i] - slope[i - 1]);
        }
        let (h0, h1) = (h[0], h[1]);
        diag[0] = (h0 + h1) * (h0 + 2.0 * h1) / h1;
        sup[0] = (h1 * h1 - h0 * h0) / h1;
        let (ha, hb) = (h[n - 3], h[n - 2]);
        sub[k - 1] = (ha * ha - hb * hb) / ha;
        diag[k - 1] = (ha + hb) * (hb + 2.0 * ha) / ha;
        let inner = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;

        let mut m = vec![0.0; n];
        m[1..n - 1].copy_from_slice(&inner);
        m[0] = ((h0 + h1) * m[1] - h0 * m[2]) / h1;
        m[n - 1] = ((ha + hb) * m[n - 2] - hb * m[n - 3]) / ha;

        let mut cumulative = vec![0.0; n];
        for i in 0..n - 1 {
            cumulative[i + 1] = cumulative[i] + h[i] * (y[i] + y[i + 1]) / 2.0 - h[i].powi(3) * (m[i] + m[i + 1]) / 24.0;
        }
        Ok(Self { x, y, m, cumulative })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().expect("non-empty"))
    }

    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.x, &self.y)
    }

    fn locate(&self, t: f64) -> Result<usize> {
        let (lo, hi) = self.domain();
        if !(t >= lo && t <= hi) {
            return Err(Error::Domain { value: t, lo, hi });
        }
        let i = self.x.partition_point(|&xi| xi <= t);
        Ok(i.saturating_sub(1).min(self.x.len() - 2))
    }

    /// Value and derivatives of orders 1..=3 at `t`.
    pub fn eval(&self, t: f64) -> Result<[f64; 4]> {
        let i = self.locate(t)?;
        let h = self.x[i + 1] - self.x[i];
        let s = t - self.x[i];
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let b = (self.y[i + 1] - self.y[i]) / h - h * (2.0 * m0 + m1) / 6.0;
        let c3 = (m1 - m0) / h;
        Ok([
            self.y[i] + s * (b + s * (m0 / 2.0 + s * c3 / 6.0)),
            b + s * (m0 + s * c3 / 2.0),
            m0 + s * c3,
            c3,
        ])
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        Ok(self.eval(t)?[0])
    }

    /// `∫_{x_0}^{t}` of the spline, exact for the piecewise cubic.
    pub fn integral(&self, t: f64) -> Result<f64> {
        let i = self.locate(t)?;
        let h = self.x[i + 1] - self.x[i];
        let s = t - self.x[i];
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let b = (self.y[i + 1] - self.y[i]) / h - h * (2.0 * m0 + m1) / 6.0;
        Ok(self.cumulative[i]
            + s * (self.y[i] + s * (b / 2.0 + s * (m0 / 6.0 + s * (m1 - m0) / (24.0 * h)))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubic() {
        let f = |x: f64| 0.5 * x * x * x - x * x + 2.0;
        let x: Vec<f64> = vec![0.0, 0.3, 0.9, 1.0, 1.7, 2.5];
        let y = x.iter().map(|&v| f(v)).collect();
        let s = CubicSpline::new(x, y).unwrap();
        for &t in &[0.1, 0.95, 1.3, 2.4] {
            let [v, d1, d2, d3] = s.eval(t).unwrap();
            assert!((v - f(t)).abs() < 1e-12);
            assert!((d1 - (1.5 * t * t - 2.0 * t)).abs() < 1e-11);
            assert!((d2 - (3.0 * t - 2.0)).abs() < 1e-10);
            assert!((d3 - 3.0).abs() < 1e-9);
        }
        let exact = |t: f64| 0.125 * t.powi(4) - t.powi(3) / 3.0 + 2.0 * t;
        assert!((s.integral(2.2).unwrap() - exact(2.2)).abs() < 1e-12);
    }

    #[test]
    fn rejects_unsorted() {
        assert!(CubicSpline::new(vec![0.0, 2.0, 1.0, 3.0], vec![0.0; 4]).is_err());
    }

    #[test]
    fn outside_is_domain_error() {
        let s = CubicSpline::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 4.0, 9.0]).unwrap();
        assert!(matches!(s.value(3.5), Err(Error::Domain { .. })));
    }
}
