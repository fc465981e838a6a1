//! Boundary intensity profiles and sampled beam slices.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{bracket_root, finite_diff, CubicSpline, RootConfig};

/// `√(2e − 1)`, the half-width of the saturated boundary profile.
pub fn saturated_edge() -> f64 {
    (2.0 * std::f64::consts::E - 1.0).sqrt()
}

/// Intensity at `z = 0` as a function of the transverse coordinate. Every
/// profile is even in `x`, smooth and non-increasing on `x ≥ 0`.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialProfile {
    /// `e^{−x²}`.
    Gaussian,
    /// `(1 − ln((x²+1)/2)) / b` on `|x| ≤ √(2e−1)`, zero outside.
    SaturatedBoundary { b: f64 },
    /// Spline through samples on `x ≥ 0`; zero beyond the last knot.
    Tabulated { spline: CubicSpline },
    #[serde(skip)]
    Custom {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        support: Option<f64>,
    },
}

impl fmt::Debug for InitialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Gaussian => write!(f, "Gaussian"),
            Self::SaturatedBoundary { b } => write!(f, "SaturatedBoundary {{ b: {b} }}"),
            Self::Tabulated { spline } => write!(f, "Tabulated {{ domain: {:?} }}", spline.domain()),
            Self::Custom { support, .. } => write!(f, "Custom {{ support: {support:?} }}"),
        }
    }
}

impl InitialProfile {
    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F, support: Option<f64>) -> Self {
        Self::Custom { f: Arc::new(f), support }
    }

    /// Builds a tabulated profile from samples `(x_i, I_i)` with `x_0 = 0`.
    pub fn tabulated(x: Vec<f64>, intensity: Vec<f64>) -> Result<Self> {
        if x.first() != Some(&0.0) {
            return Err(Error::Profile("tabulated profile must start at x = 0".into()));
        }
        if intensity.iter().any(|&v| v < 0.0) {
            return Err(Error::Profile("tabulated profile has negative intensity".into()));
        }
        Ok(Self::Tabulated {
            spline: CubicSpline::new(x, intensity)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::SaturatedBoundary { b } if !(*b > 0.0 && b.is_finite()) => {
                Err(Error::Profile(format!("saturated boundary needs b > 0, got {b}")))
            }
            Self::Custom { support: Some(s), .. } if !(*s > 0.0) => {
                Err(Error::Profile("custom support must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// Half-width of the support, `None` for profiles with unbounded support.
    pub fn support(&self) -> Option<f64> {
        match self {
            Self::Gaussian => None,
            Self::SaturatedBoundary { .. } => Some(saturated_edge()),
            Self::Tabulated { spline } => Some(spline.domain().1),
            Self::Custom { support, .. } => *support,
        }
    }

    /// `I₀(x)`; zero outside the support.
    pub fn intensity(&self, x: f64) -> f64 {
        let x = x.abs();
        if let Some(edge) = self.support() {
            if x >= edge {
                return 0.0;
            }
        }
        match self {
            Self::Gaussian => (-x * x).exp(),
            Self::SaturatedBoundary { b } => ((1.0 - ((x * x + 1.0) / 2.0).ln()) / b).max(0.0),
            Self::Tabulated { spline } => spline.value(x).unwrap_or(0.0).max(0.0),
            Self::Custom { f, .. } => f(x),
        }
    }

    pub fn peak(&self) -> f64 {
        self.intensity(0.0)
    }

    /// `dI₀/dx`.
    pub fn slope(&self, x: f64) -> f64 {
        let s = x.signum();
        let a = x.abs();
        match self {
            Self::Gaussian => -2.0 * x * (-x * x).exp(),
            Self::SaturatedBoundary { b } if a < saturated_edge() => -2.0 * x / (b * (x * x + 1.0)),
            Self::SaturatedBoundary { .. } => 0.0,
            Self::Tabulated { spline } => spline.eval(a).map(|d| s * d[1]).unwrap_or(0.0),
            Self::Custom { .. } => {
                let h = 1e-5 * a.max(1.0);
                finite_diff(|t| self.intensity(t), x, 1, h).unwrap_or(0.0)
            }
        }
    }

    /// `d²I₀/dx²` at the axis, where every profile has its maximum.
    pub fn axis_curvature(&self) -> f64 {
        match self {
            Self::Gaussian => -2.0,
            Self::SaturatedBoundary { b } => -2.0 / b,
            Self::Tabulated { spline } => spline.eval(0.0).map(|d| d[2]).unwrap_or(f64::NAN),
            Self::Custom { .. } => finite_diff(|t| self.intensity(t), 0.0, 2, 1e-4).unwrap_or(f64::NAN),
        }
    }

    /// The `x ≥ 0` at which `I₀(x) = intensity`, for `0 < intensity ≤ peak`.
    pub fn inverse(&self, intensity: f64) -> Result<f64> {
        let peak = self.peak();
        if !(intensity > 0.0 && intensity <= peak) {
            return Err(Error::Domain {
                value: intensity,
                lo: 0.0,
                hi: peak,
            });
        }
        match self {
            Self::Gaussian => Ok((-intensity.ln()).max(0.0).sqrt()),
            Self::SaturatedBoundary { b } => Ok((2.0 * (1.0 - b * intensity).exp() - 1.0).max(0.0).sqrt()),
            _ => {
                if intensity == peak {
                    return Ok(0.0);
                }
                let hi = self.support().unwrap_or(50.0);
                let cfg = RootConfig {
                    bracket_nodes: 2048,
                    ..RootConfig::default()
                };
                bracket_root(|x| self.intensity(x) - intensity, 0.0, hi, &cfg)
            }
        }
    }

    /// First and second derivatives in `η = x²` of `ln √N(η)`, used by the
    /// diffraction part of the S-function.
    pub fn log_amplitude_derivs(&self, eta: f64) -> Result<(f64, f64)> {
        match self {
            Self::Gaussian => Ok((-0.5, 0.0)),
            _ => {
                let l = |e: f64| 0.5 * self.intensity(e.max(0.0).sqrt()).ln();
                let h = 2e-3 * eta.abs().max(1.0);
                // One-sided near the axis, where η < 0 is meaningless.
                if eta < h {
                    let (l0, l1, l2, l3) = (l(eta), l(eta + h), l(eta + 2.0 * h), l(eta + 3.0 * h));
                    let d1 = (-3.0 * l0 + 4.0 * l1 - l2) / (2.0 * h);
                    let d2 = (2.0 * l0 - 5.0 * l1 + 4.0 * l2 - l3) / (h * h);
                    return finite_pair(d1, d2, eta);
                }
                // One-sided again at the edge of a compact support.
                if let Some(edge) = self.support() {
                    if eta + 2.0 * h > edge * edge {
                        let (l0, l1, l2, l3) = (l(eta), l(eta - h), l(eta - 2.0 * h), l(eta - 3.0 * h));
                        let d1 = (3.0 * l0 - 4.0 * l1 + l2) / (2.0 * h);
                        let d2 = (2.0 * l0 - 5.0 * l1 + 4.0 * l2 - l3) / (h * h);
                        return finite_pair(d1, d2, eta);
                    }
                }
                let d1 = finite_diff(l, eta, 1, h)?;
                let d2 = finite_diff(l, eta, 2, h)?;
                finite_pair(d1, d2, eta)
            }
        }
    }
}

fn finite_pair(d1: f64, d2: f64, eta: f64) -> Result<(f64, f64)> {
    if d1.is_finite() && d2.is_finite() {
        Ok((d1, d2))
    } else {
        Err(Error::Profile(format!("profile not positive near eta = {eta}")))
    }
}

/// A transverse slice at fixed `z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamProfile {
    pub z: f64,
    /// 1 for the planar problem, 2 for the radially symmetric one.
    pub nu: u8,
    pub x: Vec<f64>,
    pub intensity: Vec<f64>,
    pub phase_gradient: Vec<f64>,
    /// False where the solver could not produce a single-valued point.
    pub valid: Vec<bool>,
}

impl BeamProfile {
    pub fn new(z: f64, nu: u8, x: Vec<f64>, intensity: Vec<f64>, phase_gradient: Vec<f64>) -> Self {
        let valid = vec![true; x.len()];
        Self {
            z,
            nu,
            x,
            intensity,
            phase_gradient,
            valid,
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn all_valid(&self) -> bool {
        self.valid.iter().all(|&v| v)
    }

    /// Writes `x,I,v` rows in scientific notation with 12 significant
    /// digits. Invalid points are written as `NaN`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,I,v")?;
        for i in 0..self.len() {
            let (iv, vv) = if self.valid[i] {
                (self.intensity[i], self.phase_gradient[i])
            } else {
                (f64::NAN, f64::NAN)
            };
            writeln!(w, "{},{},{}", sci(self.x[i]), sci(iv), sci(vv))?;
        }
        Ok(())
    }
}

/// Scientific notation with 12 significant digits.
pub fn sci(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v == 0.0 {
        // Avoid "-0.00000000000e0" for negative zero.
        format!("{:.11e}", 0.0)
    } else {
        format!("{v:.11e}")
    }
}

/// `n` evenly spaced points on `[min, max]`.
pub fn linspace(min: f64, max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..n).map(|i| min + (max - min) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saturated_boundary_values() {
        let p = InitialProfile::SaturatedBoundary { b: 1.0 };
        assert!((p.peak() - (1.0 + 2f64.ln())).abs() < 1e-15);
        assert_eq!(p.intensity(saturated_edge() + 1e-9), 0.0);
        let q = InitialProfile::SaturatedBoundary { b: 2.0 };
        assert!((q.intensity(1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn inverse_round_trip() {
        for p in [InitialProfile::Gaussian, InitialProfile::SaturatedBoundary { b: 0.7 }] {
            for &x in &[0.0, 0.3, 1.1, 1.9] {
                let i = p.intensity(x);
                assert!((p.inverse(i).unwrap() - x).abs() < 1e-7, "{p:?} {x}");
            }
        }
    }

    #[test]
    fn gaussian_log_amplitude_matches_numeric() {
        let num = InitialProfile::custom(|x| (-x * x).exp(), None);
        for &eta in &[0.0, 0.5, 2.0] {
            let (a1, a2) = num.log_amplitude_derivs(eta).unwrap();
            assert!((a1 + 0.5).abs() < 1e-6);
            assert!(a2.abs() < 1e-4);
        }
    }

    #[test]
    fn csv_shape() {
        let p = BeamProfile::new(0.5, 1, vec![0.0, 1.0], vec![1.0, 0.25], vec![0.0, -0.1]);
        let mut out = Vec::new();
        p.write_csv(&mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert_eq!(s.lines().next(), Some("x,I,v"));
        assert_eq!(s.lines().nth(2), Some("1.00000000000e0,2.50000000000e-1,-1.00000000000e-1"));
    }
}
