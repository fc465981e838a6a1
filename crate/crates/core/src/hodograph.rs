//! Exact planar solution for the saturated nonlinearity `ψ = e^{bI}/α`.
//!
//! The solution is given in the hodograph plane `(I, v)` by closed forms for
//! `χ` and `τ`, with physical coordinates recovered through `τ = zI` and
//! `χ = x − vz`. With `s = τ√(α/2e)` and `k = √(2α/e)/b` the pair reduces to
//!
//! ```text
//! (χ² + 1) e^{bI} = 2e cosh² s,    v = −k χ tanh s,
//! ```
//!
//! which is what [`invert_to_physical`] solves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{bracket_root_geometric, continuation2d, Real, RootConfig, Vec2};
use crate::profile::{saturated_edge, BeamProfile};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactSolutionParams {
    pub alpha: f64,
    pub b: f64,
}

impl ExactSolutionParams {
    pub fn new(alpha: f64, b: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidModel(format!("need alpha > 0 and b > 0, got alpha={alpha}, b={b}")));
        }
        Ok(Self { alpha, b })
    }

    /// `√(2α/e) / b`, the reciprocal of the collapse distance.
    pub fn k(&self) -> f64 {
        1.0 / z_self_focus(self)
    }

    pub fn peak(&self) -> f64 {
        (1.0 + std::f64::consts::LN_2) / self.b
    }
}

/// A point of the hodograph plane together with its physical image.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HodographPoint {
    pub intensity: f64,
    pub v: f64,
    pub tau: f64,
    pub chi: f64,
    pub x: f64,
    pub z: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryValue {
    pub intensity: f64,
    pub in_support: bool,
}

/// `I₀(χ) = (1 − ln((χ²+1)/2)) / b` on the support `|χ| ≤ √(2e−1)`.
pub fn boundary_profile(p: &ExactSolutionParams, chi: f64) -> BoundaryValue {
    if chi.abs() > saturated_edge() {
        return BoundaryValue {
            intensity: 0.0,
            in_support: false,
        };
    }
    BoundaryValue {
        intensity: ((1.0 - ((chi * chi + 1.0) / 2.0).ln()) / p.b).max(0.0),
        in_support: true,
    }
}

/// `χ(I, v) ≥ 0`.
pub fn chi_of<T: Real>(p: &ExactSolutionParams, i: T, v: T) -> T {
    let one = T::one();
    let two = T::from_f64(2.0);
    let alpha = T::from_f64(p.alpha);
    let b = T::from_f64(p.b);
    let bbe = b * b * T::e();
    let a = two * (one - b * i).exp() - one + bbe * v * v / (two * alpha);
    let delta = two * bbe * v * v / alpha;
    let root = (a * a + delta).sqrt();
    let chi2 = if a >= T::zero() {
        (a + root) / two
    } else if delta == T::zero() {
        T::zero()
    } else {
        // a + √(a²+δ) = δ / (√(a²+δ) − a), free of cancellation for a < 0.
        delta / (two * (root - a))
    };
    chi2.sqrt()
}

/// `τ(I, χ) = √(2e/α) ln(√q + √(q − 1))` with `q = e^{bI−1}(χ²+1)/2`.
pub fn tau_of<T: Real>(p: &ExactSolutionParams, i: T, chi: T) -> Result<T> {
    let one = T::one();
    let two = T::from_f64(2.0);
    let q = (T::from_f64(p.b) * i - one).exp() * (chi * chi + one) / two;
    let mut excess = q - one;
    if excess < T::zero() {
        if excess.to_f64() > -1e-13 * q.to_f64().max(1.0) {
            excess = T::zero();
        } else {
            return Err(Error::Unreachable {
                intensity: i.to_f64(),
                chi: chi.to_f64(),
            });
        }
    }
    let pref = (two * T::e() / T::from_f64(p.alpha)).sqrt();
    Ok(pref * (q.sqrt() + excess.sqrt()).ln())
}

/// `b √(e / 2α)`.
pub fn z_self_focus(p: &ExactSolutionParams) -> f64 {
    p.b * (std::f64::consts::E / (2.0 * p.alpha)).sqrt()
}

/// `√(2e − 1)` for every `(α, b)` and every `z`.
pub fn beam_edge(_p: &ExactSolutionParams) -> f64 {
    saturated_edge()
}

/// `ln cosh s` without overflow.
pub(crate) fn ln_cosh(s: f64) -> f64 {
    let a = s.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

fn check_below_collapse(p: &ExactSolutionParams, z: f64) -> Result<f64> {
    let zsf = z_self_focus(p);
    if !(z >= 0.0) {
        return Err(Error::Input(format!("z must be nonnegative, got {z}")));
    }
    if z >= zsf {
        return Err(Error::CollapseReached { z, z_collapse: zsf });
    }
    Ok(zsf)
}

/// Intensity on the axis. With `y = bI` and `ζ = z/z_sf` it solves
/// `y = 1 + ln 2 + 2 ln cosh(ζy/2)`, whose root is unique and lies below
/// `(1 + ln 2)/(1 − ζ)`.
pub fn on_axis_intensity(p: &ExactSolutionParams, z: f64) -> Result<f64> {
    let zsf = check_below_collapse(p, z)?;
    let y0 = 1.0 + std::f64::consts::LN_2;
    if z == 0.0 {
        return Ok(y0 / p.b);
    }
    let zeta = z / zsf;
    let f = |y: f64| y - y0 - 2.0 * ln_cosh(0.5 * zeta * y);
    let hi = 1.01 * y0 / (1.0 - zeta) + 1.0;
    let y = bracket_root_geometric(f, y0, hi, &RootConfig::default())?;
    Ok(y / p.b)
}

/// `(I, v)` at `(x, z)`, found by damped Newton in `(I, χ)` continued in `z`
/// from the boundary values.
pub fn invert_to_physical(p: &ExactSolutionParams, x: f64, z: f64) -> Result<HodographPoint> {
    let zsf = check_below_collapse(p, z)?;
    let edge = saturated_edge();
    let ax = x.abs();
    if ax >= edge {
        return Ok(HodographPoint {
            intensity: 0.0,
            v: 0.0,
            tau: 0.0,
            chi: x,
            x,
            z,
        });
    }
    let i0 = boundary_profile(p, ax).intensity;
    if z == 0.0 {
        return Ok(HodographPoint {
            intensity: i0,
            v: 0.0,
            tau: 0.0,
            chi: x,
            x,
            z,
        });
    }
    let k = p.k();
    let c = (p.alpha / (2.0 * std::f64::consts::E)).sqrt();
    let ln2 = std::f64::consts::LN_2;
    let residual = |zz: f64, u: Vec2| -> Vec2 {
        let (i, chi) = (u[0], u[1]);
        let s = zz * i * c;
        [
            (chi * chi + 1.0).ln() + p.b * i - 1.0 - ln2 - 2.0 * ln_cosh(s),
            chi * (1.0 - zz * k * s.tanh()) - ax,
        ]
    };
    let cfg = RootConfig::default();
    let u = continuation2d(residual, [i0, ax], 0.0, z, zsf / 200.0, zsf * 1e-6, &cfg).map_err(|e| match e {
        Error::Fold { last_good } => Error::Multivalued { last_good_z: last_good },
        other => other,
    })?;
    let (i, chi) = (u[0].max(0.0), u[1]);
    let v = -k * chi * (z * i * c).tanh();
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    Ok(HodographPoint {
        intensity: i,
        v: sign * v,
        tau: z * i,
        chi: sign * chi,
        x,
        z,
    })
}

/// `invert_to_physical` over a grid. Points that fail are marked invalid.
pub fn profile_at(p: &ExactSolutionParams, z: f64, x_grid: &[f64]) -> Result<BeamProfile> {
    check_below_collapse(p, z)?;
    let pts: Vec<Option<(f64, f64)>> = x_grid
        .par_iter()
        .map(|&x| invert_to_physical(p, x, z).ok().map(|h| (h.intensity, h.v)))
        .collect();
    let mut prof = BeamProfile::new(
        z,
        1,
        x_grid.to_vec(),
        pts.iter().map(|o| o.map_or(f64::NAN, |t| t.0)).collect(),
        pts.iter().map(|o| o.map_or(f64::NAN, |t| t.1)).collect(),
    );
    prof.valid = pts.iter().map(Option::is_some).collect();
    Ok(prof)
}
