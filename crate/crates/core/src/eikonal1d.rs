//! Approximate planar solutions built from the three first integrals of the
//! eikonal system.
//!
//! With `P = phi_lower` the integrals are
//!
//! ```text
//! J₁ = χ,   J₂ = (α/c) τ² P_I − P,   J₃ = v/α + χ/√(αc) ∫ √P_I dI / √(P + J₂),
//! ```
//!
//! where `τ = zI`, `χ = x − vz`, and `c` is the profile scale
//! `c(χ) = −2χ / (d/dχ P(I₀(χ)))`. Profiles satisfying `P(I₀(χ)) = −χ² + const`
//! have `c = 1`; the saturated boundary profile has `c = 2be`. Matching the
//! integrals on `z = 0` gives the implicit solution used here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hodograph::{z_self_focus, ExactSolutionParams};
use crate::nonlinearity::NonlinearityModel;
use crate::numerics::{
    adaptive_quad, bracket_root, bracket_root_geometric, continuation2d, newton_solve, refine_bracket, QuadConfig,
    RootConfig, Vec2,
};
use crate::profile::{saturated_edge, InitialProfile};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Invariants1D {
    pub j1: f64,
    pub j2: f64,
    pub j3: f64,
}

fn quad_cfg() -> QuadConfig {
    QuadConfig {
        abs_tol: 1e-12,
        rel_tol: 1e-10,
        ..QuadConfig::default()
    }
}

/// Profile scale `c` on the ray that starts at `chi ≥ 0`.
pub fn profile_scale(model: &NonlinearityModel, profile: &InitialProfile, chi: f64) -> Result<f64> {
    let chi = chi.abs();
    let i0 = profile.intensity(chi);
    let p_i = model.phi_lower_slope(i0)?;
    let c = if chi < 1e-6 {
        -2.0 / (p_i * profile.axis_curvature())
    } else {
        -2.0 * chi / (p_i * profile.slope(chi))
    };
    if c.is_finite() && c > 0.0 {
        Ok(c)
    } else {
        Err(Error::Profile(format!("profile is not strictly decreasing at x = {chi}")))
    }
}

/// `∫_{I₀}^{I} √P_I(t) / √(c (P(t) − P(I₀))) dt`, integrated in
/// `s = √(t − I₀)` so the offset never goes through a subtraction.
fn ray_integral(model: &NonlinearityModel, i0: f64, i: f64, c: f64) -> Result<f64> {
    if i <= i0 {
        return Ok(0.0);
    }
    let g = |s: f64| {
        if s == 0.0 {
            return 2.0 / c.sqrt();
        }
        let step = s * s;
        let num = model.phi_lower_slope(i0 + step).unwrap_or(f64::NAN).sqrt();
        let den = (c * model.phi_lower_step(i0, step).unwrap_or(f64::NAN)).sqrt();
        2.0 * s * num / den
    };
    Ok(adaptive_quad(g, 0.0, (i - i0).sqrt(), &quad_cfg())?.value)
}

/// First integrals at a physical point `(x, z)` carrying `(I, v)`.
pub fn invariants(
    model: &NonlinearityModel,
    profile: &InitialProfile,
    x: f64,
    z: f64,
    i: f64,
    v: f64,
) -> Result<Invariants1D> {
    let chi = x - v * z;
    let c = profile_scale(model, profile, chi)?;
    let tau = z * i;
    let j2 = model.alpha / c * tau * tau * model.phi_lower_slope(i)? - model.phi_lower(i)?;
    // Lower limit: where P + J₂ vanishes, i.e. the boundary intensity of the ray.
    let i_star = profile.intensity(chi);
    // `ray_integral` carries the 1/√c factor.
    let integral = ray_integral(model, i_star, i, c)?;
    let j3 = v / model.alpha + chi * integral / model.alpha.sqrt();
    Ok(Invariants1D { j1: chi, j2, j3 })
}

/// Intensity on the ray from `chi ≥ 0` at distance `z`: the first root above
/// `I₀(chi)` of `P(I) − (α/c) z² I² P_I(I) = P(I₀)`.
fn ray_intensity(model: &NonlinearityModel, profile: &InitialProfile, chi: f64, z: f64) -> Result<(f64, f64)> {
    let i0 = profile.intensity(chi);
    let c = profile_scale(model, profile, chi)?;
    if z == 0.0 {
        return Ok((i0, c));
    }
    let g = |i: f64| -> f64 {
        match (model.phi_lower_diff(i0, i), model.phi_lower_slope(i)) {
            (Ok(d), Ok(s)) => d - model.alpha / c * z * z * i * i * s,
            _ => f64::NAN,
        }
    };
    let cap = model.domain().1.min(model.focusing_limit()).min(i0 * 1e6);
    let i = bracket_root_geometric(g, i0, cap, &RootConfig::default())
        .map_err(|_| Error::Multivalued { last_good_z: f64::NAN })?;
    Ok((i, c))
}

/// Phase gradient on the ray from `chi ≥ 0` once its intensity is known.
fn ray_gradient(model: &NonlinearityModel, profile: &InitialProfile, chi: f64, i: f64, c: f64) -> Result<f64> {
    let i0 = profile.intensity(chi);
    Ok(-model.alpha.sqrt() * chi * ray_integral(model, i0, i, c)?)
}

/// `(I, v)` from the implicit first-integral solution, for any model and
/// boundary profile. Nested scalar roots: outer on the ray origin
/// `χ ∈ [|x|, edge]`, inner on `I`.
pub fn solve_generic(model: &NonlinearityModel, profile: &InitialProfile, x: f64, z: f64) -> Result<(f64, f64)> {
    model.validate()?;
    profile.validate()?;
    if !(z >= 0.0) {
        return Err(Error::Input(format!("z must be nonnegative, got {z}")));
    }
    let ax = x.abs();
    let edge = profile.support();
    if edge.is_some_and(|e| ax >= e) {
        return Ok((0.0, 0.0));
    }
    if z == 0.0 {
        return Ok((profile.intensity(ax), 0.0));
    }
    if ax == 0.0 {
        let (i, _) = ray_intensity(model, profile, 0.0, z)?;
        return Ok((i, 0.0));
    }
    // h(χ) = χ + v(χ) z − |x|, negative at χ = |x| for a focusing beam.
    let h = |chi: f64| -> f64 {
        let r = ray_intensity(model, profile, chi, z)
            .and_then(|(i, c)| ray_gradient(model, profile, chi, i, c).map(|v| chi + v * z - ax));
        r.unwrap_or(f64::NAN)
    };
    let cfg = RootConfig {
        bracket_nodes: 64,
        ..RootConfig::default()
    };
    let hi = match edge {
        Some(e) => e * (1.0 - 1e-12),
        None => {
            let mut hi = 2.0 * ax + 1.0;
            while !(h(hi) > 0.0) {
                hi *= 2.0;
                if hi > 1e3 {
                    return Err(Error::Multivalued { last_good_z: f64::NAN });
                }
            }
            hi
        }
    };
    let h0 = h(ax);
    if h0 == 0.0 {
        return Ok((profile.intensity(ax), 0.0));
    }
    let chi = match bracket_root(h, ax, hi, &cfg) {
        Ok(c) => c,
        Err(_) if edge.is_some() => {
            // Rays close to a finite edge carry vanishing intensity.
            let near = hi;
            refine_bracket(&h, ax, near, h0, h(near), &cfg).map_err(|_| Error::Multivalued { last_good_z: f64::NAN })?
        }
        Err(_) => return Err(Error::Multivalued { last_good_z: f64::NAN }),
    };
    let (i, c) = ray_intensity(model, profile, chi, z)?;
    let v = ray_gradient(model, profile, chi, i, c)?;
    Ok((i, x.signum() * v))
}

/// Closed-form saturated case, `((x−vz)² + 1) e^{bI} = αI²z² + 2e` and
/// `v = −√(2α/e)(1/b)(x−vz) arctan(Iz√(α/2e))`, continued in `z` from the
/// boundary values.
pub fn solve_saturated_approx(p: &ExactSolutionParams, x: f64, z: f64) -> Result<(f64, f64)> {
    if !(z >= 0.0) {
        return Err(Error::Input(format!("z must be nonnegative, got {z}")));
    }
    let edge = saturated_edge();
    let ax = x.abs();
    if ax >= edge {
        return Ok((0.0, 0.0));
    }
    let i0 = (1.0 - ((ax * ax + 1.0) / 2.0).ln()) / p.b;
    if z == 0.0 {
        return Ok((i0, 0.0));
    }
    if ax == 0.0 {
        return Ok((on_axis_approx(p, z)?, 0.0));
    }
    let zsf = z_self_focus(p);
    let k = 1.0 / zsf;
    let c = (p.alpha / (2.0 * std::f64::consts::E)).sqrt();
    let ln2 = std::f64::consts::LN_2;
    let residual = |zz: f64, u: Vec2| -> Vec2 {
        let (i, chi) = (u[0], u[1]);
        let s = zz * i * c;
        [
            (chi * chi + 1.0).ln() + p.b * i - 1.0 - ln2 - (s * s).ln_1p(),
            chi * (1.0 - zz * k * s.atan()) - ax,
        ]
    };
    let u = continuation2d(residual, [i0, ax], 0.0, z, zsf / 200.0, zsf * 1e-6, &RootConfig::default()).map_err(
        |e| match e {
            Error::Fold { last_good } => Error::Multivalued { last_good_z: last_good },
            other => other,
        },
    )?;
    let (i, chi) = (u[0].max(0.0), u[1]);
    let v = -k * chi * (z * i * c).atan();
    Ok((i, x.signum() * v))
}

/// On-axis intensity of the approximate saturated solution:
/// `e^{bI} − 2e = αI²z²` with `I ≥ (1 + ln 2)/b`. Finite for every `z`.
pub fn on_axis_approx(p: &ExactSolutionParams, z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::Input(format!("z must be nonnegative, got {z}")));
    }
    let y0 = 1.0 + std::f64::consts::LN_2;
    if z == 0.0 {
        return Ok(y0 / p.b);
    }
    let half_zeta = 0.5 * z / z_self_focus(p);
    let f = |y: f64| y - y0 - (half_zeta * y).powi(2).ln_1p();
    let mut hi = 2.0 * y0;
    while f(hi) <= 0.0 {
        hi *= 2.0;
    }
    Ok(bracket_root_geometric(f, y0, hi, &RootConfig::default())? / p.b)
}

/// Distance at which the approximate solution folds on the axis: the pair
/// `1 = z√(2α/e)(1/b) arctan(Iz√(α/2e))`, `αz²I² = e^{bI} − 2e`.
pub fn z_self_focus_approx(p: &ExactSolutionParams) -> Result<f64> {
    let e = std::f64::consts::E;
    let zsf = z_self_focus(p);
    let k = 1.0 / zsf;
    let c = (p.alpha / (2.0 * e)).sqrt();
    // Unknowns (z, I); the second residual is written in log form.
    let f = |u: Vec2| -> Vec2 {
        let (z, i) = (u[0], u[1]);
        [
            1.0 - z * k * (i * z * c).atan(),
            (p.alpha * z * z * i * i + 2.0 * e).ln() - p.b * i,
        ]
    };
    let u = newton_solve(&f, [zsf, 3.0 / p.b], &RootConfig::default())?;
    if !(u[0] > 0.0 && u[1] > 0.0) {
        return Err(Error::NoRoot { lo: 0.0, hi: f64::INFINITY });
    }
    Ok(u[0])
}
