//! Damped two-dimensional Newton iteration with parameter continuation.
//!
//! Jacobians are formed by central differences, so callers only supply the
//! residual map `F(λ, u)`.

use crate::error::{Error, Result};
use crate::numerics::RootConfig;

/// Jacobians whose 2-norm condition number exceeds this are treated as folds.
pub const MAX_CONDITION: f64 = 1e12;

pub type Vec2 = [f64; 2];

#[inline]
fn norm_inf(r: Vec2) -> f64 {
    r[0].abs().max(r[1].abs())
}

/// Central-difference Jacobian of `f` at `u`.
pub fn jacobian<F: Fn(Vec2) -> Vec2>(f: &F, u: Vec2) -> [[f64; 2]; 2] {
    let mut jac = [[0.0; 2]; 2];
    for k in 0..2 {
        let h = 1e-7 * u[k].abs().max(1e-2);
        let mut up = u;
        let mut dn = u;
        up[k] += h;
        dn[k] -= h;
        let (fp, fm) = (f(up), f(dn));
        for i in 0..2 {
            jac[i][k] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

/// 2-norm condition number of a 2x2 matrix.
pub fn condition_number(m: [[f64; 2]; 2]) -> f64 {
    let [[a, b], [c, d]] = m;
    let frob2 = a * a + b * b + c * c + d * d;
    let det = (a * d - b * c).abs();
    if det == 0.0 {
        return f64::INFINITY;
    }
    let disc = (frob2 * frob2 - 4.0 * det * det).max(0.0).sqrt();
    let smax2 = 0.5 * (frob2 + disc);
    let smin2 = det * det / smax2;
    (smax2 / smin2).sqrt()
}

/// Solves `f(u) = 0` from `start` with a damped Newton iteration.
pub fn newton_solve<F: Fn(Vec2) -> Vec2>(f: &F, start: Vec2, cfg: &RootConfig) -> Result<Vec2> {
    let mut u = start;
    let mut r = f(u);
    if !(r[0].is_finite() && r[1].is_finite()) {
        return Err(Error::Fold { last_good: f64::NAN });
    }
    for _ in 0..cfg.max_iter {
        if norm_inf(r) <= cfg.abs_tol {
            return Ok(u);
        }
        let jac = jacobian(f, u);
        if !(condition_number(jac) <= MAX_CONDITION) {
            return Err(Error::Fold { last_good: f64::NAN });
        }
        let [[a, b], [c, d]] = jac;
        let det = a * d - b * c;
        let step = [(d * r[0] - b * r[1]) / det, (a * r[1] - c * r[0]) / det];
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = [u[0] - lambda * step[0], u[1] - lambda * step[1]];
            let rt = f(trial);
            if rt[0].is_finite() && rt[1].is_finite() && norm_inf(rt) < norm_inf(r) {
                u = trial;
                r = rt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            // Stagnation: accept if already at the roundoff floor.
            let scale = 1e3 * f64::EPSILON * (1.0 + u[0].abs() + u[1].abs());
            if norm_inf(r) <= cfg.abs_tol.max(scale) {
                return Ok(u);
            }
            return Err(Error::Fold { last_good: f64::NAN });
        }
    }
    if norm_inf(r) <= cfg.abs_tol {
        Ok(u)
    } else {
        Err(Error::Fold { last_good: f64::NAN })
    }
}

/// Follows the solution of `f(λ, u) = 0` across a fixed `schedule` of
/// parameter values, warm-starting each node from the previous one. `start`
/// must solve the system at `schedule[0]`.
pub fn newton2d<F: Fn(f64, Vec2) -> Vec2>(
    f: F,
    start: Vec2,
    schedule: &[f64],
    cfg: &RootConfig,
) -> Result<Vec2> {
    let mut u = start;
    let mut last_good = schedule.first().copied().unwrap_or(f64::NAN);
    for &lambda in schedule {
        let g = |v: Vec2| f(lambda, v);
        u = newton_solve(&g, u, cfg).map_err(|_| Error::Fold { last_good })?;
        last_good = lambda;
    }
    Ok(u)
}

/// Adaptive continuation from `from` to `to`: nominal step `step`, halved on
/// every Newton failure down to `min_step`.
pub fn continuation2d<F: Fn(f64, Vec2) -> Vec2>(
    f: F,
    start: Vec2,
    from: f64,
    to: f64,
    step: f64,
    min_step: f64,
    cfg: &RootConfig,
) -> Result<Vec2> {
    let mut u = start;
    let mut lambda = from;
    let dir = (to - from).signum();
    let mut h = step.abs();
    while (to - lambda) * dir > 0.0 {
        let next = if ((to - lambda) * dir) <= h { to } else { lambda + dir * h };
        let g = |v: Vec2| f(next, v);
        match newton_solve(&g, u, cfg) {
            Ok(v) => {
                u = v;
                lambda = next;
                h = (h * 1.5).min(step.abs());
            }
            Err(_) => {
                h *= 0.5;
                if h < min_step {
                    return Err(Error::Fold { last_good: lambda });
                }
            }
        }
    }
    Ok(u)
}
