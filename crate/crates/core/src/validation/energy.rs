use crate::error::Result;
use crate::hodograph::{invert_to_physical, ExactSolutionParams};
use crate::profile::{saturated_edge, BeamProfile};

/// Trapezoid integral of `I x^{ν−1}` over the valid nodes with `x ≥ 0`,
/// doubled for the planar problem so that it covers the full line.
pub fn energy_integral(profile: &BeamProfile) -> f64 {
    let pts: Vec<(f64, f64)> = (0..profile.len())
        .filter(|&i| profile.x[i] >= 0.0 && profile.valid[i])
        .map(|i| {
            let x = profile.x[i];
            let w = if profile.nu == 2 { x } else { 1.0 };
            (x, profile.intensity[i] * w)
        })
        .collect();
    let sum: f64 = pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[1].1 + w[0].1)).sum();
    if profile.nu == 2 {
        sum
    } else {
        2.0 * sum
    }
}

/// Where the exact planar solution's intensity reaches zero at `z`, found
/// from interior points only: the quadratic through `I` at
/// `edge − 3δ, edge − 2δ, edge − δ` is continued to its root.
pub fn measured_edge(p: &ExactSolutionParams, z: f64, delta: f64) -> Result<f64> {
    let edge = saturated_edge();
    let s = [-3.0 * delta, -2.0 * delta, -delta];
    let mut y = [0.0; 3];
    for (yk, sk) in y.iter_mut().zip(s) {
        *yk = invert_to_physical(p, edge + sk, z)?.intensity;
    }
    let d1 = (y[1] - y[0]) / delta;
    let d2 = (y[2] - 2.0 * y[1] + y[0]) / (2.0 * delta * delta);
    let poly = |t: f64| y[0] + d1 * (t - s[0]) + d2 * (t - s[0]) * (t - s[1]);
    let slope = |t: f64| d1 + d2 * (2.0 * t - s[0] - s[1]);
    let mut t = 0.0;
    for _ in 0..50 {
        let step = poly(t) / slope(t);
        t -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    Ok(edge + t)
}
