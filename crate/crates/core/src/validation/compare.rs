use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::BeamProfile;

/// Comparisons are restricted to `|x| ≤ 2`.
pub const COMPARE_HALF_WIDTH: f64 = 2.0;

/// Relative error norms of `b` against `a`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileErrors {
    pub linf_intensity: f64,
    pub l2_intensity: f64,
    pub linf_v: f64,
    pub l2_v: f64,
    pub points: usize,
}

/// Piecewise-linear interpolation of the valid samples of `p` at `x`;
/// `None` outside the sampled range.
pub fn interpolate(p: &BeamProfile, x: f64) -> Option<(f64, f64)> {
    let idx: Vec<usize> = (0..p.len()).filter(|&i| p.valid[i]).collect();
    let k = idx.partition_point(|&i| p.x[i] < x);
    if k < idx.len() && p.x[idx[k]] == x {
        return Some((p.intensity[idx[k]], p.phase_gradient[idx[k]]));
    }
    if k == 0 || k == idx.len() {
        return None;
    }
    let (i0, i1) = (idx[k - 1], idx[k]);
    let t = (x - p.x[i0]) / (p.x[i1] - p.x[i0]);
    let lerp = |a: &[f64]| a[i0] + t * (a[i1] - a[i0]);
    Some((lerp(&p.intensity), lerp(&p.phase_gradient)))
}

/// Interpolates `b` onto the grid of `a` and returns relative L∞ and L²
/// errors of `I` and `v` over `|x| ≤ 2`. A field that vanishes identically
/// on `a` is compared in absolute terms.
pub fn compare_profiles(a: &BeamProfile, b: &BeamProfile) -> Result<ProfileErrors> {
    if (a.z - b.z).abs() > 1e-12 * a.z.abs().max(1.0) {
        return Err(Error::Input(format!("profiles at different z: {} and {}", a.z, b.z)));
    }
    let mut di = Vec::new();
    let mut dv = Vec::new();
    let mut ri = Vec::new();
    let mut rv = Vec::new();
    for i in 0..a.len() {
        let x = a.x[i];
        if x.abs() > COMPARE_HALF_WIDTH || !a.valid[i] {
            continue;
        }
        if let Some((ib, vb)) = interpolate(b, x) {
            di.push(a.intensity[i] - ib);
            dv.push(a.phase_gradient[i] - vb);
            ri.push(a.intensity[i]);
            rv.push(a.phase_gradient[i]);
        }
    }
    if di.is_empty() {
        return Err(Error::Input("profiles do not overlap on |x| <= 2".into()));
    }
    let linf = |d: &[f64], r: &[f64]| {
        let m = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let e = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if m > 0.0 {
            e / m
        } else {
            e
        }
    };
    let l2 = |d: &[f64], r: &[f64]| {
        let n: f64 = r.iter().map(|v| v * v).sum();
        let e: f64 = d.iter().map(|v| v * v).sum();
        if n > 0.0 {
            (e / n).sqrt()
        } else {
            (e / d.len() as f64).sqrt()
        }
    };
    Ok(ProfileErrors {
        linf_intensity: linf(&di, &ri),
        l2_intensity: l2(&di, &ri),
        linf_v: linf(&dv, &rv),
        l2_v: l2(&dv, &rv),
        points: di.len(),
    })
}
