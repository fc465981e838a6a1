//! Approximate radially symmetric solution built on the S-function.
//!
//! The field at `(x, z)` follows from two scalar roots,
//!
//! ```text
//! x = χ (1 + 2z² S_η(χ²)),          S(μ²) = S(χ²) + 2z²χ² S_η(χ²)²,
//! I = N(μ) (χ/x) S_η(χ²)/S_η(μ²),   v = (x − χ)/z.
//! ```
//!
//! The map `χ ↦ x` folds where `1 + 2z² g(η) = 0` with
//! `g = S_η + 2η S_ηη`; the first fold sits either on the axis or at a
//! stationary point of `g`, i.e. a root of `3S_ηη + 2η S_ηηη`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::{SFunction, SProvenance};
use crate::numerics::{all_roots, RootConfig};
use crate::profile::{BeamProfile, InitialProfile};

/// Continuation steps from `z = 0` used by [`chi_root`].
pub const CHI_STEPS: usize = 400;
/// Nodes of the sign scan in [`ring_candidates`].
pub const RING_SCAN_NODES: usize = 10_000;
const MU_SCAN_NODES: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiRoot {
    pub chi: f64,
    /// `dx/dχ` at the root.
    pub slope: f64,
    /// Set when `|dx/dχ| < 1e−6`.
    pub near_fold: bool,
}

fn fold_map(s: &SFunction, chi: f64, z: f64) -> Result<(f64, f64)> {
    let eta = chi * chi;
    let d = s.derivs(eta)?;
    let y = chi * (1.0 + 2.0 * z * z * d[1]);
    let dy = 1.0 + 2.0 * z * z * (d[1] + 2.0 * eta * d[2]);
    Ok((y, dy))
}

fn newton_chi(s: &SFunction, target: f64, z: f64, start: f64) -> Option<f64> {
    let tol = 1e-14 * target.max(1.0);
    let mut chi = start;
    let (mut y, mut dy) = fold_map(s, chi, z).ok()?;
    for _ in 0..60 {
        let r = y - target;
        if r.abs() <= tol {
            return Some(chi);
        }
        if !(dy > 0.0) {
            return None;
        }
        let step = r / dy;
        let mut lambda = 1.0;
        loop {
            let trial = (chi - lambda * step).max(0.0);
            if let Ok((yt, dyt)) = fold_map(s, trial, z) {
                if (yt - target).abs() < r.abs() {
                    chi = trial;
                    y = yt;
                    dy = dyt;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-10 {
                return if r.abs() <= 1e3 * tol { Some(chi) } else { None };
            }
        }
    }
    None
}

/// Solves `x = χ(1 + 2z²S_η(χ²))` for the branch that starts at `χ = x` when
/// `z = 0`, following it through [`CHI_STEPS`] steps in `z` with halving
/// near folds.
pub fn chi_root(s: &SFunction, x: f64, z: f64) -> Result<ChiRoot> {
    if !(z >= 0.0) {
        return Err(Error::Input(format!("z must be nonnegative, got {z}")));
    }
    let ax = x.abs();
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    if ax == 0.0 || z == 0.0 {
        let (_, slope) = fold_map(s, ax, z)?;
        return Ok(ChiRoot {
            chi: x,
            slope,
            near_fold: slope.abs() < 1e-6,
        });
    }
    let nominal = z / CHI_STEPS as f64;
    let min_step = nominal * 1e-9;
    let mut chi = ax;
    let mut zc = 0.0;
    let mut h = nominal;
    while zc < z {
        let next = if z - zc <= h { z } else { zc + h };
        match newton_chi(s, ax, next, chi) {
            Some(c) => {
                chi = c;
                zc = next;
                h = (2.0 * h).min(nominal);
            }
            None => {
                h *= 0.5;
                if h < min_step {
                    return Err(Error::Multivalued { last_good_z: zc });
                }
            }
        }
    }
    let (_, slope) = fold_map(s, chi, z)?;
    Ok(ChiRoot {
        chi: sign * chi,
        slope,
        near_fold: slope.abs() < 1e-6,
    })
}

/// Solves `S(μ²) = S(χ²) + 2z²χ²S_η(χ²)²` for `μ ≥ 0`, taking the root
/// closest to `χ` (the branch through `μ = χ` at `z = 0`).
pub fn mu_root(s: &SFunction, chi: f64, z: f64) -> Result<f64> {
    let chi = chi.abs();
    let eta = chi * chi;
    let d = s.derivs(eta)?;
    let added = 2.0 * z * z * eta * d[1] * d[1];
    if added == 0.0 {
        return Ok(chi);
    }
    let target = d[0] + added;
    if eta < 1e-6 && d[1] != 0.0 {
        // Near the axis S(μ²) − S(χ²) is below the f64 resolution of S, so
        // solve the Taylor form S_η δ + S_ηη δ²/2 = added for δ = μ² − χ²
        // instead of differencing S.
        let lin = added / d[1];
        let q = 2.0 * d[2] * lin / d[1];
        let delta = if q.abs() < 1e-8 {
            lin * (1.0 - 0.25 * q)
        } else if 1.0 + q >= 0.0 {
            2.0 * lin / (1.0 + (1.0 + q).sqrt())
        } else {
            f64::NAN
        };
        let m = eta + delta;
        if m >= 0.0 {
            return Ok(m.sqrt());
        }
    }
    let hi = s.eta_max.sqrt().max(2.0 * chi + 1.0);
    let f = |m: f64| s.value(m * m).map(|v| v - target).unwrap_or(f64::NAN);
    let cfg = RootConfig {
        abs_tol: 1e-15,
        ..RootConfig::default()
    };
    let roots = all_roots(f, 0.0, hi, MU_SCAN_NODES, &cfg);
    roots
        .into_iter()
        .min_by(|a, b| (a - chi).abs().total_cmp(&(b - chi).abs()))
        .ok_or(Error::Unreachable { intensity: f64::NAN, chi })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldPoint {
    pub intensity: f64,
    pub v: f64,
    pub chi: f64,
    pub mu: f64,
    pub near_fold: bool,
}

/// `(I, v)` at `(x, z)`; the axis uses the limit `N(0)/(1 + 2z²S_η(0))`.
pub fn field_at(s: &SFunction, profile: &InitialProfile, x: f64, z: f64) -> Result<FieldPoint> {
    if z == 0.0 {
        return Ok(FieldPoint {
            intensity: profile.intensity(x),
            v: 0.0,
            chi: x,
            mu: x.abs(),
            near_fold: false,
        });
    }
    if x == 0.0 {
        let den = 1.0 + 2.0 * z * z * s.s_eta(0.0)?;
        if !(den > 0.0) {
            return Err(Error::CollapseReached {
                z,
                z_collapse: on_axis_zsf(s).unwrap_or(f64::NAN),
            });
        }
        return Ok(FieldPoint {
            intensity: profile.peak() / den,
            v: 0.0,
            chi: 0.0,
            mu: 0.0,
            near_fold: false,
        });
    }
    if profile.support().is_some() {
        // Beyond the image of the support edge there is no light.
        let edge = s.eta_max.sqrt();
        let (x_edge, _) = fold_map(s, edge, z)?;
        if x.abs() >= x_edge {
            return Ok(FieldPoint {
                intensity: 0.0,
                v: 0.0,
                chi: x,
                mu: x.abs(),
                near_fold: false,
            });
        }
    }
    let root = chi_root(s, x, z)?;
    let chi = root.chi.abs();
    let mu = mu_root(s, chi, z)?;
    let dc = s.derivs(chi * chi)?;
    let dm = s.derivs(mu * mu)?;
    let d0 = s.derivs(0.0)?;
    let tiny = 1e-10 * (d0[1].abs() + d0[2].abs());
    let ratio = if dm[1].abs() > tiny {
        dc[1] / dm[1]
    } else if dc[1].abs() <= 1e3 * tiny {
        // Both sides sit at the minimum of S: removable, the ratio tends to
        // 1/√(1 + 4z²χ²S_ηη).
        1.0 / (1.0 + 4.0 * z * z * chi * chi * dc[2]).sqrt()
    } else {
        return Err(Error::SingularIntensity { x, z });
    };
    let intensity = profile.intensity(mu) * (chi / x.abs()) * ratio;
    Ok(FieldPoint {
        intensity,
        v: (x - root.chi) / z,
        chi: root.chi,
        mu,
        near_fold: root.near_fold,
    })
}

/// `1/√(−2S_η(0))` when `S_η(0) < 0`.
pub fn on_axis_zsf(s: &SFunction) -> Option<f64> {
    let s1 = s.s_eta(0.0).ok()?;
    (s1 < 0.0).then(|| 1.0 / (-2.0 * s1).sqrt())
}

fn ring_condition(s: &SFunction, eta: f64) -> f64 {
    s.derivs(eta).map(|d| 3.0 * d[2] + 2.0 * eta * d[3]).unwrap_or(f64::NAN)
}

/// Roots of `3S_ηη + 2ηS_ηηη` on `(0, η_max]`.
pub fn ring_candidates(s: &SFunction) -> Vec<f64> {
    let cfg = RootConfig::default();
    all_roots(|e| ring_condition(s, e), 0.0, s.eta_max, RING_SCAN_NODES, &cfg)
        .into_iter()
        .filter(|&e| e > 0.0)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    pub x: f64,
    pub z: f64,
}

/// Position of the fold born at `η_cr`:
/// `z² = −1/(2(S_η + 2ηS_ηη))`, `x = 2η^{3/2} S_ηη/(S_η + 2ηS_ηη)`.
/// `None` when `z²` would be negative.
pub fn singularity_position(s: &SFunction, eta_cr: f64) -> Option<Singularity> {
    let d = s.derivs(eta_cr).ok()?;
    let g = d[1] + 2.0 * eta_cr * d[2];
    (g < 0.0).then(|| Singularity {
        z: (-0.5 / g).sqrt(),
        x: 2.0 * eta_cr.powf(1.5) * d[2] / g,
    })
}

/// The same position evaluated with the η factors dropped, as the formula
/// appears in print: `z² = −1/(2(S_η + 2S_ηη))`, `x = 2η^{1/2} S_ηη/(S_η + 2S_ηη)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrintedPosition {
    pub z: Option<f64>,
    pub x: f64,
}

pub fn printed_singularity_position(s: &SFunction, eta_cr: f64) -> Option<PrintedPosition> {
    let d = s.derivs(eta_cr).ok()?;
    let g = d[1] + 2.0 * d[2];
    Some(PrintedPosition {
        z: (g < 0.0).then(|| (-0.5 / g).sqrt()),
        x: 2.0 * eta_cr.sqrt() * d[2] / g,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    NoCollapse,
    OnAxis,
    RingFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingEvent {
    pub eta_cr: f64,
    pub x_ring: f64,
    pub z_ring: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateDiagnostic {
    pub eta_cr: f64,
    /// `|3S_ηη + 2ηS_ηηη|` at the polished root.
    pub residual: f64,
    /// Scan cell that bracketed the root.
    pub bracket: [f64; 2],
    /// True where `S_η + 2ηS_ηη` has a local minimum, i.e. a fold is born.
    pub fold_onset: bool,
    /// Corrected formula; `None` when imaginary.
    pub corrected: Option<Singularity>,
    pub printed_formula: Option<PrintedPosition>,
}

/// First non-monotonicity of `χ ↦ χ(1 + 2z²S_η(χ²))` on a dense grid,
/// located by bisection in `z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldOnset {
    pub z: f64,
    pub x: f64,
    pub chi: f64,
    pub chi_nodes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub provenance: SProvenance,
    pub s_eta_axis: f64,
    pub eta_max: f64,
    pub scan_nodes: usize,
    pub candidates: Vec<CandidateDiagnostic>,
    pub fold_onset_oracle: Option<FoldOnset>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub regime: Regime,
    pub z_axis: Option<f64>,
    pub ring_events: Vec<RingEvent>,
    pub first_singularity: Option<Singularity>,
    pub diagnostics: Diagnostics,
}

fn is_fold_onset(s: &SFunction, eta: f64) -> bool {
    let d = 1e-4 * eta.max(1e-2);
    ring_condition(s, eta - d) < 0.0 && ring_condition(s, eta + d) > 0.0
}

/// Axis event, ring candidates and their positions; the regime is that of
/// the smallest real `z`.
pub fn classify_collapse(s: &SFunction) -> CollapseReport {
    let z_axis = on_axis_zsf(s);
    let cell = s.eta_max / (RING_SCAN_NODES - 1) as f64;
    let mut candidates = Vec::new();
    let mut ring_events = Vec::new();
    for eta in ring_candidates(s) {
        let corrected = singularity_position(s, eta);
        let fold_onset = is_fold_onset(s, eta);
        let lo = (eta / cell).floor() * cell;
        candidates.push(CandidateDiagnostic {
            eta_cr: eta,
            residual: ring_condition(s, eta).abs(),
            bracket: [lo, lo + cell],
            fold_onset,
            corrected,
            printed_formula: printed_singularity_position(s, eta),
        });
        if let (Some(p), true) = (corrected, fold_onset) {
            ring_events.push(RingEvent {
                eta_cr: eta,
                x_ring: p.x,
                z_ring: p.z,
            });
        }
    }
    let ring_first = ring_events.iter().min_by(|a, b| a.z_ring.total_cmp(&b.z_ring)).copied();
    let (regime, first_singularity) = match (z_axis, ring_first) {
        (None, None) => (Regime::NoCollapse, None),
        (Some(za), Some(r)) if r.z_ring < za => (Regime::RingFirst, Some(Singularity { x: r.x_ring, z: r.z_ring })),
        (None, Some(r)) => (Regime::RingFirst, Some(Singularity { x: r.x_ring, z: r.z_ring })),
        (Some(za), _) => (Regime::OnAxis, Some(Singularity { x: 0.0, z: za })),
    };
    CollapseReport {
        regime,
        z_axis,
        ring_events,
        first_singularity,
        diagnostics: Diagnostics {
            provenance: s.provenance(),
            s_eta_axis: s.s_eta(0.0).unwrap_or(f64::NAN),
            eta_max: s.eta_max,
            scan_nodes: RING_SCAN_NODES,
            candidates,
            fold_onset_oracle: None,
        },
    }
}

/// [`classify_collapse`] plus the independent [`fold_onset_scan`].
pub fn classify_collapse_with_oracle(s: &SFunction, z_max: f64, chi_nodes: usize) -> CollapseReport {
    let mut r = classify_collapse(s);
    r.diagnostics.fold_onset_oracle = fold_onset_scan(s, z_max, chi_nodes);
    r
}

/// Brute-force fold locator: the smallest `z ≤ z_max` at which the sampled
/// map `χ ↦ χ(1 + 2z²S_η(χ²))` on `χ ∈ [0, √η_max]` stops increasing.
pub fn fold_onset_scan(s: &SFunction, z_max: f64, chi_nodes: usize) -> Option<FoldOnset> {
    let n = chi_nodes.max(3);
    let top = s.eta_max.sqrt();
    let chis: Vec<f64> = (0..n).map(|i| top * i as f64 / (n - 1) as f64).collect();
    let s1: Vec<f64> = chis.iter().map(|c| s.s_eta(c * c).unwrap_or(f64::NAN)).collect();
    let min_step = |z: f64| -> (f64, usize) {
        let zz = 2.0 * z * z;
        let mut best = (f64::INFINITY, 0);
        let mut prev = 0.0;
        for i in 1..n {
            let y = chis[i] * (1.0 + zz * s1[i]);
            let d = y - prev;
            if d < best.0 {
                best = (d, i);
            }
            prev = y;
        }
        best
    };
    if min_step(z_max).0 > 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (0.0, z_max);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if min_step(mid).0 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (_, i) = min_step(hi);
    // Midpoint of the offending cell.
    let chi = 0.5 * (chis[i - 1] + chis[i]);
    let eta = chi * chi;
    let x = chi * (1.0 + 2.0 * hi * hi * s.s_eta(eta).unwrap_or(f64::NAN));
    Some(FoldOnset {
        z: hi,
        x: x.max(0.0),
        chi,
        chi_nodes: n,
    })
}

/// [`field_at`] over a grid; failures mark points invalid.
pub fn profile_at_2d(s: &SFunction, profile: &InitialProfile, z: f64, x_grid: &[f64]) -> BeamProfile {
    let pts: Vec<Option<(f64, f64)>> = x_grid
        .par_iter()
        .map(|&x| field_at(s, profile, x, z).ok().map(|f| (f.intensity, f.v)))
        .collect();
    let mut prof = BeamProfile::new(
        z,
        2,
        x_grid.to_vec(),
        pts.iter().map(|o| o.map_or(f64::NAN, |t| t.0)).collect(),
        pts.iter().map(|o| o.map_or(f64::NAN, |t| t.1)).collect(),
    );
    prof.valid = pts.iter().map(Option::is_some).collect();
    prof
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case1() -> SFunction {
        SFunction::gaussian_kerr_mpi(0.01, 0.001, 0.1, 6)
    }

    fn case2() -> SFunction {
        SFunction::gaussian_kerr_mpi(0.01, 0.001, 0.6, 8)
    }

    #[test]
    fn axis_distances() {
        assert!((on_axis_zsf(&case1()).unwrap() - 7.906).abs() < 1e-3);
        assert!((on_axis_zsf(&case2()).unwrap() - 12.91).abs() < 1e-2);
        assert!(on_axis_zsf(&SFunction::gaussian_kerr_mpi(0.001, 0.01, 0.0, 2)).is_none());
    }

    #[test]
    fn candidates() {
        let c1 = ring_candidates(&case1());
        assert_eq!(c1.len(), 1);
        assert!((c1[0] - 1.5).abs() < 0.05);
        assert!(singularity_position(&case1(), c1[0]).is_none());
        let c2 = ring_candidates(&case2());
        assert_eq!(c2.len(), 2);
        assert!((c2[0] - 0.11).abs() < 0.01 && (c2[1] - 1.5).abs() < 0.05);
        let kerr = ring_candidates(&SFunction::gaussian_kerr_mpi(0.01, 0.0, 0.0, 2));
        assert_eq!(kerr.len(), 1);
        assert!((kerr[0] - 1.5).abs() < 1e-10);
    }

    #[test]
    fn classification() {
        let r1 = classify_collapse(&case1());
        assert_eq!(r1.regime, Regime::OnAxis);
        let r2 = classify_collapse(&case2());
        assert_eq!(r2.regime, Regime::RingFirst);
        let first = r2.first_singularity.unwrap();
        assert!(first.z > 7.9 && first.z < 8.5);
        let r3 = classify_collapse(&SFunction::gaussian_kerr_mpi(0.001, 0.01, 0.0, 2));
        assert_eq!(r3.regime, Regime::NoCollapse);
        assert!(r3.ring_events.is_empty() && r3.z_axis.is_none());
    }

    #[test]
    fn oracle_agrees_case2() {
        let s = case2();
        let r = classify_collapse(&s);
        let o = fold_onset_scan(&s, 100.0, 200_001).unwrap();
        let f = r.first_singularity.unwrap();
        assert!((o.z - f.z).abs() < 1e-3 && (o.x - f.x).abs() < 1e-3, "{o:?} {f:?}");
    }

    #[test]
    fn axis_field_limit() {
        let s = case1();
        let g = InitialProfile::Gaussian;
        let f = field_at(&s, &g, 0.0, 5.0).unwrap();
        assert!((f.intensity - 1.0 / 0.6).abs() < 1e-12);
        let near = field_at(&s, &g, 1e-8, 5.0).unwrap();
        assert!((near.intensity / f.intensity - 1.0).abs() < 1e-6);
    }

    #[test]
    fn roots_satisfy_their_equations() {
        let s = case1();
        let (x, z) = (0.5, 5.0);
        let c = chi_root(&s, x, z).unwrap();
        let (y, _) = fold_map(&s, c.chi, z).unwrap();
        assert!((y - x).abs() < 1e-10);
        let mu = mu_root(&s, 1.0, 5.0).unwrap();
        let d = s.derivs(1.0).unwrap();
        let target = d[0] + 2.0 * 25.0 * d[1] * d[1];
        assert!((s.value(mu * mu).unwrap() - target).abs() < 1e-12);
    }

    #[test]
    fn boundary_recovery() {
        let f = field_at(&case2(), &InitialProfile::Gaussian, 0.7, 0.0).unwrap();
        assert_eq!((f.intensity, f.v), ((-0.49f64).exp(), 0.0));
    }
}
