//! Radial reference integrator for
//!
//! ```text
//! iε E_z + (ε²/2) ∇⊥² E + α Φ(|E|²) E = 0,    ε = √(2β),
//! ```
//!
//! whose eikonal limit with `E = √I e^{iQ/ε}` and `v = Q_x` is the
//! radially symmetric system used by the approximate solution. Strang
//! splitting: a Crank–Nicolson step for the Laplacian between two half
//! steps of the local phase rotation and the absorber.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nlse2d::classify_collapse;
use crate::nonlinearity::{build_s_function, NonlinearityModel};
use crate::numerics::solve_tridiagonal;
use crate::profile::{BeamProfile, InitialProfile};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceConfig {
    pub r_max: f64,
    /// Cells `r_j = (j + ½) dr`, `dr = r_max / n_r`.
    pub n_r: usize,
    /// Initial and largest step.
    pub dz: f64,
    pub dz_min: f64,
    /// Allowed Richardson estimate of the local error, per unit `z`,
    /// relative to the peak amplitude.
    pub step_tol: f64,
    /// Outer fraction of `r_max` covered by the quartic absorber.
    pub absorber_fraction: f64,
    pub absorber_strength: f64,
    pub snapshots: Vec<f64>,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        Self {
            r_max: 10.0,
            n_r: 4000,
            dz: 0.02,
            dz_min: 1e-6,
            step_tol: 1e-7,
            absorber_fraction: 0.2,
            absorber_strength: 5.0,
            snapshots: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRun {
    pub model: NonlinearityModel,
    pub r_max: f64,
    pub n_r: usize,
    pub dr: f64,
    pub dz: f64,
    pub absorber_width: f64,
    /// Slices on `x = 0, r_0, r_1, …` up to the absorber; the axis value is
    /// extrapolated.
    pub snapshots: Vec<BeamProfile>,
    /// `Σ|E|² r dr` inside the absorber at each snapshot.
    pub power: Vec<f64>,
    /// `|P(z) − P(0)| / (P(0) z)` at each snapshot.
    pub power_drift: Vec<f64>,
    pub steps: usize,
    pub rejected_steps: usize,
    pub smallest_dz: f64,
}

struct Stepper<'a> {
    model: &'a NonlinearityModel,
    eps: f64,
    /// Conservative Laplacian `[r₊(E₊−E) − r₋(E−E₋)] / (r dr²)`.
    lo: Vec<f64>,
    di: Vec<f64>,
    up: Vec<f64>,
    damping: Vec<f64>,
}

impl Stepper<'_> {
    fn half_nonlinear(&self, e: &mut [Complex64], h: f64) -> Result<()> {
        let k = if self.eps > 0.0 { self.model.alpha / self.eps } else { 0.0 };
        for (j, ej) in e.iter_mut().enumerate() {
            let phase = if k == 0.0 { 0.0 } else { k * self.model.big_phi(ej.norm_sqr())? * h };
            *ej *= Complex64::from_polar((-self.damping[j] * h).exp(), phase);
        }
        Ok(())
    }

    fn linear(&self, e: &[Complex64], h: f64) -> Result<Vec<Complex64>> {
        let n = e.len();
        let c = Complex64::new(0.0, 0.25 * self.eps * h);
        let one = Complex64::new(1.0, 0.0);
        let mut rhs = Vec::with_capacity(n);
        for j in 0..n {
            let mut l = self.di[j] * e[j];
            if j > 0 {
                l += self.lo[j] * e[j - 1];
            }
            if j + 1 < n {
                l += self.up[j] * e[j + 1];
            }
            rhs.push(e[j] + c * l);
        }
        let sub: Vec<Complex64> = self.lo.iter().map(|&a| -c * a).collect();
        let diag: Vec<Complex64> = self.di.iter().map(|&d| one - c * d).collect();
        let sup: Vec<Complex64> = self.up.iter().map(|&b| -c * b).collect();
        solve_tridiagonal(&sub, &diag, &sup, &rhs)
    }

    fn step(&self, e: &[Complex64], h: f64) -> Result<Vec<Complex64>> {
        let mut w = e.to_vec();
        self.half_nonlinear(&mut w, 0.5 * h)?;
        let mut w = self.linear(&w, h)?;
        self.half_nonlinear(&mut w, 0.5 * h)?;
        Ok(w)
    }
}

fn power(e: &[Complex64], r: &[f64], dr: f64, n_inner: usize) -> f64 {
    e[..n_inner].iter().zip(r).map(|(v, &x)| v.norm_sqr() * x * dr).sum()
}

fn snapshot(e: &[Complex64], r: &[f64], dr: f64, eps: f64, z: f64, n_inner: usize) -> BeamProfile {
    let axis = (9.0 * e[0] - e[1]) / 8.0;
    let mut x = vec![0.0];
    let mut intensity = vec![axis.norm_sqr()];
    let mut v = vec![0.0];
    for j in 0..n_inner {
        // Even extension: the ghost cell at −r₀ equals cell 0.
        let left = if j == 0 { e[0] } else { e[j - 1] };
        let right = e[(j + 1).min(e.len() - 1)];
        let d = (right - left) / (2.0 * dr);
        let i = e[j].norm_sqr();
        x.push(r[j]);
        intensity.push(i);
        v.push(if i > 1e-300 { eps * (e[j].conj() * d).im / i } else { 0.0 });
    }
    BeamProfile::new(z, 2, x, intensity, v)
}

/// Integrates from `z = 0` to `z_end`, recording slices at the requested
/// snapshot positions (and at `z_end`).
pub fn nlse_reference(
    model: &NonlinearityModel,
    profile: &InitialProfile,
    z_end: f64,
    cfg: &ReferenceConfig,
) -> Result<ReferenceRun> {
    if !(model.alpha >= 0.0 && model.beta > 0.0) {
        return Err(Error::InvalidModel("reference integrator needs alpha >= 0 and beta > 0".into()));
    }
    if !(z_end >= 0.0 && cfg.dz > 0.0 && cfg.dz_min > 0.0 && cfg.n_r >= 8 && cfg.step_tol > 0.0) {
        return Err(Error::Input("invalid reference configuration".into()));
    }
    if !(0.0..1.0).contains(&cfg.absorber_fraction) {
        return Err(Error::Input("absorber fraction must lie in [0, 1)".into()));
    }
    profile.validate()?;
    let peak = profile.peak();
    if peak > 0.0 {
        let radius = profile.inverse(peak / std::f64::consts::E)?;
        if cfg.r_max < 3.0 * radius {
            return Err(Error::Input(format!(
                "r_max = {} is below three beam radii ({radius})",
                cfg.r_max
            )));
        }
    }
    if model.alpha > 0.0 && peak > 0.0 {
        let s = build_s_function(model, profile)?;
        if let Some(first) = classify_collapse(&s).first_singularity {
            if z_end >= first.z {
                return Err(Error::CollapseReached {
                    z: z_end,
                    z_collapse: first.z,
                });
            }
        }
    }

    let n = cfg.n_r;
    let dr = cfg.r_max / n as f64;
    let r: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) * dr).collect();
    let r_abs = cfg.r_max * (1.0 - cfg.absorber_fraction);
    let n_inner = r.partition_point(|&x| x < r_abs).max(2);
    let mut lo = vec![0.0; n];
    let mut up = vec![0.0; n];
    let mut di = vec![0.0; n];
    for j in 0..n {
        let a = if j == 0 { 0.0 } else { (r[j] - 0.5 * dr) / (r[j] * dr * dr) };
        let b = (r[j] + 0.5 * dr) / (r[j] * dr * dr);
        lo[j] = a;
        up[j] = if j + 1 < n { b } else { 0.0 };
        di[j] = -(a + b);
    }
    let width = cfg.r_max - r_abs;
    let damping = r
        .iter()
        .map(|&x| {
            if x <= r_abs || width == 0.0 {
                0.0
            } else {
                cfg.absorber_strength * ((x - r_abs) / width).powi(4)
            }
        })
        .collect();
    let eps = (2.0 * model.beta).sqrt();
    let stepper = Stepper {
        model,
        eps,
        lo,
        di,
        up,
        damping,
    };

    let mut targets: Vec<f64> = cfg.snapshots.iter().copied().filter(|&z| z >= 0.0 && z <= z_end).collect();
    targets.push(z_end);
    targets.sort_by(f64::total_cmp);
    targets.dedup();

    let mut e: Vec<Complex64> = r.iter().map(|&x| Complex64::new(profile.intensity(x).sqrt(), 0.0)).collect();
    let p0 = power(&e, &r, dr, n_inner);
    let mut z = 0.0;
    let mut h = cfg.dz;
    let mut run = ReferenceRun {
        model: model.clone(),
        r_max: cfg.r_max,
        n_r: n,
        dr,
        dz: cfg.dz,
        absorber_width: width,
        snapshots: Vec::new(),
        power: Vec::new(),
        power_drift: Vec::new(),
        steps: 0,
        rejected_steps: 0,
        smallest_dz: cfg.dz,
    };
    let record = |e: &[Complex64], z: f64, run: &mut ReferenceRun| {
        let p = power(e, &r, dr, n_inner);
        run.snapshots.push(snapshot(e, &r, dr, eps, z, n_inner));
        run.power.push(p);
        run.power_drift.push(if p0 > 0.0 && z > 0.0 { (p - p0).abs() / (p0 * z) } else { 0.0 });
    };
    for &target in &targets {
        while target - z > 1e-12 * target.max(1.0) {
            let step = h.min(target - z);
            let coarse = stepper.step(&e, step)?;
            let fine = stepper.step(&stepper.step(&e, 0.5 * step)?, 0.5 * step)?;
            let scale = fine.iter().fold(0.0f64, |m, v| m.max(v.norm()));
            let diff = fine.iter().zip(&coarse).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
            let err = if scale > 0.0 { diff / (3.0 * scale) } else { 0.0 };
            let p_before = power(&e, &r, dr, n_inner);
            let p_after = power(&fine, &r, dr, n_inner);
            let jump = if p_before > 0.0 { (p_after - p_before).abs() / p_before } else { 0.0 };
            if err <= cfg.step_tol * step && jump <= 1e-3 {
                e = fine;
                z += step;
                run.steps += 1;
                run.smallest_dz = run.smallest_dz.min(step);
                if err < 0.1 * cfg.step_tol * step {
                    h = (2.0 * h).min(cfg.dz);
                }
            } else {
                run.rejected_steps += 1;
                h = 0.5 * step;
                if h < cfg.dz_min {
                    return Err(Error::Unstable { z, drift: jump });
                }
            }
        }
        z = target;
        record(&e, z, &mut run);
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(beta: f64) -> NonlinearityModel {
        // The validating constructors insist on α > 0.
        NonlinearityModel {
            alpha: 0.0,
            beta,
            kind: crate::nonlinearity::ModelKind::Kerr,
        }
    }

    #[test]
    fn linear_diffraction_law() {
        let beta = 0.001;
        let cfg = ReferenceConfig {
            snapshots: vec![1.0, 2.0, 5.0],
            n_r: 4000,
            ..ReferenceConfig::default()
        };
        let run = nlse_reference(&linear(beta), &InitialProfile::Gaussian, 5.0, &cfg).unwrap();
        for s in &run.snapshots {
            let law = 1.0 / (1.0 + 2.0 * beta * s.z * s.z);
            assert!((s.intensity[0] / law - 1.0).abs() < 1e-6, "{} {}", s.z, s.intensity[0] / law - 1.0);
        }
        assert!(run.power_drift.iter().all(|&d| d < 1e-6), "{:?}", run.power_drift);
    }

    #[test]
    fn zero_field_stays_zero() {
        let zero = InitialProfile::custom(|_| 0.0, None);
        let cfg = ReferenceConfig {
            n_r: 200,
            ..ReferenceConfig::default()
        };
        let m = NonlinearityModel::kerr(0.01, 0.001).unwrap();
        let run = nlse_reference(&m, &zero, 1.0, &cfg).unwrap();
        assert!(run.snapshots[0].intensity.iter().all(|&i| i == 0.0));
    }
}
