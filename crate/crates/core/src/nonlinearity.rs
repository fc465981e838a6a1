//! Refractive-index models and the radial S-function.
//!
//! Three functions of intensity are kept apart by name:
//! `varphi = dn/dI`, `big_phi` with `big_phi' = varphi` and `big_phi(0) = 0`,
//! and `phi_lower` with `phi_lower' = varphi / I` and `phi_lower(1) = 0`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{adaptive_quad, CubicSpline, QuadConfig};
use crate::profile::InitialProfile;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    /// `varphi = I e^{−bI}`.
    SaturatedExp { b: f64 },
    /// `varphi = 1`.
    Kerr,
    /// `varphi = 1 − γ I^{K−1}`.
    KerrMpi { gamma: f64, photon_order: u32 },
    /// `varphi` interpolated from samples.
    Tabulated { table: CubicSpline },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonlinearityModel {
    pub alpha: f64,
    pub beta: f64,
    #[serde(flatten)]
    pub kind: ModelKind,
}

impl NonlinearityModel {
    pub fn saturated(alpha: f64, beta: f64, b: f64) -> Result<Self> {
        Self::new(alpha, beta, ModelKind::SaturatedExp { b })
    }

    pub fn kerr(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, ModelKind::Kerr)
    }

    pub fn kerr_mpi(alpha: f64, beta: f64, gamma: f64, photon_order: u32) -> Result<Self> {
        Self::new(alpha, beta, ModelKind::KerrMpi { gamma, photon_order })
    }

    pub fn tabulated(alpha: f64, beta: f64, intensity: Vec<f64>, varphi: Vec<f64>) -> Result<Self> {
        let table = CubicSpline::new(intensity, varphi)?;
        Self::new(alpha, beta, ModelKind::Tabulated { table })
    }

    /// Reads a two-column `I varphi` table. Columns may be separated by
    /// whitespace or commas; `#` starts a comment.
    pub fn parse_table(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if cols.len() != 2 {
                return Err(Error::Input(format!("line {}: expected two columns", lineno + 1)));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Input(format!("line {}: {e}", lineno + 1)))
            };
            xs.push(parse(cols[0])?);
            ys.push(parse(cols[1])?);
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Input("intensity column must be strictly increasing".into()));
        }
        Ok((xs, ys))
    }

    pub fn tabulated_from_file(alpha: f64, beta: f64, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        let (x, y) = Self::parse_table(&text)?;
        Self::tabulated(alpha, beta, x, y)
    }

    pub fn new(alpha: f64, beta: f64, kind: ModelKind) -> Result<Self> {
        let m = Self { alpha, beta, kind };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be nonnegative, got {}", self.beta));
        }
        match &self.kind {
            ModelKind::SaturatedExp { b } if !(*b > 0.0 && b.is_finite()) => bad(format!("b must be positive, got {b}")),
            ModelKind::KerrMpi { gamma, .. } if !(*gamma >= 0.0 && gamma.is_finite()) => {
                bad(format!("gamma must be nonnegative, got {gamma}"))
            }
            ModelKind::KerrMpi { photon_order, .. } if *photon_order < 2 => {
                bad(format!("photon order must be at least 2, got {photon_order}"))
            }
            ModelKind::Tabulated { table } if table.domain().0 < 0.0 => bad("tabulated intensities must be nonnegative".into()),
            _ => Ok(()),
        }
    }

    /// Intensity interval on which the model is evaluated.
    pub fn domain(&self) -> (f64, f64) {
        match &self.kind {
            ModelKind::SaturatedExp { b } => (0.0, 50.0 / b),
            ModelKind::Kerr => (0.0, f64::INFINITY),
            ModelKind::KerrMpi { gamma, photon_order } => {
                if *gamma == 0.0 {
                    (0.0, f64::INFINITY)
                } else {
                    (0.0, 10.0 * gamma.powf(-1.0 / (*photon_order as f64 - 1.0)))
                }
            }
            ModelKind::Tabulated { table } => table.domain(),
        }
    }

    /// Upper end of the focusing range `varphi > 0`, infinite when `varphi`
    /// never changes sign on the domain.
    pub fn focusing_limit(&self) -> f64 {
        match &self.kind {
            ModelKind::KerrMpi { gamma, photon_order } if *gamma > 0.0 => {
                gamma.powf(-1.0 / (*photon_order as f64 - 1.0))
            }
            ModelKind::Tabulated { table } => {
                let (x, y) = table.knots();
                x.iter().zip(y).find(|(_, &v)| v <= 0.0).map_or(f64::INFINITY, |(&i, _)| i)
            }
            _ => f64::INFINITY,
        }
    }

    fn check(&self, i: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if i >= lo && i <= hi {
            Ok(())
        } else {
            Err(Error::Domain { value: i, lo, hi })
        }
    }

    /// `varphi(I)` and its intensity derivative.
    pub fn varphi_with_slope(&self, i: f64) -> Result<(f64, f64)> {
        self.check(i)?;
        Ok(match &self.kind {
            ModelKind::SaturatedExp { b } => {
                let e = (-b * i).exp();
                (i * e, e * (1.0 - b * i))
            }
            ModelKind::Kerr => (1.0, 0.0),
            ModelKind::KerrMpi { gamma, photon_order } => {
                let k = *photon_order as f64;
                (1.0 - gamma * i.powf(k - 1.0), -gamma * (k - 1.0) * i.powf(k - 2.0))
            }
            ModelKind::Tabulated { table } => {
                let d = table.eval(i)?;
                (d[0], d[1])
            }
        })
    }

    pub fn varphi(&self, i: f64) -> Result<f64> {
        Ok(self.varphi_with_slope(i)?.0)
    }

    /// `Φ(I) = ∫₀^I varphi`. Tabulated models integrate from their first
    /// knot.
    pub fn big_phi(&self, i: f64) -> Result<f64> {
        self.check(i)?;
        Ok(match &self.kind {
            ModelKind::SaturatedExp { b } => {
                let bi = b * i;
                // 1 − e^{−x}(1+x) loses digits for small x; use the series.
                if bi < 1e-3 {
                    bi * bi * (0.5 - bi / 3.0 + bi * bi / 8.0) / (b * b)
                } else {
                    (1.0 - (-bi).exp() * (1.0 + bi)) / (b * b)
                }
            }
            ModelKind::Kerr => i,
            ModelKind::KerrMpi { gamma, photon_order } => {
                let k = *photon_order as f64;
                i - gamma * i.powf(k) / k
            }
            ModelKind::Tabulated { table } => table.integral(i)?,
        })
    }

    /// Dimensionless nonlinear index, `n(I) = Φ(I)`.
    pub fn refractive_index(&self, i: f64) -> Result<f64> {
        self.big_phi(i)
    }

    /// `ψ = I / (α varphi)`.
    pub fn psi(&self, i: f64) -> Result<f64> {
        if let ModelKind::SaturatedExp { b } = self.kind {
            self.check(i)?;
            return Ok((b * i).exp() / self.alpha);
        }
        let v = self.varphi(i)?;
        if v == 0.0 {
            return Err(Error::SingularNonlinearity { intensity: i });
        }
        Ok(i / (self.alpha * v))
    }

    /// `σ = ψ / ψ_I = I varphi / (varphi − I varphi_I)`.
    pub fn sigma(&self, i: f64) -> Result<f64> {
        let (v, dv) = self.varphi_with_slope(i)?;
        let den = v - i * dv;
        if den == 0.0 || v == 0.0 {
            return Err(Error::SingularNonlinearity { intensity: i });
        }
        Ok(i * v / den)
    }

    /// Whether `σ = ψ/ψ_I` is affine in `I`.
    pub fn check_saturated_condition(&self) -> bool {
        match &self.kind {
            ModelKind::SaturatedExp { .. } | ModelKind::Kerr => true,
            ModelKind::KerrMpi { gamma, .. } => *gamma == 0.0,
            ModelKind::Tabulated { table } => {
                let (lo, hi) = table.domain();
                let n = 65;
                let h = (hi - lo) / (n - 1) as f64;
                let mut s = Vec::with_capacity(n);
                for k in 0..n {
                    match self.sigma(lo + h * k as f64) {
                        Ok(v) if v.is_finite() => s.push(v),
                        _ => return false,
                    }
                }
                let scale = s.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                s.windows(3).all(|w| ((w[0] - 2.0 * w[1] + w[2]) / (h * h)).abs() <= 1e-9 * scale)
            }
        }
    }

    /// `phi_lower(I) = ∫₁^I varphi(t)/t dt`.
    pub fn phi_lower(&self, i: f64) -> Result<f64> {
        self.check(i)?;
        if !(i > 0.0) {
            return Err(Error::Domain {
                value: i,
                lo: 0.0,
                hi: self.domain().1,
            });
        }
        Ok(match &self.kind {
            ModelKind::SaturatedExp { b } => ((-b).exp() - (-b * i).exp()) / b,
            ModelKind::Kerr => i.ln(),
            ModelKind::KerrMpi { gamma, photon_order } => {
                let k = *photon_order as f64 - 1.0;
                i.ln() - gamma * (i.powf(k) - 1.0) / k
            }
            ModelKind::Tabulated { .. } => {
                self.check(1.0)?;
                let q = adaptive_quad(|t| self.varphi(t).unwrap_or(f64::NAN) / t, 1.0, i, &QuadConfig::default())?;
                q.value
            }
        })
    }

    /// `phi_lower(hi) − phi_lower(lo)`, accurate when the two are close.
    pub fn phi_lower_diff(&self, lo: f64, hi: f64) -> Result<f64> {
        self.phi_lower_step(lo, hi - lo)
    }

    /// `phi_lower(lo + step) − phi_lower(lo)` with `step` taken as exact.
    pub fn phi_lower_step(&self, lo: f64, step: f64) -> Result<f64> {
        let hi = lo + step;
        match self.kind {
            ModelKind::SaturatedExp { b } => {
                self.check(lo)?;
                self.check(hi)?;
                Ok(-(-b * lo).exp() * (-b * step).exp_m1() / b)
            }
            ModelKind::Kerr if lo > 0.0 && hi > 0.0 => Ok((step / lo).ln_1p()),
            ModelKind::KerrMpi { gamma, photon_order } if lo > 0.0 && hi > 0.0 => {
                self.check(lo)?;
                self.check(hi)?;
                let k = photon_order as f64 - 1.0;
                // hi^k − lo^k = lo^k ((1 + step/lo)^k − 1)
                let pow_diff = lo.powf(k) * (k * (step / lo).ln_1p()).exp_m1();
                Ok((step / lo).ln_1p() - gamma * pow_diff / k)
            }
            _ => Ok(self.phi_lower(hi)? - self.phi_lower(lo)?),
        }
    }

    /// `d phi_lower / dI = varphi / I`.
    pub fn phi_lower_slope(&self, i: f64) -> Result<f64> {
        if let ModelKind::SaturatedExp { b } = self.kind {
            self.check(i)?;
            return Ok((-b * i).exp());
        }
        Ok(self.varphi(i)? / i)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SProvenance {
    ClosedFormGaussianKerrMPI,
    Numeric,
}

#[derive(Clone, Debug)]
enum SKind {
    Closed { alpha: f64, beta: f64, gamma: f64, k: f64 },
    Numeric { model: NonlinearityModel, profile: InitialProfile },
}

/// `S(η) = αΦ(N) + β Δ√N / √N` in `η = χ²`, with derivatives up to third
/// order.
#[derive(Clone, Debug)]
pub struct SFunction {
    kind: SKind,
    pub eta_max: f64,
    /// Finite-difference step in `η` used by the numeric variant.
    pub fd_step: Option<f64>,
}

/// Default upper end of the η range scanned for events.
pub const ETA_MAX: f64 = 25.0;

impl SFunction {
    /// Closed form for a Gaussian beam in a Kerr medium with `K`-photon
    /// ionization.
    pub fn gaussian_kerr_mpi(alpha: f64, beta: f64, gamma: f64, photon_order: u32) -> Self {
        Self {
            kind: SKind::Closed {
                alpha,
                beta,
                gamma,
                k: photon_order as f64,
            },
            eta_max: ETA_MAX,
            fd_step: None,
        }
    }

    pub fn provenance(&self) -> SProvenance {
        match self.kind {
            SKind::Closed { .. } => SProvenance::ClosedFormGaussianKerrMPI,
            SKind::Numeric { .. } => SProvenance::Numeric,
        }
    }

    pub fn value(&self, eta: f64) -> Result<f64> {
        match &self.kind {
            SKind::Closed { alpha, beta, gamma, k } => {
                Ok(alpha * (-eta).exp() - alpha * gamma / k * (-k * eta).exp() + beta * (eta - 2.0))
            }
            SKind::Numeric { model, profile } => {
                let eta = eta.max(0.0);
                let n = profile.intensity(eta.sqrt());
                if !(n > 0.0) {
                    return Err(Error::Profile(format!("initial profile vanishes at eta = {eta}")));
                }
                let (l1, l2) = profile.log_amplitude_derivs(eta)?;
                let diffraction = 4.0 * (l1 + eta * (l2 + l1 * l1));
                Ok(model.alpha * model.big_phi(n)? + model.beta * diffraction)
            }
        }
    }

    /// `[S, S_η, S_ηη, S_ηηη]` at `η`.
    pub fn derivs(&self, eta: f64) -> Result<[f64; 4]> {
        match &self.kind {
            SKind::Closed { alpha, beta, gamma, k } => {
                let e1 = alpha * (-eta).exp();
                let ek = alpha * gamma * (-k * eta).exp();
                Ok([
                    e1 - ek / k + beta * (eta - 2.0),
                    -e1 + ek + beta,
                    e1 - k * ek,
                    -e1 + k * k * ek,
                ])
            }
            SKind::Numeric { .. } => {
                let h = self.fd_step.unwrap_or(1e-2);
                // Seven equispaced nodes, kept at η ≥ 0; derivatives of the
                // interpolating polynomial are taken at η itself.
                let c = eta.min(self.eta_max - 3.0 * h).max(3.0 * h);
                let mut nodes = [0.0; 7];
                let mut vals = [0.0; 7];
                for j in 0..7 {
                    nodes[j] = c + (j as f64 - 3.0) * h;
                    vals[j] = self.value(nodes[j])?;
                }
                let w = fornberg_weights(eta, &nodes);
                let mut out = [self.value(eta)?, 0.0, 0.0, 0.0];
                for (k, o) in out.iter_mut().enumerate().skip(1) {
                    *o = w[k].iter().zip(&vals).map(|(a, b)| a * b).sum();
                }
                Ok(out)
            }
        }
    }

    pub fn s_eta(&self, eta: f64) -> Result<f64> {
        Ok(self.derivs(eta)?[1])
    }
}

/// Finite-difference weights for derivatives 0..=3 at `t` on arbitrary
/// nodes (Fornberg's recursion).
fn fornberg_weights(t: f64, x: &[f64; 7]) -> [[f64; 7]; 4] {
    let mut c = [[0.0; 7]; 4];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0] - t;
    for i in 1..7 {
        let mn = i.min(3);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - t;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Assembles `S` for `model` and the boundary profile `N`. Gaussian profiles
/// with Kerr or Kerr+MPI models use the closed form; anything else is
/// evaluated numerically.
pub fn build_s_function(model: &NonlinearityModel, profile: &InitialProfile) -> Result<SFunction> {
    model.validate()?;
    profile.validate()?;
    if let InitialProfile::Gaussian = profile {
        match model.kind {
            ModelKind::Kerr => return Ok(SFunction::gaussian_kerr_mpi(model.alpha, model.beta, 0.0, 2)),
            ModelKind::KerrMpi { gamma, photon_order } => {
                return Ok(SFunction::gaussian_kerr_mpi(model.alpha, model.beta, gamma, photon_order))
            }
            _ => {}
        }
    }
    let eta_max = match profile.support() {
        Some(edge) => (edge * edge * (1.0 - 1e-6)).min(ETA_MAX),
        None => ETA_MAX,
    };
    let s = SFunction {
        kind: SKind::Numeric {
            model: model.clone(),
            profile: profile.clone(),
        },
        eta_max,
        fd_step: Some(1e-2),
    };
    // Surface a non-positive profile at construction rather than mid-scan.
    for k in 0..=64 {
        s.value(eta_max * k as f64 / 64.0)?;
    }
    Ok(s)
}
