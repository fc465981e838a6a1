//! Reference values computed here from scratch (bisection, dense scans,
//! midpoint sums) and compared with the library.

use collapse_kit::eikonal1d::{invariants, on_axis_approx, solve_saturated_approx, z_self_focus_approx};
use collapse_kit::hodograph::{
    boundary_profile, chi_of, invert_to_physical, on_axis_intensity, profile_at, tau_of, z_self_focus,
    ExactSolutionParams,
};
use collapse_kit::nlse2d::{
    chi_root, classify_collapse, classify_collapse_with_oracle, mu_root, profile_at_2d, ring_candidates,
    singularity_position, Regime,
};
use collapse_kit::nonlinearity::{build_s_function, ModelKind, NonlinearityModel, SFunction};
use collapse_kit::profile::{linspace, InitialProfile};
use collapse_kit::validation::{nlse_reference, residual_eikonal, ReferenceConfig};

const E: f64 = std::f64::consts::E;
const LN2: f64 = std::f64::consts::LN_2;

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa0 = f(a);
    assert!(fa0 * f(b) <= 0.0, "no sign change on [{a}, {b}]");
    let neg = fa0 < 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (f(m) < 0.0) == neg {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn scan(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let xs: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    xs.windows(2)
        .filter(|w| f(w[0]) * f(w[1]) < 0.0)
        .map(|w| bisect(&f, w[0], w[1]))
        .collect()
}

/// `(α, β, γ, K)`: `S` and `S_η` for the Gaussian written out by hand.
fn s_pair(c: (f64, f64, f64, f64), eta: f64) -> (f64, f64) {
    let (a, b, g, k) = c;
    (
        a * (-eta).exp() - a * g / k * (-k * eta).exp() + b * (eta - 2.0),
        -a * (-eta).exp() + a * g * (-k * eta).exp() + b,
    )
}

const CASE1: (f64, f64, f64, f64) = (0.01, 0.001, 0.1, 6.0);
const CASE2: (f64, f64, f64, f64) = (0.01, 0.001, 0.6, 8.0);

fn s_of(c: (f64, f64, f64, f64)) -> SFunction {
    SFunction::gaussian_kerr_mpi(c.0, c.1, c.2, c.3 as u32)
}

#[test]
fn nonlinearity_spot_values() {
    let mpi = NonlinearityModel::kerr_mpi(1.0, 0.0, 0.6, 8).unwrap();
    assert!((mpi.varphi(1.0).unwrap() - 0.4).abs() < 1e-15);
    assert!((mpi.big_phi(1.0).unwrap() - 0.925).abs() < 1e-15);
    let sat = NonlinearityModel::saturated(3.0, 0.0, 1.0).unwrap();
    assert!((sat.psi(0.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert!((sat.psi(1.0).unwrap() - 0.9061).abs() < 1e-4);
    let sat1 = NonlinearityModel::saturated(1.0, 0.0, 1.0).unwrap();
    assert!((sat1.phi_lower(2.0).unwrap() - 0.2325).abs() < 1e-4);
    assert!((sat1.big_phi(40.0).unwrap() - 1.0).abs() < 1e-12);
    let kerr = NonlinearityModel::kerr(1.0, 0.0).unwrap();
    assert!((kerr.phi_lower(E).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn kerr_limit_of_s() {
    let m = NonlinearityModel::kerr(0.3, 0.0).unwrap();
    let s = build_s_function(&m, &InitialProfile::Gaussian).unwrap();
    for eta in linspace(0.0, 5.0, 26) {
        assert!((s.value(eta).unwrap() - 0.3 * (-eta).exp()).abs() < 1e-16);
    }
}

#[test]
fn numeric_s_matches_closed_form() {
    let m = NonlinearityModel::kerr_mpi(0.01, 0.001, 0.1, 6).unwrap();
    let gaussian = InitialProfile::custom(|x| (-x * x).exp(), None);
    let s = build_s_function(&m, &gaussian).unwrap();
    let (_, closed) = s_pair(CASE1, 1.0);
    assert!((s.s_eta(1.0).unwrap() - closed).abs() <= 1e-6 * closed.abs());
    assert!((s_pair(CASE1, 0.0).1 + 0.008).abs() < 1e-15);
    assert!((s_of(CASE1).s_eta(0.0).unwrap() + 0.008).abs() < 1e-15);
}

#[test]
fn boundary_and_hodograph_spot_values() {
    let b1 = ExactSolutionParams::new(3.0, 1.0).unwrap();
    assert!((boundary_profile(&b1, 0.0).intensity - (1.0 + LN2)).abs() < 1e-15);
    assert!(boundary_profile(&b1, (2.0 * E - 1.0).sqrt()).intensity.abs() < 1e-15);
    let b2 = ExactSolutionParams::new(3.0, 2.0).unwrap();
    assert!((boundary_profile(&b2, 1.0).intensity - 0.5).abs() < 1e-15);

    assert!((chi_of(&b1, 0.0, 0.0) - (2.0 * E - 1.0).sqrt()).abs() < 1e-14);
    assert!((chi_of(&b1, 1.0, -0.5) - 1.0987).abs() < 1e-4);
    let p = ExactSolutionParams::new(2.0 * E, 1.0).unwrap();
    let tau = tau_of(&p, 2.0, 1.0).unwrap();
    let oracle = ((0.5f64).exp() + (E - 1.0).sqrt()).ln();
    assert!((tau - oracle).abs() < 1e-14 && (tau - 1.0851).abs() < 1e-4);
    assert!(tau_of(&b1, 0.0, (2.0 * E - 1.0).sqrt()).unwrap().abs() < 1e-7);
}

#[test]
fn exact_distances() {
    let a = ExactSolutionParams::new(3.0, 1.0).unwrap();
    let b = ExactSolutionParams::new(0.001, 0.2).unwrap();
    assert!((z_self_focus(&a) - 0.673088).abs() < 1e-6);
    assert!((z_self_focus(&b) - 7.3734).abs() < 1e-4);
    let p = ExactSolutionParams::new(3.0, 1.0).unwrap();
    assert!(on_axis_intensity(&p, 0.67).unwrap() > 10.0 * p.peak());
}

/// `y = 1 + ln 2 + 2 ln cosh(ζy/2)` by bisection.
fn axis_oracle(p: &ExactSolutionParams, z: f64) -> f64 {
    let zeta = z / z_self_focus(p);
    let y0 = 1.0 + LN2;
    let f = |y: f64| y - y0 - 2.0 * (0.5 * zeta * y).cosh().ln();
    bisect(f, y0, y0 / (1.0 - zeta) + 1.0) / p.b
}

#[test]
fn exact_axis_against_scalar_root() {
    for (alpha, b) in [(3.0, 1.0), (0.001, 0.2), (0.5, 3.0)] {
        let p = ExactSolutionParams::new(alpha, b).unwrap();
        for f in [0.1, 0.3, 0.6, 0.9, 0.99] {
            let z = f * z_self_focus(&p);
            let want = axis_oracle(&p, z);
            assert!((on_axis_intensity(&p, z).unwrap() - want).abs() <= 1e-10 * want);
            let h = invert_to_physical(&p, 0.0, z).unwrap();
            assert!((h.intensity - want).abs() <= 1e-9 * want && h.v == 0.0);
        }
    }
    let p = ExactSolutionParams::new(3.0, 1.0).unwrap();
    let i = profile_at(&p, 0.3, &[0.0]).unwrap().intensity[0];
    assert!((i - axis_oracle(&p, 0.3)).abs() < 1e-9);
}

/// The approximate fold: `1 = z k atan(Izc)` with `αz²I² = e^{bI} − 2e`.
fn approx_zsf_oracle(p: &ExactSolutionParams) -> f64 {
    let k = 1.0 / z_self_focus(p);
    let c = (p.alpha / (2.0 * E)).sqrt();
    let y0 = 1.0 + LN2;
    let axis = |z: f64| {
        let f = |i: f64| (p.b * i).exp() - 2.0 * E - p.alpha * z * z * i * i;
        // First root above the peak: walk up until the sign flips.
        let mut hi = y0 / p.b;
        while f(hi) < 0.0 {
            hi *= 1.01;
        }
        bisect(f, y0 / p.b * (1.0 - 1e-12), hi)
    };
    let g = |z: f64| 1.0 - z * k * (axis(z) * z * c).atan();
    let zsf = z_self_focus(p);
    bisect(g, 0.5 * zsf, 1.2 * zsf)
}

#[test]
fn approximate_distance_oracle() {
    for (alpha, b) in [(3.0, 1.0), (0.001, 0.2), (0.1, 0.7)] {
        let p = ExactSolutionParams::new(alpha, b).unwrap();
        let want = approx_zsf_oracle(&p);
        let got = z_self_focus_approx(&p).unwrap();
        assert!((got - want).abs() <= 1e-8 * want, "{got} vs {want}");
        assert!((got / z_self_focus(&p) - 1.03).abs() < 0.01);
    }
    let p = ExactSolutionParams::new(3.0, 1.0).unwrap();
    assert!((z_self_focus_approx(&p).unwrap() - 0.693).abs() < 1e-3);
    let p = ExactSolutionParams::new(0.001, 0.2).unwrap();
    assert!((z_self_focus_approx(&p).unwrap() - 7.595).abs() < 0.01);
}

#[test]
fn approximate_axis_equation() {
    // α = b = z = 1: e^I − 2e − I² = 0, unique root above 1 + ln 2.
    let f = |i: f64| i.exp() - 2.0 * E - i * i;
    let roots = scan(f, 1.0 + LN2, 10.0, 100_000);
    assert_eq!(roots.len(), 1);
    let p = ExactSolutionParams::new(1.0, 1.0).unwrap();
    assert!((on_axis_approx(&p, 1.0).unwrap() - roots[0]).abs() < 1e-10);
    let (i, v) = solve_saturated_approx(&p, 1.0, 0.0).unwrap();
    assert!((i - 1.0).abs() < 1e-15 && v == 0.0);
}

#[test]
fn kerr_third_integral_against_midpoint_sum() {
    let alpha = 0.4;
    let m = NonlinearityModel::kerr(alpha, 0.0).unwrap();
    let (x, z, i, v): (f64, f64, f64, f64) = (0.5, 1.0, 1.5, -0.1);
    let chi = x - v * z;
    let i_star = (-chi * chi).exp();
    // ∫ (1/√t) / √(ln t − ln I*) dt with t = I* + s².
    let n = 1_000_000;
    let top = (i - i_star).sqrt();
    let h = top / n as f64;
    let mut sum = 0.0;
    for j in 0..n {
        let s = (j as f64 + 0.5) * h;
        let t = i_star + s * s;
        sum += 2.0 * s / t.sqrt() / (s * s / i_star).ln_1p().sqrt();
    }
    let want = v / alpha + chi * sum * h / alpha.sqrt();
    let got = invariants(&m, &InitialProfile::Gaussian, x, z, i, v).unwrap().j3;
    assert!((got - want).abs() < 1e-7, "{got} vs {want}");
}

#[test]
fn chi_and_mu_against_dense_scans() {
    let s = s_of(CASE1);
    let (x, z) = (0.5, 5.0);
    let y = |c: f64| c * (1.0 + 2.0 * z * z * s_pair(CASE1, c * c).1) - x;
    let roots = scan(y, 0.0, 5.0, 100_000);
    assert_eq!(roots.len(), 1);
    assert!((chi_root(&s, x, z).unwrap().chi - roots[0]).abs() < 1e-10);

    let chi: f64 = 1.0;
    let (s0, s1) = s_pair(CASE1, chi * chi);
    let target = s0 + 2.0 * z * z * chi * chi * s1 * s1;
    let roots = scan(|m| s_pair(CASE1, m * m).0 - target, 0.0, 5.0, 100_000);
    let best = roots
        .iter()
        .copied()
        .min_by(|a, b| (a - chi).abs().total_cmp(&(b - chi).abs()))
        .unwrap();
    let mu = mu_root(&s, chi, z).unwrap();
    assert!((mu - best).abs() < 1e-8);
    assert!((s_pair(CASE1, mu * mu).0 - target).abs() < 1e-12);
}

#[test]
fn ring_candidates_and_positions() {
    // Pure Kerr: e^{−η}(3 − 2η) = 0.
    let kerr = SFunction::gaussian_kerr_mpi(0.01, 0.0, 0.0, 2);
    let c = ring_candidates(&kerr);
    assert!(c.iter().any(|e| (e - 1.5).abs() < 1e-8));
    assert!(singularity_position(&kerr, 1.5).is_none());

    let c1 = ring_candidates(&s_of(CASE1));
    assert_eq!(c1.len(), 1);
    assert!((c1[0] - 1.5).abs() < 0.05);
    assert!(singularity_position(&s_of(CASE1), c1[0]).is_none());
    let mut c2 = ring_candidates(&s_of(CASE2));
    c2.sort_by(f64::total_cmp);
    assert!(c2.len() == 2 && (c2[0] - 0.11).abs() < 0.01 && (c2[1] - 1.5).abs() < 0.05);
}

/// Smallest `z` at which `χ ↦ χ(1 + 2z²S_η(χ²))` stops increasing on a
/// uniform `χ` grid, and the image `x` of the turning point.
fn fold_oracle(c: (f64, f64, f64, f64), z_lo: f64, z_hi: f64) -> (f64, f64) {
    let chis = linspace(0.0, 3.0, 30_001);
    let d: Vec<f64> = chis.iter().map(|&c0| s_pair(c, c0 * c0).1).collect();
    let first_drop = |z: f64| -> Option<usize> {
        let y: Vec<f64> = chis.iter().zip(&d).map(|(c0, s)| c0 * (1.0 + 2.0 * z * z * s)).collect();
        y.windows(2).position(|w| w[1] <= w[0])
    };
    assert!(first_drop(z_lo).is_none() && first_drop(z_hi).is_some());
    let (mut a, mut b) = (z_lo, z_hi);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if first_drop(m).is_some() {
            b = m;
        } else {
            a = m;
        }
    }
    let j = first_drop(b).unwrap();
    let c0 = chis[j];
    (b, c0 * (1.0 + 2.0 * b * b * d[j]))
}

#[test]
fn ring_collapse_matches_independent_fold_scan() {
    let r = classify_collapse(&s_of(CASE2));
    assert_eq!(r.regime, Regime::RingFirst);
    let first = r.first_singularity.unwrap();
    let (z, x) = fold_oracle(CASE2, 5.0, 12.0);
    assert!((first.z - z).abs() < 1e-3, "{} vs {z}", first.z);
    assert!((first.x - x).abs() < 1e-3, "{} vs {x}", first.x);
    assert!((r.z_axis.unwrap() - 12.91).abs() < 0.01);
    assert!(first.z < r.z_axis.unwrap());
}

#[test]
fn no_collapse_when_diffraction_wins() {
    let s = SFunction::gaussian_kerr_mpi(0.001, 0.01, 0.0, 2);
    let r = classify_collapse_with_oracle(&s, 100.0, 20_001);
    assert_eq!(r.regime, Regime::NoCollapse);
    assert!(r.z_axis.is_none() && r.ring_events.is_empty() && r.diagnostics.fold_onset_oracle.is_none());
}

#[test]
fn worked_case_profiles() {
    let x = linspace(-2.0, 2.0, 401);
    let mut last = 0.0;
    for z in [2.0, 4.0, 6.0, 7.5] {
        let p = profile_at_2d(&s_of(CASE1), &InitialProfile::Gaussian, z, &x);
        assert!(p.intensity[200] > last);
        last = p.intensity[200];
    }
    let p = profile_at_2d(&s_of(CASE2), &InitialProfile::Gaussian, 7.5, &x);
    let arg = (0..x.len()).max_by(|&a, &b| p.intensity[a].total_cmp(&p.intensity[b])).unwrap();
    assert!(x[arg].abs() > 0.0, "maximum on the axis");
}

fn slices(z0: f64, dz: f64, f: impl Fn(f64) -> collapse_kit::profile::BeamProfile) -> Vec<collapse_kit::profile::BeamProfile> {
    [z0 - dz, z0, z0 + dz].into_iter().map(f).collect()
}

#[test]
fn eikonal_residual_of_exact_profiles() {
    let p = ExactSolutionParams::new(3.0, 1.0).unwrap();
    let m = NonlinearityModel::saturated(3.0, 0.0, 1.0).unwrap();
    let x = linspace(0.0, 2.0, 2001);
    let zsf = z_self_focus(&p);
    for f in [0.1, 0.3, 0.5] {
        let sl = slices(f * zsf, 1e-3, |z| profile_at(&p, z, &x).unwrap());
        let r = residual_eikonal(&sl, &m, 1).unwrap();
        assert!(r.max_abs_residual <= 1e-4, "{} at {f} z_sf", r.max_abs_residual);
    }
}

#[test]
fn geometric_optics_residual_is_second_order() {
    let res = |alpha: f64| {
        let m = NonlinearityModel::kerr_mpi(alpha, 0.0, 0.1, 6).unwrap();
        let s = build_s_function(&m, &InitialProfile::Gaussian).unwrap();
        let x = linspace(0.0, 2.0, 2001);
        let sl = slices(1.0, 1e-3, |z| profile_at_2d(&s, &InitialProfile::Gaussian, z, &x));
        residual_eikonal(&sl, &m, 2).unwrap().max_abs_residual
    };
    let (a, b) = (res(0.01), res(0.005));
    assert!(a < 1e-3);
    assert!((a / b - 4.0).abs() < 0.4, "ratio {}", a / b);
}

#[test]
fn reference_grid_refinement_and_power() {
    let model = NonlinearityModel::kerr_mpi(0.01, 0.001, 0.1, 6).unwrap();
    let run = |n_r| {
        let cfg = ReferenceConfig {
            n_r,
            snapshots: vec![1.0, 3.0, 5.0],
            ..ReferenceConfig::default()
        };
        nlse_reference(&model, &InitialProfile::Gaussian, 5.0, &cfg).unwrap()
    };
    let (a, b) = (run(2000), run(4000));
    for (p, q) in a.snapshots.iter().zip(&b.snapshots) {
        assert!((p.intensity[0] / q.intensity[0] - 1.0).abs() < 1e-3);
    }
    assert!(b.power_drift.iter().all(|&d| d < 1e-6));
}

#[test]
fn reference_refuses_to_cross_collapse() {
    let model = NonlinearityModel {
        alpha: 0.01,
        beta: 0.001,
        kind: ModelKind::KerrMpi {
            gamma: 0.1,
            photon_order: 6,
        },
    };
    let err = nlse_reference(&model, &InitialProfile::Gaussian, 9.0, &ReferenceConfig::default()).unwrap_err();
    assert!(matches!(err, collapse_kit::Error::CollapseReached { .. }));
}
