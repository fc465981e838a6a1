use collapse_kit::eikonal1d::{on_axis_approx, solve_generic, solve_saturated_approx};
use collapse_kit::hodograph::{chi_of, invert_to_physical, on_axis_intensity, tau_of, z_self_focus, ExactSolutionParams};
use collapse_kit::nlse2d::{chi_root, classify_collapse, field_at, mu_root, profile_at_2d, Regime};
use collapse_kit::nonlinearity::{build_s_function, NonlinearityModel, SFunction};
use collapse_kit::numerics::{bracket_root, RootConfig};
use collapse_kit::profile::{linspace, saturated_edge, InitialProfile};
use proptest::prelude::*;

fn case(gamma: f64, k: u32) -> SFunction {
    let m = NonlinearityModel::kerr_mpi(0.01, 0.001, gamma, k).unwrap();
    build_s_function(&m, &InitialProfile::Gaussian).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn psi_times_varphi_is_intensity(alpha in 0.01f64..10.0, b in 0.1f64..5.0, u in 0.001f64..0.999) {
        let m = NonlinearityModel::saturated(alpha, 0.0, b).unwrap();
        let i = u * 10.0 / b;
        let back = m.psi(i).unwrap() * alpha * m.varphi(i).unwrap();
        prop_assert!(rel(back, i) < 1e-12);
    }

    #[test]
    fn index_slope_is_varphi(i in 0.05f64..3.0, gamma in 0.0f64..0.5, k in 2u32..9) {
        let h = 1e-5;
        for m in [
            NonlinearityModel::saturated(1.0, 0.0, 0.7).unwrap(),
            NonlinearityModel::kerr(1.0, 0.0).unwrap(),
            NonlinearityModel::kerr_mpi(1.0, 0.0, gamma, k).unwrap(),
        ] {
            let d = (m.refractive_index(i + h).unwrap() - m.refractive_index(i - h).unwrap()) / (2.0 * h);
            let v = m.varphi(i).unwrap();
            prop_assert!((d - v).abs() <= 1e-6 * v.abs().max(1.0));
        }
    }

    #[test]
    fn phi_lower_step_matches_difference(lo in 0.1f64..4.0, step in 0.01f64..2.0, k in 2u32..9) {
        for m in [
            NonlinearityModel::saturated(2.0, 0.0, 0.5).unwrap(),
            NonlinearityModel::kerr(2.0, 0.0).unwrap(),
            NonlinearityModel::kerr_mpi(2.0, 0.0, 0.01, k).unwrap(),
        ] {
            let direct = m.phi_lower(lo + step).unwrap() - m.phi_lower(lo).unwrap();
            let d = m.phi_lower_step(lo, step).unwrap();
            prop_assert!((d - direct).abs() <= 1e-12 * direct.abs().max(1.0), "{d} vs {direct}");
        }
    }

    #[test]
    fn closed_form_s_derivatives_match_differences(eta in 0.01f64..5.0, gamma in 0.0f64..1.0, k in 2u32..10) {
        let s = SFunction::gaussian_kerr_mpi(0.01, 0.001, gamma, k);
        let h = 1e-4;
        let d = s.derivs(eta).unwrap();
        let dp = s.derivs(eta + h).unwrap();
        let dm = s.derivs(eta - h).unwrap();
        for j in 0..3 {
            let fd = (dp[j] - dm[j]) / (2.0 * h);
            prop_assert!((fd - d[j + 1]).abs() <= 1e-6 * d[j + 1].abs().max(1e-3), "order {} at {eta}", j + 1);
        }
    }

    #[test]
    fn exact_round_trip(alpha in 0.05f64..5.0, b in 0.2f64..3.0, u in -0.98f64..0.98, w in 0.0f64..0.9) {
        let p = ExactSolutionParams::new(alpha, b).unwrap();
        let x = u * saturated_edge();
        let z = w * z_self_focus(&p);
        let h = invert_to_physical(&p, x, z).unwrap();
        let chi = chi_of(&p, h.intensity, h.v);
        let tau = tau_of(&p, h.intensity, chi).unwrap();
        prop_assert!((tau - z * h.intensity).abs() <= 1e-9 * (1.0 + tau.abs()));
        prop_assert!((chi - (x - h.v * z).abs()).abs() <= 1e-9);
    }

    #[test]
    fn boundary_chi_is_the_ray_origin(b in 0.2f64..3.0, u in 0.0f64..1.0) {
        let p = ExactSolutionParams::new(1.0, b).unwrap();
        let chi0 = u * saturated_edge();
        let i0 = InitialProfile::SaturatedBoundary { b }.intensity(chi0);
        prop_assert!((chi_of(&p, i0, 0.0) - chi0).abs() <= 1e-12 * (1.0 + chi0));
    }

    #[test]
    fn generic_boundary_recovery(x in -3.0f64..3.0) {
        let models = [
            (NonlinearityModel::saturated(3.0, 0.0, 1.0).unwrap(), InitialProfile::SaturatedBoundary { b: 1.0 }),
            (NonlinearityModel::kerr(0.5, 0.0).unwrap(), InitialProfile::Gaussian),
            (NonlinearityModel::kerr_mpi(0.5, 0.0, 0.1, 4).unwrap(), InitialProfile::Gaussian),
        ];
        for (m, prof) in &models {
            let (i, v) = solve_generic(m, prof, x, 0.0).unwrap();
            prop_assert!((i - prof.intensity(x)).abs() <= 1e-10);
            prop_assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn planar_solutions_are_symmetric(x in 0.01f64..2.0, w in 0.0f64..0.5) {
        let p = ExactSolutionParams::new(3.0, 1.0).unwrap();
        let m = NonlinearityModel::saturated(3.0, 0.0, 1.0).unwrap();
        let prof = InitialProfile::SaturatedBoundary { b: 1.0 };
        let z = w * z_self_focus(&p);
        let a = solve_saturated_approx(&p, x, z).unwrap();
        let b = solve_saturated_approx(&p, -x, z).unwrap();
        prop_assert!(a.0 == b.0 && a.1 == -b.1);
        let a = solve_generic(&m, &prof, x, z).unwrap();
        let b = solve_generic(&m, &prof, -x, z).unwrap();
        prop_assert!(a.0 == b.0 && a.1 == -b.1);
        let e = invert_to_physical(&p, x, z).unwrap();
        let f = invert_to_physical(&p, -x, z).unwrap();
        prop_assert!((e.intensity - f.intensity).abs() < 1e-14 && (e.v + f.v).abs() < 1e-14);
    }

    #[test]
    fn map_roots_satisfy_their_equations(x in 0.01f64..3.0, w in 0.0f64..0.95, second in any::<bool>()) {
        let s = if second { case(0.6, 8) } else { case(0.1, 6) };
        // Stay below the first singularity of either case.
        let z = w * if second { 7.96 } else { 7.9 };
        let r = chi_root(&s, x, z).unwrap();
        let d = s.derivs(r.chi * r.chi).unwrap();
        prop_assert!((r.chi * (1.0 + 2.0 * z * z * d[1]) - x).abs() <= 1e-10);
        let mu = mu_root(&s, r.chi, z).unwrap();
        let eta = r.chi * r.chi;
        let lhs = s.derivs(mu * mu).unwrap()[0];
        let rhs = d[0] + 2.0 * z * z * eta * d[1] * d[1];
        prop_assert!((lhs - rhs).abs() <= 1e-10);
    }

    #[test]
    fn field_is_even(x in 0.001f64..3.0, w in 0.0f64..0.9) {
        let s = case(0.1, 6);
        let z = w * 7.9;
        let a = field_at(&s, &InitialProfile::Gaussian, x, z).unwrap();
        let b = field_at(&s, &InitialProfile::Gaussian, -x, z).unwrap();
        prop_assert!(a.intensity == b.intensity && a.v == -b.v);
    }

    #[test]
    fn field_boundary_recovery(x in -4.0f64..4.0) {
        let f = field_at(&case(0.6, 8), &InitialProfile::Gaussian, x, 0.0).unwrap();
        prop_assert!((f.intensity - (-x * x).exp()).abs() <= 1e-12 && f.v == 0.0);
    }

    #[test]
    fn kerr_reduction(alpha in 0.002f64..0.1, frac in 0.0f64..0.9) {
        let beta = frac * alpha;
        let m = NonlinearityModel::kerr(alpha, beta).unwrap();
        let r = classify_collapse(&build_s_function(&m, &InitialProfile::Gaussian).unwrap());
        prop_assert_eq!(r.regime, Regime::OnAxis);
        prop_assert!(r.ring_events.is_empty());
        let z = 1.0 / (2.0 * (alpha - beta)).sqrt();
        prop_assert!(rel(r.z_axis.unwrap(), z) < 1e-12);
    }

    #[test]
    fn bracket_root_is_deterministic(c in 0.1f64..10.0) {
        let f = |x: f64| x * x * x - c;
        let cfg = RootConfig::default();
        let a = bracket_root(f, 0.0, 11.0, &cfg).unwrap();
        let b = bracket_root(f, 0.0, 11.0, &cfg).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn on_axis_intensity_increases() {
    for (alpha, b) in [(3.0, 1.0), (0.001, 0.2)] {
        let p = ExactSolutionParams::new(alpha, b).unwrap();
        let zsf = z_self_focus(&p);
        let mut last = 0.0;
        for z in linspace(0.0, 0.99 * zsf, 500) {
            let i = on_axis_intensity(&p, z).unwrap();
            assert!(i > last, "not increasing at z = {z}");
            last = i;
        }
    }
}

#[test]
fn approximate_axis_within_five_percent() {
    for (alpha, b) in [(3.0, 1.0), (0.001, 0.2), (0.3, 2.0)] {
        let p = ExactSolutionParams::new(alpha, b).unwrap();
        let zsf = z_self_focus(&p);
        let worst = linspace(0.0, 0.5 * zsf, 51)
            .into_iter()
            .map(|z| rel(on_axis_approx(&p, z).unwrap(), on_axis_intensity(&p, z).unwrap()))
            .fold(0.0, f64::max);
        assert!(worst <= 0.05, "{worst}");
    }
}

/// `∫ I x dx` on `[0, 6]` by Simpson's rule.
fn power(s: &SFunction, z: f64) -> f64 {
    let x = linspace(0.0, 6.0, 6001);
    let p = profile_at_2d(s, &InitialProfile::Gaussian, z, &x);
    assert!(p.all_valid(), "invalid points at z = {z}");
    let h = x[1] - x[0];
    let f: Vec<f64> = x.iter().zip(&p.intensity).map(|(x, i)| x * i).collect();
    let n = f.len() - 1;
    let inner: f64 = (1..n).map(|j| if j % 2 == 1 { 4.0 * f[j] } else { 2.0 * f[j] }).sum();
    h / 3.0 * (f[0] + inner + f[n])
}

#[test]
fn radial_power_is_conserved() {
    for (s, first) in [(case(0.1, 6), 7.9057), (case(0.6, 8), 7.9662)] {
        let p0 = power(&s, 0.0);
        assert!((p0 - 0.5).abs() < 1e-9);
        for w in [0.2, 0.4, 0.6, 0.8, 0.9] {
            let pz = power(&s, w * first);
            assert!(rel(pz, p0) < 1e-3, "power {pz} at {w} of the first singularity");
        }
    }
}

#[test]
fn classification_is_repeatable() {
    let a = serde_json::to_string(&classify_collapse(&case(0.6, 8))).unwrap();
    let b = serde_json::to_string(&classify_collapse(&case(0.6, 8))).unwrap();
    assert_eq!(a, b);
}
