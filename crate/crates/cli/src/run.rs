use std::path::PathBuf;

use collapse_kit::eikonal1d::{on_axis_approx, solve_generic, solve_saturated_approx, z_self_focus_approx};
use collapse_kit::hodograph::{self, on_axis_intensity, z_self_focus, ExactSolutionParams};
use collapse_kit::nlse2d::{classify_collapse, classify_collapse_with_oracle, field_at, profile_at_2d, CollapseReport};
use collapse_kit::nonlinearity::{build_s_function, ModelKind, NonlinearityModel};
use collapse_kit::profile::{linspace, saturated_edge, BeamProfile, InitialProfile};
use collapse_kit::validation::{
    compare_profiles, energy_integral, hodograph_convergence, interpolate, measured_edge, nlse_reference,
    residual_eikonal, residual_hodograph, HodographCheck, HodographGrid, ReferenceConfig, ResidualReport,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Battery, CommandKind, Format, RunConfig, Solver};
use crate::render;
use crate::{CliError, Outcome};

/// Nodes of the fold-onset scan used in reports.
pub const ORACLE_CHI_NODES: usize = 200_001;

fn exact_params(model: &NonlinearityModel) -> Result<ExactSolutionParams, CliError> {
    match model.kind {
        ModelKind::SaturatedExp { b } => Ok(ExactSolutionParams::new(model.alpha, b)?),
        _ => Err(CliError::Usage("this solver needs the saturated model".into())),
    }
}

fn point_profile<F>(z: f64, nu: u8, x: &[f64], f: F) -> BeamProfile
where
    F: Fn(f64) -> collapse_kit::Result<(f64, f64)> + Sync,
{
    let pts: Vec<Option<(f64, f64)>> = x.par_iter().map(|&t| f(t).ok()).collect();
    let mut p = BeamProfile::new(
        z,
        nu,
        x.to_vec(),
        pts.iter().map(|o| o.map_or(f64::NAN, |t| t.0)).collect(),
        pts.iter().map(|o| o.map_or(f64::NAN, |t| t.1)).collect(),
    );
    p.valid = pts.iter().map(Option::is_some).collect();
    p
}

fn reference_config(cfg: &RunConfig, snapshots: Vec<f64>) -> ReferenceConfig {
    ReferenceConfig {
        snapshots,
        ..cfg.reference.clone()
    }
}

/// Reference slices resampled on `x`, odd extension for `v`.
fn resample(snap: &BeamProfile, x: &[f64]) -> BeamProfile {
    let pts: Vec<Option<(f64, f64)>> = x
        .iter()
        .map(|&t| interpolate(snap, t.abs()).map(|(i, v)| (i, if t < 0.0 { -v } else { v })))
        .collect();
    let mut p = BeamProfile::new(
        snap.z,
        2,
        x.to_vec(),
        pts.iter().map(|o| o.map_or(f64::NAN, |t| t.0)).collect(),
        pts.iter().map(|o| o.map_or(f64::NAN, |t| t.1)).collect(),
    );
    p.valid = pts.iter().map(Option::is_some).collect();
    p
}

fn profiles(cfg: &RunConfig) -> Result<Vec<BeamProfile>, CliError> {
    let x = linspace(cfg.x_grid.min, cfg.x_grid.max, cfg.x_grid.n);
    match cfg.solver {
        Solver::Exact1d => {
            let p = exact_params(&cfg.model)?;
            cfg.z_list
                .iter()
                .map(|&z| hodograph::profile_at(&p, z, &x).map_err(CliError::from))
                .collect()
        }
        Solver::Approx1d => Ok(cfg
            .z_list
            .iter()
            .map(|&z| match cfg.model.kind {
                ModelKind::SaturatedExp { b } if matches!(cfg.profile, InitialProfile::SaturatedBoundary { .. }) => {
                    let p = ExactSolutionParams { alpha: cfg.model.alpha, b };
                    point_profile(z, 1, &x, |t| solve_saturated_approx(&p, t, z))
                }
                _ => point_profile(z, 1, &x, |t| solve_generic(&cfg.model, &cfg.profile, t, z)),
            })
            .collect()),
        Solver::Approx2d => {
            let s = build_s_function(&cfg.model, &cfg.profile)?;
            Ok(cfg.z_list.iter().map(|&z| profile_at_2d(&s, &cfg.profile, z, &x)).collect())
        }
        Solver::Reference => {
            let z_end = cfg.z_list.iter().copied().fold(0.0, f64::max);
            let run = nlse_reference(&cfg.model, &cfg.profile, z_end, &reference_config(cfg, cfg.z_list.clone()))?;
            Ok(cfg
                .z_list
                .iter()
                .map(|&z| {
                    let snap = run.snapshots.iter().find(|s| s.z == z).expect("snapshot recorded");
                    resample(snap, &x)
                })
                .collect())
        }
    }
}

/// `(z, I, error)`; `I` is `None` where the solver failed.
pub(crate) type AxisPoint = (f64, Option<f64>, Option<String>);

fn on_axis(cfg: &RunConfig) -> Result<Vec<AxisPoint>, CliError> {
    let point = |r: collapse_kit::Result<f64>| match r {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let rows = match cfg.solver {
        Solver::Exact1d => {
            let p = exact_params(&cfg.model)?;
            cfg.z_list.iter().map(|&z| point(on_axis_intensity(&p, z))).collect::<Vec<_>>()
        }
        Solver::Approx1d => cfg
            .z_list
            .iter()
            .map(|&z| match cfg.model.kind {
                ModelKind::SaturatedExp { b } if matches!(cfg.profile, InitialProfile::SaturatedBoundary { .. }) => {
                    point(on_axis_approx(&ExactSolutionParams { alpha: cfg.model.alpha, b }, z))
                }
                _ => point(solve_generic(&cfg.model, &cfg.profile, 0.0, z).map(|t| t.0)),
            })
            .collect(),
        Solver::Approx2d => {
            let s = build_s_function(&cfg.model, &cfg.profile)?;
            cfg.z_list
                .iter()
                .map(|&z| point(field_at(&s, &cfg.profile, 0.0, z).map(|f| f.intensity)))
                .collect()
        }
        Solver::Reference => {
            let z_end = cfg.z_list.iter().copied().fold(0.0, f64::max);
            let run = nlse_reference(&cfg.model, &cfg.profile, z_end, &reference_config(cfg, cfg.z_list.clone()))?;
            cfg.z_list
                .iter()
                .map(|&z| (run.snapshots.iter().find(|s| s.z == z).map(|s| s.intensity[0]), None))
                .collect()
        }
    };
    Ok(cfg.z_list.iter().zip(rows).map(|(&z, (i, e))| (z, i, e)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Distance {
    pub method: String,
    pub z: f64,
    pub x: Option<f64>,
}

fn distances(cfg: &RunConfig) -> Result<Vec<Distance>, CliError> {
    let row = |m: &str, z: f64, x: Option<f64>| Distance {
        method: m.into(),
        z,
        x,
    };
    Ok(match cfg.solver {
        Solver::Exact1d => vec![row("exact1d", z_self_focus(&exact_params(&cfg.model)?), Some(0.0))],
        Solver::Approx1d => vec![row("approx1d", z_self_focus_approx(&exact_params(&cfg.model)?)?, Some(0.0))],
        _ => {
            let s = build_s_function(&cfg.model, &cfg.profile)?;
            let r = classify_collapse(&s);
            let mut out = Vec::new();
            if let Some(z) = r.z_axis {
                out.push(row("approx2d-axis", z, Some(0.0)));
            }
            if let Some(e) = r.ring_events.iter().min_by(|a, b| a.z_ring.total_cmp(&b.z_ring)) {
                out.push(row("approx2d-ring", e.z_ring, Some(e.x_ring)));
            }
            out
        }
    })
}

fn classify(cfg: &RunConfig, model: &NonlinearityModel) -> Result<CollapseReport, CliError> {
    let s = build_s_function(model, &cfg.profile)?;
    Ok(if cfg.oracle {
        classify_collapse_with_oracle(&s, cfg.oracle_z_max, ORACLE_CHI_NODES)
    } else {
        classify_collapse(&s)
    })
}

fn with_param(model: &NonlinearityModel, name: &str, v: f64) -> Result<NonlinearityModel, String> {
    let mut m = model.clone();
    match (name, &mut m.kind) {
        ("alpha", _) => m.alpha = v,
        ("beta", _) => m.beta = v,
        ("b", ModelKind::SaturatedExp { b }) => *b = v,
        ("gamma", ModelKind::KerrMpi { gamma, .. }) => *gamma = v,
        ("K", ModelKind::KerrMpi { photon_order, .. }) if v >= 0.0 => *photon_order = v as u32,
        _ => return Err(format!("parameter {name} = {v} does not apply to this model")),
    }
    m.validate().map_err(|e| e.to_string())?;
    Ok(m)
}

/// Rows in lexicographic order of the ranges as given.
pub(crate) fn sweep_tuples(cfg: &RunConfig) -> Vec<Vec<f64>> {
    let mut tuples = vec![Vec::new()];
    for r in &cfg.sweep {
        let vals = r.values();
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                vals.iter().map(move |&v| {
                    let mut n = t.clone();
                    n.push(v);
                    n
                })
            })
            .collect();
    }
    tuples
}

pub(crate) type SweepRow = (Vec<f64>, Result<CollapseReport, String>);

fn sweep(cfg: &RunConfig) -> Vec<SweepRow> {
    sweep_tuples(cfg)
        .into_par_iter()
        .map(|t| {
            let mut m = Ok(cfg.model.clone());
            for (r, &v) in cfg.sweep.iter().zip(&t) {
                m = m.and_then(|m| with_param(&m, &r.name, v));
            }
            let rep = m.and_then(|m| classify(cfg, &m).map_err(|e| e.to_string()));
            (t, rep)
        })
        .collect()
}

/// One entry of the validation battery.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
    pub report: Option<ResidualReport>,
}

fn check(name: &str, value: f64, threshold: f64, detail: String, report: Option<ResidualReport>) -> Check {
    Check {
        name: name.into(),
        passed: value <= threshold,
        value,
        threshold,
        detail,
        report,
    }
}

fn failed(name: &str, e: impl std::fmt::Display) -> Check {
    Check {
        name: name.into(),
        passed: false,
        value: f64::NAN,
        threshold: f64::NAN,
        detail: e.to_string(),
        report: None,
    }
}

fn hodograph_checks(p: &ExactSolutionParams) -> Vec<Check> {
    let mut out = Vec::new();
    match residual_hodograph(p, &HodographCheck::default()) {
        Ok(r) => {
            out.push(check("hodograph.bvp", r.bvp.max_abs_residual, 1e-7, "h = 1e-5".into(), Some(r.bvp)));
            out.push(check(
                "hodograph.second_order",
                r.sec_or_eq.max_abs_residual,
                1e-6,
                "h = 1e-5".into(),
                Some(r.sec_or_eq),
            ));
        }
        Err(e) => out.push(failed("hodograph.residual", e)),
    }
    match hodograph_convergence(p, &HodographGrid::default()) {
        Ok([a, b]) => {
            for (name, ra, rb) in [
                ("hodograph.bvp_convergence", &a.bvp, &b.bvp),
                ("hodograph.second_order_convergence", &a.sec_or_eq, &b.sec_or_eq),
            ] {
                let ratio = ra.max_abs_residual / rb.max_abs_residual;
                out.push(check(
                    name,
                    (ratio - 4.0).abs(),
                    0.5,
                    format!("residual ratio {ratio:.4} between h = 1e-4 and 5e-5"),
                    None,
                ));
            }
        }
        Err(e) => out.push(failed("hodograph.convergence", e)),
    }
    out
}

fn energy_checks(p: &ExactSolutionParams) -> Vec<Check> {
    let zsf = z_self_focus(p);
    let x = linspace(0.0, saturated_edge(), 4001);
    let mut out = Vec::new();
    let e0 = hodograph::profile_at(p, 0.0, &x).map(|q| energy_integral(&q));
    let mut worst: Result<f64, String> = Ok(0.0);
    for f in [0.3, 0.6, 0.9] {
        let e = hodograph::profile_at(p, f * zsf, &x).map(|q| energy_integral(&q));
        worst = match (&worst, &e0, &e) {
            (Ok(w), Ok(e0), Ok(e)) => Ok(w.max((e / e0 - 1.0).abs())),
            (Err(w), _, _) => Err(w.clone()),
            (_, Err(err), _) | (_, _, Err(err)) => Err(err.to_string()),
        };
    }
    out.push(match worst {
        Ok(w) => check("energy.conservation", w, 1e-4, "z in {0.3, 0.6, 0.9} z_sf".into(), None),
        Err(e) => failed("energy.conservation", e),
    });
    let mut worst_edge: Result<f64, String> = Ok(0.0);
    for f in [0.0, 0.3, 0.6] {
        worst_edge = worst_edge.and_then(|w| {
            measured_edge(p, f * zsf, 1e-4)
                .map(|e| w.max((e - saturated_edge()).abs()))
                .map_err(|e| e.to_string())
        });
    }
    out.push(match worst_edge {
        Ok(w) => check("energy.edge", w, 1e-10, "z in {0, 0.3, 0.6} z_sf".into(), None),
        Err(e) => failed("energy.edge", e),
    });
    out
}

fn eikonal_checks(p: &ExactSolutionParams) -> Vec<Check> {
    let zsf = z_self_focus(p);
    let x = linspace(0.0, 2.0, 2001);
    let dz = 1e-3;
    let z0 = 0.5 * zsf;
    let slices: Result<Vec<BeamProfile>, _> =
        [z0 - dz, z0, z0 + dz].iter().map(|&z| hodograph::profile_at(p, z, &x)).collect();
    let model = NonlinearityModel {
        alpha: p.alpha,
        beta: 0.0,
        kind: ModelKind::SaturatedExp { b: p.b },
    };
    vec![match slices.and_then(|s| residual_eikonal(&s, &model, 1)) {
        Ok(r) => check(
            "eikonal.exact1d",
            r.max_abs_residual,
            1e-4,
            "dx = dz = 1e-3 at z = 0.5 z_sf".into(),
            Some(r),
        ),
        Err(e) => failed("eikonal.exact1d", e),
    }]
}

fn classify_checks(oracle_z_max: f64) -> Vec<Check> {
    let mut out = Vec::new();
    let build = |gamma: f64, k: u32| {
        let m = NonlinearityModel::kerr_mpi(0.01, 0.001, gamma, k).expect("valid case");
        build_s_function(&m, &InitialProfile::Gaussian).expect("closed form")
    };
    let r1 = classify_collapse(&build(0.1, 6));
    out.push(check(
        "classify.case1_axis",
        r1.z_axis.map_or(f64::INFINITY, |z| (z - 7.906).abs()),
        1e-3,
        format!("regime {:?}", r1.regime),
        None,
    ));
    let r2 = classify_collapse_with_oracle(&build(0.6, 8), oracle_z_max, ORACLE_CHI_NODES);
    let dist = match (r2.first_singularity, r2.diagnostics.fold_onset_oracle) {
        (Some(f), Some(o)) => (f.z - o.z).abs().max((f.x - o.x).abs()),
        _ => f64::INFINITY,
    };
    out.push(check(
        "classify.case2_oracle",
        dist,
        1e-3,
        match r2.first_singularity {
            Some(f) => format!("regime {:?}, first singularity at x = {}, z = {}", r2.regime, f.x, f.z),
            None => format!("regime {:?}, no singularity", r2.regime),
        },
        None,
    ));
    out
}

fn reference_checks(cfg: &RunConfig) -> Vec<Check> {
    let mut out = Vec::new();
    let linear = NonlinearityModel {
        alpha: 0.0,
        beta: 0.001,
        kind: ModelKind::Kerr,
    };
    match nlse_reference(&linear, &InitialProfile::Gaussian, 5.0, &reference_config(cfg, vec![1.0, 2.0, 5.0])) {
        Ok(run) => {
            let worst = run
                .snapshots
                .iter()
                .map(|s| (s.intensity[0] * (1.0 + 2.0 * 0.001 * s.z * s.z) - 1.0).abs())
                .fold(0.0, f64::max);
            out.push(check("reference.linear_law", worst, 1e-6, "beta = 0.001, z <= 5".into(), None));
        }
        Err(e) => out.push(failed("reference.linear_law", e)),
    }
    let model = NonlinearityModel::kerr_mpi(0.01, 0.001, 0.1, 6).expect("valid case");
    let s = build_s_function(&model, &InitialProfile::Gaussian).expect("closed form");
    let zs = vec![1.0, 2.0, 3.0, 4.0];
    match nlse_reference(&model, &InitialProfile::Gaussian, 4.0, &reference_config(cfg, zs)) {
        Ok(run) => {
            let x = linspace(0.0, 2.0, 201);
            let mut axis: f64 = 0.0;
            let mut linf: f64 = 0.0;
            for snap in &run.snapshots {
                let approx = profile_at_2d(&s, &InitialProfile::Gaussian, snap.z, &x);
                axis = axis.max((snap.intensity[0] / approx.intensity[0] - 1.0).abs());
                if let Ok(e) = compare_profiles(&approx, snap) {
                    linf = linf.max(e.linf_intensity);
                }
            }
            out.push(check("reference.case1_axis", axis, 0.05, "z in {1, 2, 3, 4}".into(), None));
            out.push(check("reference.case1_linf", linf, 0.08, "|x| <= 2".into(), None));
        }
        Err(e) => out.push(failed("reference.case1", e)),
    }
    out
}

/// The certification battery selected in `cfg`.
pub fn validation_checks(cfg: &RunConfig) -> Vec<Check> {
    let p = match cfg.model.kind {
        ModelKind::SaturatedExp { b } => ExactSolutionParams {
            alpha: cfg.model.alpha,
            b,
        },
        _ => ExactSolutionParams { alpha: 3.0, b: 1.0 },
    };
    let mut out = Vec::new();
    for b in &cfg.battery {
        out.extend(match b {
            Battery::Hodograph => hodograph_checks(&p),
            Battery::Energy => energy_checks(&p),
            Battery::Eikonal => eikonal_checks(&p),
            Battery::Classify => classify_checks(cfg.oracle_z_max),
            Battery::Reference => reference_checks(cfg),
        });
    }
    out
}

fn emit(cfg: &RunConfig, body: String, out: &mut Outcome) {
    match &cfg.output {
        Some(p) => out.files.push((p.clone(), body)),
        None => out.stdout.push_str(&body),
    }
}

/// `<stem>_z<value>.csv` next to `output`.
pub(crate) fn per_z_path(output: &std::path::Path, z: f64) -> PathBuf {
    let stem = output.file_stem().and_then(|s| s.to_str()).unwrap_or("profile");
    output.with_file_name(format!("{stem}_z{z}.csv"))
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    match cfg.command {
        CommandKind::Profile => {
            let ps = profiles(cfg)?;
            for p in &ps {
                let bad = p.valid.iter().filter(|v| !**v).count();
                if bad > 0 {
                    out.warnings.push(format!("z = {}: {bad} of {} points not single-valued", p.z, p.len()));
                }
            }
            match (cfg.format, &cfg.output) {
                (Format::Csv, Some(path)) => {
                    for p in &ps {
                        out.files.push((per_z_path(path, p.z), render::profile_csv(p)));
                    }
                }
                (Format::Csv, None) => out.stdout.push_str(&render::profile_csv(&ps[0])),
                (Format::Json, _) => emit(cfg, render::profiles_json(cfg, &ps), &mut out),
            }
        }
        CommandKind::Onaxis => {
            let rows = on_axis(cfg)?;
            out.warnings
                .extend(rows.iter().filter_map(|(z, _, e)| e.as_ref().map(|e| format!("z = {z}: {e}"))));
            let body = match cfg.format {
                Format::Csv => render::onaxis_csv(&rows),
                Format::Json => render::onaxis_json(cfg, &rows),
            };
            emit(cfg, body, &mut out);
        }
        CommandKind::Zsf => {
            let d = distances(cfg)?;
            out.stdout.push_str(&render::distances_text(&d));
            if let Some(p) = &cfg.output {
                let body = match cfg.format {
                    Format::Csv => render::distances_csv(&d),
                    Format::Json => render::distances_json(cfg, &d),
                };
                out.files.push((p.clone(), body));
            }
        }
        CommandKind::Classify => {
            let r = classify(cfg, &cfg.model)?;
            emit(cfg, render::classify_json(cfg, &r), &mut out);
        }
        CommandKind::Sweep => {
            let rows = sweep(cfg);
            let body = match cfg.format {
                Format::Csv => render::sweep_csv(cfg, &rows),
                Format::Json => render::sweep_json(cfg, &rows),
            };
            emit(cfg, body, &mut out);
        }
        CommandKind::Validate => {
            let checks = validation_checks(cfg);
            out.failed = checks.iter().any(|c| !c.passed);
            let body = render::validate_json(cfg, &checks);
            match &cfg.output {
                Some(p) => {
                    out.files.push((p.clone(), body));
                    out.stdout.push_str(&render::checks_text(&checks));
                }
                None => out.stdout.push_str(&body),
            }
        }
    }
    Ok(out)
}
