use collapse_kit::nlse2d::{CollapseReport, Regime};
use collapse_kit::profile::{sci, BeamProfile};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Battery, CommandKind, RunConfig, Solver};
use crate::run::{sweep_tuples, Check, Distance, SweepRow};

pub const FORMAT_VERSION: u32 = 1;

fn config_json(cfg: &RunConfig) -> Value {
    let mut c = json!({
        "solver": cfg.solver,
        "model": cfg.model,
        "profile": serde_json::to_value(&cfg.profile).unwrap_or(Value::Null),
        "z": cfg.z_list,
        "x_grid": cfg.x_grid,
        "sweep": cfg.sweep,
        "format": cfg.format,
        "oracle": cfg.oracle,
        "oracle_z_max": cfg.oracle_z_max,
        "deterministic": cfg.deterministic,
    });
    if cfg.command == CommandKind::Validate {
        c["battery"] = json!(cfg.battery);
    }
    if cfg.solver == Solver::Reference || (cfg.command == CommandKind::Validate && cfg.battery.contains(&Battery::Reference)) {
        c["reference"] = json!(cfg.reference);
    }
    c
}

fn envelope_value(cfg: &RunConfig, key: &str, body: impl Serialize) -> Value {
    let mut v = json!({
        "command": cfg.command,
        "format_version": FORMAT_VERSION,
        "config": config_json(cfg),
    });
    v[key] = json!(body);
    v
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

fn envelope(cfg: &RunConfig, key: &str, body: impl Serialize) -> String {
    pretty(&envelope_value(cfg, key, body))
}

pub fn profile_csv(p: &BeamProfile) -> String {
    let mut buf = Vec::new();
    p.write_csv(&mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn profiles_json(cfg: &RunConfig, ps: &[BeamProfile]) -> String {
    envelope(cfg, "profiles", ps)
}

pub fn onaxis_csv(rows: &[(f64, Option<f64>, Option<String>)]) -> String {
    let mut s = String::from("z,I\n");
    for (z, i, _) in rows {
        s.push_str(&format!("{},{}\n", sci(*z), sci(i.unwrap_or(f64::NAN))));
    }
    s
}

pub fn onaxis_json(cfg: &RunConfig, rows: &[(f64, Option<f64>, Option<String>)]) -> String {
    let rows: Vec<Value> = rows
        .iter()
        .map(|(z, i, e)| json!({ "z": z, "intensity": i, "error": e }))
        .collect();
    envelope(cfg, "curve", rows)
}

fn sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let digits = (5 - v.abs().log10().floor() as i32).max(0) as usize;
    format!("{v:.digits$}")
}

pub fn distances_text(d: &[Distance]) -> String {
    if d.is_empty() {
        return "no collapse\n".into();
    }
    d.iter()
        .map(|r| match r.x {
            Some(x) if x != 0.0 => format!("{} z_sf = {} x = {}\n", r.method, sig6(r.z), sig6(x)),
            _ => format!("{} z_sf = {}\n", r.method, sig6(r.z)),
        })
        .collect()
}

pub fn distances_csv(d: &[Distance]) -> String {
    let mut s = String::from("method,z,x\n");
    for r in d {
        s.push_str(&format!("{},{},{}\n", r.method, sci(r.z), sci(r.x.unwrap_or(f64::NAN))));
    }
    s
}

pub fn distances_json(cfg: &RunConfig, d: &[Distance]) -> String {
    envelope(cfg, "distances", d)
}

pub fn classify_json(cfg: &RunConfig, r: &CollapseReport) -> String {
    envelope(cfg, "report", r)
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::NoCollapse => "NoCollapse",
        Regime::OnAxis => "OnAxis",
        Regime::RingFirst => "RingFirst",
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn sweep_csv(cfg: &RunConfig, rows: &[SweepRow]) -> String {
    let mut s: String = cfg.sweep.iter().map(|r| format!("{},", r.name)).collect();
    s.push_str("regime,z_axis,x_first,z_first,ring_events,oracle_z,oracle_x,error\n");
    let opt = |v: Option<f64>| v.map_or_else(String::new, sci);
    for (t, rep) in rows {
        for v in t {
            s.push_str(&sci(*v));
            s.push(',');
        }
        match rep {
            Ok(r) => {
                let oracle = r.diagnostics.fold_onset_oracle;
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},\n",
                    regime_name(r.regime),
                    opt(r.z_axis),
                    opt(r.first_singularity.map(|f| f.x)),
                    opt(r.first_singularity.map(|f| f.z)),
                    r.ring_events.len(),
                    opt(oracle.map(|o| o.z)),
                    opt(oracle.map(|o| o.x)),
                ));
            }
            Err(e) => s.push_str(&format!(",,,,,,,{}\n", csv_field(e))),
        }
    }
    s
}

pub fn sweep_json(cfg: &RunConfig, rows: &[SweepRow]) -> String {
    debug_assert_eq!(rows.len(), sweep_tuples(cfg).len());
    let rows: Vec<Value> = rows
        .iter()
        .map(|(t, rep)| {
            let params: serde_json::Map<String, Value> =
                cfg.sweep.iter().zip(t).map(|(r, v)| (r.name.clone(), json!(v))).collect();
            match rep {
                Ok(r) => json!({ "parameters": params, "report": r, "error": null }),
                Err(e) => json!({ "parameters": params, "report": null, "error": e }),
            }
        })
        .collect();
    envelope(cfg, "rows", rows)
}

pub fn validate_json(cfg: &RunConfig, checks: &[Check]) -> String {
    let mut v = envelope_value(cfg, "checks", checks);
    v["passed"] = json!(checks.iter().all(|c| c.passed));
    pretty(&v)
}

pub fn checks_text(checks: &[Check]) -> String {
    checks
        .iter()
        .map(|c| {
            format!(
                "{} {} value={} threshold={}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                sci(c.value),
                sci(c.threshold)
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.6730880), "0.673088");
        assert_eq!(sig6(12.9131), "12.9131");
        assert_eq!(sig6(7.966185), "7.96619");
    }

    #[test]
    fn quoting() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"x\""), "\"say \"\"x\"\"\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
