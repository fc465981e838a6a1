//! Bracketed scalar root finding.
//!
//! Every search starts from a deterministic node scan; the first sign change
//! is then narrowed with Brent's method (bisection safeguarding secant and
//! inverse-quadratic steps), so identical inputs give bit-identical roots.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
    pub bracket_nodes: usize,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_iter: 100,
            bracket_nodes: 512,
        }
    }
}

impl RootConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::Input("root tolerances must be positive".into()));
        }
        if self.max_iter == 0 || self.bracket_nodes < 2 {
            return Err(Error::Input("max_iter >= 1 and bracket_nodes >= 2 required".into()));
        }
        Ok(())
    }
}

/// Root of `f` on `[lo, hi]`, located by a uniform scan with
/// `cfg.bracket_nodes` nodes. The first sign change (from `lo`) wins.
pub fn bracket_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, cfg: &RootConfig) -> Result<f64> {
    let n = cfg.bracket_nodes.max(2);
    let nodes = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64);
    first_root_on_nodes(&f, nodes, lo, hi, cfg)
}

/// Same as [`bracket_root`] but scans a geometric grid, which suits targets
/// with exponential growth. Requires `0 < lo < hi`.
pub fn bracket_root_geometric<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    cfg: &RootConfig,
) -> Result<f64> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Input(format!("geometric scan needs 0 < lo < hi, got [{lo}, {hi}]")));
    }
    let n = cfg.bracket_nodes.max(2);
    let ratio = (hi / lo).ln();
    let nodes = (0..n).map(|i| {
        if i == n - 1 {
            hi
        } else {
            lo * (ratio * i as f64 / (n - 1) as f64).exp()
        }
    });
    first_root_on_nodes(&f, nodes, lo, hi, cfg)
}

fn first_root_on_nodes<F, I>(f: &F, mut nodes: I, lo: f64, hi: f64, cfg: &RootConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
    I: Iterator<Item = f64>,
{
    let Some(mut a) = nodes.next() else {
        return Err(Error::NoRoot { lo, hi });
    };
    let mut fa = f(a);
    if fa == 0.0 {
        return Ok(a);
    }
    for b in nodes {
        let fb = f(b);
        if fb == 0.0 {
            return Ok(b);
        }
        if fa.is_finite() && fb.is_finite() && fa.signum() != fb.signum() {
            return refine_bracket(f, a, b, fa, fb, cfg);
        }
        a = b;
        fa = fb;
    }
    Err(Error::NoRoot { lo, hi })
}

/// All sign changes of `f` between consecutive nodes of a uniform `n`-node
/// grid on `[lo, hi]`, each polished to a root.
pub fn all_roots<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize, cfg: &RootConfig) -> Vec<f64> {
    let n = n.max(2);
    let mut roots = Vec::new();
    let mut a = lo;
    let mut fa = f(a);
    for i in 1..n {
        let b = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let fb = f(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa.is_finite() && fb.is_finite() && fb != 0.0 && fa.signum() != fb.signum() {
            if let Ok(r) = refine_bracket(&f, a, b, fa, fb, cfg) {
                roots.push(r);
            }
        }
        a = b;
        fa = fb;
    }
    if fa == 0.0 {
        roots.push(a);
    }
    roots
}

/// Narrows a known bracket `f(a) f(b) < 0` to a root: Brent's combination of
/// bisection with secant and inverse quadratic steps.
pub fn refine_bracket<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    cfg: &RootConfig,
) -> Result<f64> {
    if fa.signum() == fb.signum() {
        return Err(Error::NoRoot { lo: a.min(b), hi: a.max(b) });
    }
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..4 * cfg.max_iter {
        if fb == 0.0 {
            return Ok(b);
        }
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * cfg.abs_tol * 1e-6;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || (fb.abs() <= cfg.abs_tol * 1e-4 && m.abs() <= cfg.rel_tol * b.abs()) {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Ok(b)
}
