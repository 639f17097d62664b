//! Adaptive Simpson quadrature with absolute-tolerance stopping.

use crate::error::{Error, Result};

/// Hard cap on integrand evaluations for a single integral.
pub const MAX_EVALUATIONS: usize = 10_000_000;
const MAX_DEPTH: u32 = 60;
const MIN_DEPTH: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_bound: f64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Panels are bisected until the Richardson estimate `|S2 - S1| / 15` is
/// below the tolerance share of the panel. The returned error bound is the
/// sum of the per-panel estimates.
pub fn adaptive_simpson<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!("tolerance must be positive, got {tol}")));
    }
    if a == b {
        return Ok(QuadratureResult {
            value: 0.0,
            abs_error_bound: 0.0,
            evaluations: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut evaluations = 0usize;
    let mut eval = |x: f64, evaluations: &mut usize| -> Result<f64> {
        *evaluations += 1;
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Quadrature(format!("integrand not finite at {x}")))
        }
    };
    let fa = eval(lo, &mut evaluations)?;
    let fb = eval(hi, &mut evaluations)?;
    let fm = eval(0.5 * (lo + hi), &mut evaluations)?;

    let mut stack = vec![Panel {
        a: lo,
        b: hi,
        fa,
        fm,
        fb,
        whole: simpson(lo, hi, fa, fm, fb),
        tol,
        depth: 0,
    }];
    let mut value = 0.0;
    let mut err = 0.0;
    while let Some(p) = stack.pop() {
        if evaluations > MAX_EVALUATIONS {
            return Err(Error::Quadrature(format!(
                "evaluation cap {MAX_EVALUATIONS} exceeded"
            )));
        }
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = eval(lm, &mut evaluations)?;
        let frm = eval(rm, &mut evaluations)?;
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let delta = left + right - p.whole;
        let est = delta.abs() / 15.0;
        if p.depth >= MIN_DEPTH && (est <= p.tol || p.depth >= MAX_DEPTH || m <= p.a || m >= p.b) {
            value += left + right + delta / 15.0;
            err += est;
        } else {
            let half = 0.5 * p.tol;
            stack.push(Panel {
                a: m,
                b: p.b,
                fa: p.fm,
                fm: frm,
                fb: p.fb,
                whole: right,
                tol: half,
                depth: p.depth + 1,
            });
            stack.push(Panel {
                a: p.a,
                b: m,
                fa: p.fa,
                fm: flm,
                fb: p.fm,
                whole: left,
                tol: half,
                depth: p.depth + 1,
            });
        }
    }
    Ok(QuadratureResult {
        value: sign * value,
        abs_error_bound: err,
        evaluations,
    })
}

/// Like [`adaptive_simpson`] but with a tolerance relative to a coarse
/// estimate of `∫|f|`.
pub fn adaptive_simpson_rel<F>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> f64,
{
    const PROBES: usize = 32;
    let h = (b - a) / PROBES as f64;
    let mut scale = 0.0;
    for i in 0..=PROBES {
        let w = if i == 0 || i == PROBES { 0.5 } else { 1.0 };
        scale += w * f(a + h * i as f64).abs();
    }
    scale *= h.abs();
    let tol = (rel_tol * scale).max(f64::MIN_POSITIVE);
    adaptive_simpson(f, a, b, tol)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}
