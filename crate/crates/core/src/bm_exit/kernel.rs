//! Series representations of the Brownian heat kernel with absorption at
//! both ends of an interval, with rigorous truncation bounds.
//!
//! Everything here works on the unit interval `(0, 1)`; callers rescale with
//! Brownian scaling (`x -> (x - l) / w`, `t -> t / w^2`, density `/ w`).
//!
//! Two representations are used:
//!
//! ```text
//! image:    q_t(x, y) = sum_k [ phi_t(y - x + 2k) - phi_t(y + x + 2k) ]
//! spectral: q_t(x, y) = 2 sum_{n>=1} sin(n pi x) sin(n pi y) exp(-n^2 pi^2 t / 2)
//! ```
//!
//! The image series converges fast for small `t`, the spectral one for large
//! `t`; [`CROSSOVER`] separates the two regimes.

use std::f64::consts::{PI, SQRT_2};

use statrs::function::erf::{erf, erfc};

use crate::error::{Error, Result};

/// Normalised time at which evaluation switches from the image series to
/// the spectral series.
pub const CROSSOVER: f64 = 1.0 / PI;

/// Maximum number of series terms before giving up.
pub const TERM_CAP: usize = 1_000_000;

/// Which series to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Series {
    Image,
    Spectral,
    /// Image below [`CROSSOVER`], spectral above.
    Auto,
}

impl Series {
    pub(crate) fn resolve(self, t: f64) -> Series {
        match self {
            Series::Auto if t <= CROSSOVER => Series::Image,
            Series::Auto => Series::Spectral,
            s => s,
        }
    }
}

/// A truncated series value with a rigorous bound on the neglected tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Truncated {
    pub value: f64,
    pub tail: f64,
    pub terms: usize,
}

impl Truncated {
    pub fn lower(&self) -> f64 {
        self.value - self.tail
    }
    pub fn upper(&self) -> f64 {
        self.value + self.tail
    }
}

fn gaussian(d: f64, t: f64) -> f64 {
    (-d * d / (2.0 * t)).exp() / (2.0 * PI * t).sqrt()
}

/// `P(a < Z < b)` for a standard normal `Z`, accurate in both tails.
pub(crate) fn gauss_mass(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        0.5 * (erfc(a / SQRT_2) - erfc(b / SQRT_2))
    } else if b <= 0.0 {
        0.5 * (erfc(-b / SQRT_2) - erfc(-a / SQRT_2))
    } else {
        0.5 * (erf(b / SQRT_2) - erf(a / SQRT_2))
    }
}

/// Runs `step(level)` for `level = 1, 2, ...` until `done` accepts the
/// running state, failing after [`TERM_CAP`] levels.
fn until<S, F, D>(mut state: S, mut step: F, mut done: D) -> Result<S>
where
    F: FnMut(&mut S, usize),
    D: FnMut(&S) -> bool,
{
    for level in 1..=TERM_CAP {
        step(&mut state, level);
        if done(&state) {
            return Ok(state);
        }
    }
    Err(Error::Convergence { terms: TERM_CAP })
}

/// Image-series kernel value with tail bound after `levels` pairs `±k`.
///
/// For `|k| > K` every term is at most `phi_t(2|k| - 2)`, and consecutive
/// bounds shrink by at least `exp(-2/t)`, so the tail is at most
/// `4 phi_t(2K) / (1 - exp(-2/t))`.
pub(crate) fn kernel_image(x: f64, y: f64, t: f64, tol: f64) -> Result<Truncated> {
    let term = |k: f64| gaussian(y - x + 2.0 * k, t) - gaussian(y + x + 2.0 * k, t);
    let geo = 1.0 - (-2.0 / t).exp();
    until(
        Truncated {
            value: term(0.0),
            tail: f64::INFINITY,
            terms: 1,
        },
        |s, level| {
            let k = level as f64;
            s.value += term(k) + term(-k);
            s.terms += 2;
            s.tail = 4.0 * gaussian(2.0 * k, t) / geo;
        },
        |s| 2.0 * s.tail <= tol,
    )
}

/// Spectral-series kernel value.
///
/// `n^2 >= (N + 1) n` for `n > N` gives the geometric tail bound
/// `2 exp(-(N+1)^2 c) / (1 - exp(-(N+1) c))` with `c = pi^2 t / 2`.
pub(crate) fn kernel_spectral(x: f64, y: f64, t: f64, tol: f64) -> Result<Truncated> {
    let c = PI * PI * t / 2.0;
    until(
        Truncated {
            value: 0.0,
            tail: f64::INFINITY,
            terms: 0,
        },
        |s, n| {
            let nf = n as f64;
            s.value += 2.0 * (nf * PI * x).sin() * (nf * PI * y).sin() * (-nf * nf * c).exp();
            s.terms = n;
            let m = nf + 1.0;
            s.tail = 2.0 * (-m * m * c).exp() / (1.0 - (-m * c).exp());
        },
        |s| 2.0 * s.tail <= tol,
    )
}

/// `P(tau <= t)` from the image series:
/// `sum_k sgn(z) erfc(|z| / sqrt(2t))` over `z = 2k + 1 - x` (upper side)
/// and `z = 2k + x` (lower side).
pub(crate) fn cdf_image(x: f64, t: f64, side: Option<bool>, tol: f64) -> Result<Truncated> {
    let s2t = (2.0 * t).sqrt();
    let signed = |z: f64| z.signum() * erfc(z.abs() / s2t);
    let upper = |k: f64| signed(2.0 * k + 1.0 - x);
    let lower = |k: f64| signed(2.0 * k + x);
    let pick = |k: f64| match side {
        Some(true) => upper(k),
        Some(false) => lower(k),
        None => upper(k) + lower(k),
    };
    let per_level = if side.is_some() { 2.0 } else { 4.0 };
    until(
        Truncated {
            value: pick(0.0),
            tail: f64::INFINITY,
            terms: 1,
        },
        |s, level| {
            let k = level as f64;
            s.value += pick(k) + pick(-k);
            s.terms += 2;
            // remaining levels m > K have |z| >= 2m - 1 >= 2K + 1
            let d = 2.0 * k + 1.0;
            let ratio = (-4.0 * (k + 1.0) / t).exp();
            s.tail = per_level * (-d * d / (2.0 * t)).exp() / (1.0 - ratio);
        },
        |s| s.tail <= tol,
    )
}

/// `P(tau <= t)` (or per side) from the spectral series.
pub(crate) fn cdf_spectral(x: f64, t: f64, side: Option<bool>, tol: f64) -> Result<Truncated> {
    let c = PI * PI * t / 2.0;
    let base = match side {
        None => 1.0,
        Some(true) => x,
        Some(false) => 1.0 - x,
    };
    let coeff = |n: usize| -> f64 {
        let nf = n as f64;
        match side {
            None if n % 2 == 1 => 4.0 / (nf * PI),
            None => 0.0,
            Some(true) => {
                let s = if n % 2 == 1 { 1.0 } else { -1.0 };
                s * 2.0 / (nf * PI)
            }
            // lower side: x -> 1 - x, and sin(n pi (1 - x)) = (-1)^{n+1} sin(n pi x)
            Some(false) => 2.0 / (nf * PI),
        }
    };
    let scale = if side.is_none() { 4.0 } else { 2.0 };
    let state = until(
        Truncated {
            value: 0.0,
            tail: f64::INFINITY,
            terms: 0,
        },
        |s, n| {
            let nf = n as f64;
            s.value += coeff(n) * (nf * PI * x).sin() * (-nf * nf * c).exp();
            s.terms = n;
            let m = nf + 1.0;
            s.tail = scale / (m * PI) * (-m * m * c).exp() / (1.0 - (-m * c).exp());
        },
        |s| s.tail <= tol,
    )?;
    Ok(Truncated {
        value: base - state.value,
        ..state
    })
}

/// Survival probability `P(tau > t)` from the image series, evaluated
/// directly (not as `1 - cdf`) so that tiny survival probabilities keep
/// their relative accuracy.
pub(crate) fn survival_image(x: f64, t: f64, tol: f64) -> Result<Truncated> {
    let st = t.sqrt();
    let term = |k: f64| {
        gauss_mass((2.0 * k - x) / st, (1.0 - x + 2.0 * k) / st)
            - gauss_mass((x + 2.0 * k) / st, (1.0 + x + 2.0 * k) / st)
    };
    until(
        Truncated {
            value: term(0.0),
            tail: f64::INFINITY,
            terms: 1,
        },
        |s, level| {
            let k = level as f64;
            s.value += term(k) + term(-k);
            s.terms += 2;
            // levels m > K: every mass sits at distance >= 2m - 2 >= 2K
            let d = 2.0 * k;
            let ratio = (-(4.0 * k + 2.0) / t).exp();
            s.tail = 2.0 * (-d * d / (2.0 * t)).exp() / (1.0 - ratio);
        },
        |s| s.tail <= tol * s.value.abs().max(f64::MIN_POSITIVE),
    )
}

/// `ln P(tau > t)` lower bound from the spectral series, with the leading
/// exponential factored out so that it never underflows.
pub(crate) fn log_survival_spectral_lower(x: f64, t: f64) -> f64 {
    let c = PI * PI * t / 2.0;
    let mut sum = 0.0;
    let mut n = 1usize;
    loop {
        let nf = n as f64;
        sum += 4.0 / (nf * PI) * (nf * PI * x).sin() * (-(nf * nf - 1.0) * c).exp();
        let m = nf + 2.0;
        let tail = 4.0 / (m * PI) * (-(m * m - 1.0) * c).exp() / (1.0 - (-m * c).exp());
        if tail <= 1e-3 * sum.abs() || n > 10_000 {
            return (sum - tail).max(0.0).ln() - c;
        }
        n += 2;
    }
}
