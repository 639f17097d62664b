//! Exact Brownian primitives on an interval `[l, u]`.
//!
//! * [`exit_bm`]: exit time and side of standard Brownian motion.
//! * [`cond_bm`]: position at a fixed time given that the interval has not
//!   been left.
//! * [`absorbing_kernel`], [`exit_time_cdf`]: sandwich evaluation of the
//!   absorbing heat kernel and of the exit-time distribution, used by the
//!   samplers and as validation oracles.
//!
//! `exit_bm` walks through nested symmetric intervals: from `z`, with
//! `r = min(z - l, u - z)`, the exit from `(z - r, z + r)` is an exactly
//! sampled symmetric exit time scaled by `r^2` (see `jstar`) and lands on
//! either end with probability 1/2. One of the two ends is a boundary of
//! `[l, u]`, so the walk stops after a geometric(1/2) number of rounds, and
//! the strong Markov property makes the accumulated time exact.

mod jstar;
pub mod kernel;

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{ensure, Error, Result};
pub use kernel::Series;
use kernel::{cdf_image, cdf_spectral, kernel_image, kernel_spectral, CROSSOVER, TERM_CAP};

/// Survival probabilities below this make [`cond_bm`] give up.
pub const SURVIVAL_FLOOR: f64 = 1e-300;
/// Consecutive rejections in [`cond_bm`] before the survival probability is
/// checked against [`SURVIVAL_FLOOR`].
const DEGENERACY_CHECK_EVERY: u64 = 256;
/// Accuracy of the CDF helpers.
const CDF_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BmExitSample {
    pub time: f64,
    pub side: Side,
    /// `l` or `u`, bit-exact.
    pub location: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEvaluation {
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub terms_used: usize,
}

fn check_interior(x: f64, l: f64, u: f64) -> Result<()> {
    ensure!(
        l.is_finite() && u.is_finite() && l < x && x < u,
        Precondition,
        "start {x} must lie strictly inside ({l}, {u})"
    );
    Ok(())
}

/// Exit time and exit side of standard Brownian motion started at `x`.
pub fn exit_bm<R: Rng + ?Sized>(rng: &mut R, x: f64, l: f64, u: f64) -> Result<BmExitSample> {
    check_interior(x, l, u)?;
    let upper = BmExitSample {
        time: 0.0,
        side: Side::Upper,
        location: u,
    };
    let lower = BmExitSample {
        time: 0.0,
        side: Side::Lower,
        location: l,
    };
    let mut z = x;
    let mut time = 0.0;
    loop {
        let (dl, du) = (z - l, u - z);
        let r = dl.min(du);
        time += r * r * jstar::sample(rng);
        if rng.random::<bool>() {
            if du <= dl || z + r >= u {
                return Ok(BmExitSample { time, ..upper });
            }
            z += r;
        } else {
            if dl <= du || z - r <= l {
                return Ok(BmExitSample { time, ..lower });
            }
            z -= r;
        }
    }
}

/// Position at time `t` of Brownian motion started at `x`, conditioned on
/// not having left `(l, u)` by time `t`.
///
/// Small normalised times propose from `N(x, t)` and accept with the ratio
/// `q_t / phi_t` evaluated through the image series; large ones propose
/// uniformly and accept against the bound
/// `q_t(x, y) <= 2 |sin(pi x)| sum_n n exp(-n^2 pi^2 t / 2)`.
/// Acceptance decisions only refine the series until the sandwich decides.
pub fn cond_bm<R: Rng + ?Sized>(rng: &mut R, x: f64, l: f64, u: f64, t: f64) -> Result<f64> {
    check_interior(x, l, u)?;
    ensure!(t > 0.0 && t.is_finite(), Precondition, "conditioning time must be positive and finite, got {t}");
    let w = u - l;
    let xn = (x - l) / w;
    let tn = t / (w * w);
    loop {
        let yn = if tn <= CROSSOVER {
            cond_small_time(rng, xn, tn)?
        } else {
            cond_large_time(rng, xn, tn)?
        };
        let y = l + w * yn;
        if y > l && y < u {
            return Ok(y);
        }
    }
}

fn degenerate_check(x: f64, t: f64) -> Result<()> {
    let log_floor = SURVIVAL_FLOOR.ln();
    let log_survival = if t <= CROSSOVER {
        kernel::survival_image(x, t, 1e-3)
            .map(|s| s.lower().max(0.0).ln())
            .unwrap_or(f64::NEG_INFINITY)
    } else {
        kernel::log_survival_spectral_lower(x, t)
    };
    if log_survival < log_floor {
        return Err(Error::Degenerate(format!(
            "survival probability below {SURVIVAL_FLOOR:e} (x = {x}, t = {t} on the unit interval)"
        )));
    }
    Ok(())
}

fn cond_small_time<R: Rng + ?Sized>(rng: &mut R, x: f64, t: f64) -> Result<f64> {
    let st = t.sqrt();
    let geo = 1.0 - (-2.0 / t).exp();
    let mut rejections = 0u64;
    loop {
        if rejections > 0 && rejections % DEGENERACY_CHECK_EVERY == 0 {
            degenerate_check(x, t)?;
        }
        let y = x + st * jstar::normal(rng);
        if !(y > 0.0 && y < 1.0) {
            rejections += 1;
            continue;
        }
        let target: f64 = rng.random();
        let d0 = y - x;
        // kernel terms relative to phi_t(y - x)
        let rel = |d: f64| ((d0 * d0 - d * d) / (2.0 * t)).exp();
        let mut sum = 1.0 - rel(y + x);
        let mut accepted = None;
        for level in 1..=TERM_CAP {
            let k = 2.0 * level as f64;
            sum += rel(d0 + k) + rel(d0 - k) - rel(y + x + k) - rel(y + x - k);
            let tail = 4.0 * ((d0 * d0 - k * k) / (2.0 * t)).exp() / geo;
            if target < sum - tail {
                accepted = Some(true);
                break;
            }
            if target > sum + tail {
                accepted = Some(false);
                break;
            }
        }
        match accepted {
            Some(true) => return Ok(y),
            Some(false) => rejections += 1,
            None => return Err(Error::Convergence { terms: TERM_CAP }),
        }
    }
}

fn cond_large_time<R: Rng + ?Sized>(rng: &mut R, x: f64, t: f64) -> Result<f64> {
    let c = PI * PI * t / 2.0;
    if c > 600.0 {
        degenerate_check(x, t)?;
    }
    // all terms carry the factor exp(-c); it is dropped from both sides
    let decay = |n: f64| (-(n * n - 1.0) * c).exp();
    let mut envelope = 0.0;
    let mut n = 1.0;
    loop {
        envelope += n * decay(n);
        n += 1.0;
        let next = n * decay(n);
        // successive terms shrink by at least 2 exp(-3c) < 1/50 here
        if next <= 1e-17 * envelope {
            envelope += next / (1.0 - 2.0 * (-3.0 * c).exp());
            break;
        }
    }
    let sx = (PI * x).sin();
    let mut rejections = 0u64;
    loop {
        if rejections > 0 && rejections % DEGENERACY_CHECK_EVERY == 0 {
            degenerate_check(x, t)?;
        }
        let y: f64 = rng.random();
        if !(y > 0.0) {
            continue;
        }
        let target = rng.random::<f64>() * sx * envelope;
        let mut sum = 0.0;
        let mut accepted = None;
        for n in 1..=TERM_CAP {
            let nf = n as f64;
            sum += (nf * PI * x).sin() * (nf * PI * y).sin() * decay(nf);
            let m = nf + 1.0;
            let tail = (-(m * m - 1.0) * c).exp() / (1.0 - (-m * c).exp());
            if target < sum - tail {
                accepted = Some(true);
                break;
            }
            if target > sum + tail {
                accepted = Some(false);
                break;
            }
        }
        match accepted {
            Some(true) => return Ok(y),
            Some(false) => rejections += 1,
            None => return Err(Error::Convergence { terms: TERM_CAP }),
        }
    }
}

/// Sandwich bounds on the absorbing kernel `q_t(x, y)` of `(l, u)` with
/// `upper_bound - lower_bound <= tolerance`.
pub fn absorbing_kernel(x: f64, y: f64, l: f64, u: f64, t: f64, tolerance: f64) -> Result<KernelEvaluation> {
    absorbing_kernel_with(x, y, l, u, t, tolerance, Series::Auto)
}

/// [`absorbing_kernel`] with an explicit choice of series.
pub fn absorbing_kernel_with(
    x: f64,
    y: f64,
    l: f64,
    u: f64,
    t: f64,
    tolerance: f64,
    series: Series,
) -> Result<KernelEvaluation> {
    check_interior(x, l, u)?;
    check_interior(y, l, u)?;
    ensure!(t > 0.0 && t.is_finite(), Precondition, "time must be positive and finite, got {t}");
    ensure!(tolerance >= 0.0, Precondition, "tolerance must be nonnegative");
    let w = u - l;
    let (xn, yn, tn) = ((x - l) / w, (y - l) / w, t / (w * w));
    let tol = tolerance * w;
    let s = match series.resolve(tn) {
        Series::Image => kernel_image(xn, yn, tn, tol)?,
        _ => kernel_spectral(xn, yn, tn, tol)?,
    };
    Ok(KernelEvaluation {
        lower_bound: s.lower().max(0.0) / w,
        upper_bound: s.upper() / w,
        terms_used: s.terms,
    })
}

fn cdf_common(x: f64, l: f64, u: f64, t: f64, side: Option<Side>, series: Series) -> Result<f64> {
    check_interior(x, l, u)?;
    ensure!(t >= 0.0, Precondition, "time must be nonnegative, got {t}");
    let w = u - l;
    let xn = (x - l) / w;
    let full = match side {
        None => 1.0,
        Some(Side::Upper) => xn,
        Some(Side::Lower) => 1.0 - xn,
    };
    if t == 0.0 {
        return Ok(0.0);
    }
    if t.is_infinite() {
        return Ok(full);
    }
    let tn = t / (w * w);
    let side = side.map(|s| s == Side::Upper);
    let s = match series.resolve(tn) {
        Series::Image => cdf_image(xn, tn, side, CDF_TOL)?,
        _ => cdf_spectral(xn, tn, side, CDF_TOL)?,
    };
    Ok(s.value.clamp(0.0, full))
}

/// `P(tau <= t)` for Brownian motion started at `x` in `(l, u)`.
pub fn exit_time_cdf(x: f64, l: f64, u: f64, t: f64) -> Result<f64> {
    cdf_common(x, l, u, t, None, Series::Auto)
}

/// [`exit_time_cdf`] with an explicit choice of series.
pub fn exit_time_cdf_with(x: f64, l: f64, u: f64, t: f64, series: Series) -> Result<f64> {
    cdf_common(x, l, u, t, None, series)
}

/// `P(tau <= t, exit through side)`.
pub fn exit_side_cdf(x: f64, l: f64, u: f64, t: f64, side: Side) -> Result<f64> {
    cdf_common(x, l, u, t, Some(side), Series::Auto)
}

/// [`exit_side_cdf`] with an explicit choice of series.
pub fn exit_side_cdf_with(x: f64, l: f64, u: f64, t: f64, side: Side, series: Series) -> Result<f64> {
    cdf_common(x, l, u, t, Some(side), series)
}

/// `P(tau > t)`, accurate also when it is tiny.
pub fn survival_probability(x: f64, l: f64, u: f64, t: f64) -> Result<f64> {
    check_interior(x, l, u)?;
    ensure!(t >= 0.0, Precondition, "time must be nonnegative, got {t}");
    if t == 0.0 {
        return Ok(1.0);
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    let w = u - l;
    let (xn, tn) = ((x - l) / w, t / (w * w));
    if tn <= CROSSOVER {
        Ok(kernel::survival_image(xn, tn, 1e-12)?.value.clamp(0.0, 1.0))
    } else {
        let c = PI * PI * tn / 2.0;
        let mut sum = 0.0;
        let mut n = 1.0;
        while n < 1e4 {
            let term = 4.0 / (n * PI) * (n * PI * xn).sin() * (-n * n * c).exp();
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
            n += 2.0;
        }
        Ok(sum.clamp(0.0, 1.0))
    }
}
