//! Reference values used to validate the samplers: exit probabilities from
//! the scale function, mean exit times from the Green function, a plain
//! Euler scheme and a few classical test statistics.
//!
//! With `L = ln s'` the log scale density, the exit probability through `b`
//! and the mean exit time of `dY = mu dt + sigma dB` from `[a, b]` are
//!
//! ```text
//! p(x) = ∫_a^x e^L / ∫_a^b e^L
//! u(x) = 2 q ∫_a^x (s(z) - s(a)) / (sigma^2 s'(z)) dz
//!      + 2 p ∫_x^b (s(b) - s(z)) / (sigma^2 s'(z)) dz
//! ```
//!
//! with `q = 1 - p` integrated on its own: when `p` is within a few ulps of
//! one, `1 - p` has no correct digits left while the integral it multiplies
//! can be of order `1/q`. The ratios `(s(z) - s(a)) / s'(z)` are integrated
//! as `∫ exp(L(w) - L(z))` so nothing overflows even when `s'` spans
//! hundreds of orders of magnitude.

pub mod euler;
pub mod quadrature;
pub mod stats;

use crate::error::{ensure, Error, Result};
use crate::model::Diffusion;

pub use euler::{euler_exit, EulerOutcome};
pub use quadrature::{adaptive_simpson_rel, QuadratureResult};
pub use stats::{binomial_z, chi_square_gof, ks_critical_value, ks_one_sample, ks_two_sample, mean_and_se, two_proportion_z, KsResult};

/// Absolute tolerance of [`exit_probability`].
pub const EXIT_PROBABILITY_TOL: f64 = 1e-10;
/// Absolute tolerance of [`mean_exit_time`] relative to its magnitude.
pub const MEAN_EXIT_TIME_TOL: f64 = 1e-8;

const SHIFT_PROBES: usize = 2_000;

/// `L - max L` over `[a, b]` (maximum taken on a probe grid).
fn shifted<F: Fn(f64) -> f64>(log_density: F, a: f64, b: f64) -> Result<impl Fn(f64) -> f64> {
    let mut shift = f64::NEG_INFINITY;
    for i in 0..=SHIFT_PROBES {
        let y = a + (b - a) * i as f64 / SHIFT_PROBES as f64;
        let v = log_density(y);
        ensure!(v.is_finite(), Domain, "log scale density not finite at {y}");
        shift = shift.max(v);
    }
    Ok(move |y: f64| log_density(y) - shift)
}

/// `(P(exit at b), P(exit at a))`, each from its own integral so that
/// neither loses digits when the other is close to one.
fn probabilities<F: Fn(f64) -> f64>(log_density: F, x: f64, a: f64, b: f64) -> Result<(f64, f64)> {
    ensure!(a < x && x < b, Precondition, "start {x} must lie strictly inside ({a}, {b})");
    let l = shifted(log_density, a, b)?;
    let density = |y: f64| l(y).exp();
    let rel = EXIT_PROBABILITY_TOL * 1e-3;
    let lower = adaptive_simpson_rel(density, a, x, rel)?.value;
    let upper = adaptive_simpson_rel(density, x, b, rel)?.value;
    Ok((lower / (lower + upper), upper / (lower + upper)))
}

fn mean_time<F, W>(log_density: F, weight: W, x: f64, a: f64, b: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    W: Fn(f64) -> f64,
{
    ensure!(a < x && x < b, Precondition, "start {x} must lie strictly inside ({a}, {b})");
    let (p, q) = probabilities(&log_density, x, a, b)?;
    let ld = shifted(&log_density, a, b)?;
    let rel = MEAN_EXIT_TIME_TOL * 1e-3;
    let inner = |from: f64, z: f64| -> f64 {
        let lz = ld(z);
        adaptive_simpson_rel(|w| (ld(w) - lz).exp(), from, z, rel)
            .map(|r| r.value.abs())
            .unwrap_or(f64::NAN)
    };
    let left_int = adaptive_simpson_rel(|z| inner(a, z) * weight(z), a, x, rel)?.value;
    let right_int = adaptive_simpson_rel(|z| inner(b, z) * weight(z), x, b, rel)?.value;
    let u = 2.0 * (q * left_int + p * right_int);
    if !u.is_finite() {
        return Err(Error::Quadrature(format!("mean exit time not finite for x = {x}")));
    }
    Ok(u)
}

fn transformed<M: Diffusion + ?Sized>(model: &M, x: f64, a: f64, b: f64) -> Result<(f64, f64, f64)> {
    ensure!(a < x && x < b, Precondition, "start {x} must lie strictly inside ({a}, {b})");
    ensure!(
        model.domain().contains_closed(a, b),
        Domain,
        "[{a}, {b}] is not inside the domain of {}",
        model.name()
    );
    Ok((model.lamperti(x), model.lamperti(a), model.lamperti(b)))
}

/// `P(X exits [a, b] through b | X_0 = x)`, original coordinates in and
/// out, computed on the Lamperti-transformed process.
pub fn exit_probability<M: Diffusion + ?Sized>(model: &M, x: f64, a: f64, b: f64) -> Result<f64> {
    let (y, ya, yb) = transformed(model, x, a, b)?;
    Ok(probabilities(|v| -2.0 * model.mu0_antiderivative(v), y, ya, yb)?.0)
}

/// [`exit_probability`] computed directly in original coordinates from the
/// model's closed-form scale density.
pub fn exit_probability_original<M: Diffusion + ?Sized>(model: &M, x: f64, a: f64, b: f64) -> Result<f64> {
    transformed(model, x, a, b)?;
    let log_density = original_log_density(model, x)?;
    Ok(probabilities(log_density, x, a, b)?.0)
}

/// `E[tau_{a,b}]` for the process started at `x`.
pub fn mean_exit_time<M: Diffusion + ?Sized>(model: &M, x: f64, a: f64, b: f64) -> Result<f64> {
    let (y, ya, yb) = transformed(model, x, a, b)?;
    mean_time(|v| -2.0 * model.mu0_antiderivative(v), |_| 1.0, y, ya, yb)
}

/// [`mean_exit_time`] computed in original coordinates.
pub fn mean_exit_time_original<M: Diffusion + ?Sized>(model: &M, x: f64, a: f64, b: f64) -> Result<f64> {
    transformed(model, x, a, b)?;
    let log_density = original_log_density(model, x)?;
    mean_time(
        log_density,
        |z| {
            let s = model.diffusion(z);
            1.0 / (s * s)
        },
        x,
        a,
        b,
    )
}

fn original_log_density<M: Diffusion + ?Sized>(model: &M, x: f64) -> Result<impl Fn(f64) -> f64 + '_> {
    ensure!(
        model.original_log_scale_density(x).is_some(),
        Configuration,
        "{} has no closed-form scale density in original coordinates",
        model.name()
    );
    Ok(move |x: f64| model.original_log_scale_density(x).unwrap_or(f64::NAN))
}
