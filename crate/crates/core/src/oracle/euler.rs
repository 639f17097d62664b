//! Euler-Maruyama exit from `[a, b]` in original coordinates.
//!
//! The path is only inspected on the time grid, so exits between grid
//! points are missed and the estimate of `tau` is biased upwards by roughly
//! `O(sqrt(dt))`. Used as a rough, independent cross-check only.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{ensure, Result};
use crate::model::Diffusion;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerOutcome {
    pub time: f64,
    /// `a` or `b` if the path left the interval, else the position at the
    /// horizon.
    pub location: f64,
    pub exited: bool,
}

/// Simulates until the first grid time at which the path is outside
/// `[a, b]`, or until `horizon` if given.
pub fn euler_exit<R, M>(
    rng: &mut R,
    model: &M,
    x: f64,
    a: f64,
    b: f64,
    dt: f64,
    horizon: Option<f64>,
) -> Result<EulerOutcome>
where
    R: Rng + ?Sized,
    M: Diffusion + ?Sized,
{
    ensure!(dt > 0.0 && dt.is_finite(), Precondition, "time step must be positive, got {dt}");
    ensure!(a < x && x < b, Precondition, "start {x} must lie strictly inside ({a}, {b})");
    let sdt = dt.sqrt();
    let limit = horizon.unwrap_or(f64::INFINITY);
    let mut y = x;
    let mut steps = 0u64;
    loop {
        let t = (steps + 1) as f64 * dt;
        if t > limit {
            return Ok(EulerOutcome {
                time: limit,
                location: y,
                exited: false,
            });
        }
        let z: f64 = rng.sample(StandardNormal);
        y += model.drift(y) * dt + model.diffusion(y) * sdt * z;
        steps += 1;
        if y <= a || y >= b {
            return Ok(EulerOutcome {
                time: t,
                location: if y <= a { a } else { b },
                exited: true,
            });
        }
    }
}
