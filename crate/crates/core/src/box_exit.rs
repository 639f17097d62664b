//! Exact exit of a unit-diffusion process `dY = mu0(Y) dt + dB` from the
//! space-time rectangle `[0, T] x [l, u]`.
//!
//! Brownian segments are proposed with [`exit_bm`] / [`cond_bm`] and
//! reweighted to the drifted law by two Girsanov tests: a `beta` test at the
//! end point and a Poisson thinning test of rate `gamma_range` on the path.
//! Any failed test restarts the whole rectangle from `(0, x)`.
//!
//! Uniform variates are drawn only when a branch inspects them. They are
//! independent of everything else, so drawing them lazily does not change
//! the law of the output.

use std::ops::AddAssign;

use rand::Rng;
use rand_distr::Exp1;

use crate::bm_exit::{cond_bm, exit_bm, BmExitSample};
use crate::error::{ensure, Error, Result};
use crate::model::{compute_bounds, Diffusion, IntervalBounds};

/// Full restarts allowed before a call is declared runaway.
pub const RESTART_CAP: u64 = 1_000_000_000;

/// Hardware-independent cost of a simulation: one unit per random draw.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct WorkCounter {
    pub restarts: u64,
    pub exit_bm_calls: u64,
    pub cond_bm_calls: u64,
    pub exp_draws: u64,
    pub uniform_draws: u64,
}

impl WorkCounter {
    /// Total number of draws (restarts are not draws).
    pub fn total(&self) -> u64 {
        self.exit_bm_calls + self.cond_bm_calls + self.exp_draws + self.uniform_draws
    }
}

impl AddAssign for WorkCounter {
    fn add_assign(&mut self, rhs: Self) {
        self.restarts += rhs.restarts;
        self.exit_bm_calls += rhs.exit_bm_calls;
        self.cond_bm_calls += rhs.cond_bm_calls;
        self.exp_draws += rhs.exp_draws;
        self.uniform_draws += rhs.uniform_draws;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxOutcome {
    pub time: f64,
    /// `l` or `u` exactly when `exited`, otherwise the position at time `T`.
    pub position: f64,
    pub exited: bool,
    pub work: WorkCounter,
}

/// `Exp(rate)` variate; `+inf` when `rate == 0`.
pub fn exp_draw<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> Result<f64> {
    ensure!(rate >= 0.0 && !rate.is_nan(), Precondition, "exponential rate must be nonnegative, got {rate}");
    if rate == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(rng.sample::<f64, _>(Exp1) / rate)
}

/// The random inputs of the rectangle sampler.
pub(crate) trait BoxDraws {
    fn exit_bm(&mut self, x: f64, l: f64, u: f64) -> Result<BmExitSample>;
    fn cond_bm(&mut self, x: f64, l: f64, u: f64, t: f64) -> Result<f64>;
    fn exp(&mut self, rate: f64) -> Result<f64>;
    fn uniform(&mut self) -> f64;
}

struct RngDraws<'a, R: ?Sized>(&'a mut R);

impl<R: Rng + ?Sized> BoxDraws for RngDraws<'_, R> {
    fn exit_bm(&mut self, x: f64, l: f64, u: f64) -> Result<BmExitSample> {
        exit_bm(self.0, x, l, u)
    }
    fn cond_bm(&mut self, x: f64, l: f64, u: f64, t: f64) -> Result<f64> {
        cond_bm(self.0, x, l, u, t)
    }
    fn exp(&mut self, rate: f64) -> Result<f64> {
        exp_draw(self.0, rate)
    }
    fn uniform(&mut self) -> f64 {
        self.0.random()
    }
}

/// Samples `(tau ∧ T, Y at that time)` for the unit-diffusion process of
/// `model` started at `x` in `[l, u]` (transformed coordinates).
///
/// `horizon` may be `f64::INFINITY` only if `gamma ≥ 0` on `[l, u]`.
pub fn box_exit<R, M>(rng: &mut R, model: &M, x: f64, l: f64, u: f64, horizon: f64) -> Result<BoxOutcome>
where
    R: Rng + ?Sized,
    M: Diffusion + ?Sized,
{
    let bounds = compute_bounds(model, l, u)?;
    box_exit_with_bounds(rng, model, &bounds, x, l, u, horizon)
}

/// [`box_exit`] with precomputed (possibly conservative) bounds for `[l, u]`.
pub fn box_exit_with_bounds<R, M>(
    rng: &mut R,
    model: &M,
    bounds: &IntervalBounds,
    x: f64,
    l: f64,
    u: f64,
    horizon: f64,
) -> Result<BoxOutcome>
where
    R: Rng + ?Sized,
    M: Diffusion + ?Sized,
{
    run(&mut RngDraws(rng), model, bounds, x, l, u, horizon)
}

pub(crate) fn run<D, M>(
    draws: &mut D,
    model: &M,
    bounds: &IntervalBounds,
    x: f64,
    l: f64,
    u: f64,
    horizon: f64,
) -> Result<BoxOutcome>
where
    D: BoxDraws,
    M: Diffusion + ?Sized,
{
    ensure!(l < x && x < u, Precondition, "start {x} must lie strictly inside ({l}, {u})");
    ensure!(horizon > 0.0, Precondition, "horizon must be positive, got {horizon}");
    if horizon.is_infinite() && bounds.gamma_inf < 0.0 {
        return Err(Error::Configuration(format!(
            "infinite horizon needs gamma >= 0 on [{l}, {u}], but inf gamma = {}",
            bounds.gamma_inf
        )));
    }
    let IntervalBounds {
        log_beta_sup,
        gamma_inf,
        gamma_range,
        ..
    } = *bounds;
    let log_beta = |y: f64| model.mu0_antiderivative(y);
    let mut work = WorkCounter::default();

    'restart: loop {
        let mut remaining = horizon;
        let mut z = x;
        let mut elapsed = 0.0;
        loop {
            let e = if gamma_range > 0.0 {
                work.exp_draws += 1;
                draws.exp(gamma_range)?
            } else {
                f64::INFINITY
            };
            work.exit_bm_calls += 1;
            let exit = draws.exit_bm(z, l, u)?;
            let s = exit.time;

            let accepted = if s <= remaining && s <= e {
                work.uniform_draws += 1;
                let mut ok = draws.uniform().ln() <= log_beta(exit.location) - log_beta_sup;
                if ok && gamma_inf < 0.0 {
                    work.uniform_draws += 1;
                    ok = draws.uniform().ln() <= gamma_inf * (remaining - s);
                }
                ok.then_some(BoxOutcome {
                    time: elapsed + s,
                    position: exit.location,
                    exited: true,
                    work,
                })
            } else if remaining <= e {
                work.cond_bm_calls += 1;
                let y = draws.cond_bm(z, l, u, remaining)?;
                work.uniform_draws += 1;
                let ok = draws.uniform().ln() <= log_beta(y) - log_beta_sup;
                ok.then_some(BoxOutcome {
                    time: horizon,
                    position: y,
                    exited: false,
                    work,
                })
            } else {
                work.cond_bm_calls += 1;
                let y = draws.cond_bm(z, l, u, e)?;
                work.uniform_draws += 1;
                if gamma_range * draws.uniform() > model.gamma(y) - gamma_inf {
                    z = y;
                    elapsed += e;
                    remaining -= e;
                    continue;
                }
                None
            };

            match accepted {
                Some(outcome) => return Ok(outcome),
                None => {
                    work.restarts += 1;
                    if work.restarts > RESTART_CAP {
                        return Err(Error::Runaway(format!(
                            "more than {RESTART_CAP} restarts on [{l}, {u}]"
                        )));
                    }
                    continue 'restart;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{OrnsteinUhlenbeck, Sinusoidal, ZeroDrift};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn exp_draw_rate_zero_is_infinite() {
        assert_eq!(exp_draw(&mut rng(1), 0.0).unwrap(), f64::INFINITY);
        assert!(matches!(exp_draw(&mut rng(1), -1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn exp_draw_mean() {
        let mut r = rng(2);
        let n = 100_000;
        let mean = (0..n).map(|_| exp_draw(&mut r, 2.0).unwrap()).sum::<f64>() / n as f64;
        let se = 0.5 / (n as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn exp_draw_is_reproducible() {
        assert_eq!(exp_draw(&mut rng(3), 1.5).unwrap(), exp_draw(&mut rng(3), 1.5).unwrap());
    }

    #[test]
    fn outcome_invariants() {
        let ou = OrnsteinUhlenbeck::new(1.0).unwrap();
        let mut r = rng(4);
        for _ in 0..5_000 {
            let o = box_exit(&mut r, &ou, 3.0, 2.0, 4.5, 0.7).unwrap();
            assert!(o.time >= 0.0 && o.time <= 0.7);
            if o.exited {
                assert!(o.position == 2.0 || o.position == 4.5);
            } else {
                assert_eq!(o.time, 0.7);
                assert!(o.position > 2.0 && o.position < 4.5);
            }
            assert!(o.work.restarts <= o.work.exit_bm_calls);
        }
    }

    #[test]
    fn infinite_horizon_rules() {
        let mut r = rng(5);
        let o = box_exit(&mut r, &Sinusoidal, 3.0, 0.0, 7.0, f64::INFINITY).unwrap();
        assert!(o.exited && o.time.is_finite());
        let ou = OrnsteinUhlenbeck::new(1.0).unwrap();
        assert!(matches!(
            box_exit(&mut r, &ou, 3.0, 0.0, 7.0, f64::INFINITY),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn degenerate_start_is_rejected() {
        let mut r = rng(6);
        assert!(matches!(box_exit(&mut r, &ZeroDrift, 0.0, 0.0, 1.0, 1.0), Err(Error::Precondition(_))));
        assert!(matches!(box_exit(&mut r, &ZeroDrift, 1.0, 0.0, 1.0, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn zero_drift_never_restarts() {
        let mut r = rng(7);
        for _ in 0..1_000 {
            let o = box_exit(&mut r, &ZeroDrift, 0.4, 0.0, 1.0, 0.1).unwrap();
            assert_eq!(o.work.restarts, 0);
            assert_eq!(o.work.exp_draws, 0);
        }
    }

    /// Delegates to a real RNG and tallies every draw on its own.
    struct Audit {
        rng: ChaCha8Rng,
        tally: WorkCounter,
    }

    impl BoxDraws for Audit {
        fn exit_bm(&mut self, x: f64, l: f64, u: f64) -> Result<BmExitSample> {
            self.tally.exit_bm_calls += 1;
            exit_bm(&mut self.rng, x, l, u)
        }
        fn cond_bm(&mut self, x: f64, l: f64, u: f64, t: f64) -> Result<f64> {
            self.tally.cond_bm_calls += 1;
            cond_bm(&mut self.rng, x, l, u, t)
        }
        fn exp(&mut self, rate: f64) -> Result<f64> {
            self.tally.exp_draws += 1;
            exp_draw(&mut self.rng, rate)
        }
        fn uniform(&mut self) -> f64 {
            self.tally.uniform_draws += 1;
            self.rng.random()
        }
    }

    #[test]
    fn every_draw_is_counted_once() {
        let ou = OrnsteinUhlenbeck::new(1.0).unwrap();
        let bounds = compute_bounds(&ou, 0.0, 7.0).unwrap();
        let mut audit = Audit {
            rng: rng(8),
            tally: WorkCounter::default(),
        };
        let mut total = WorkCounter::default();
        for _ in 0..2_000 {
            let o = run(&mut audit, &ou, &bounds, 3.0, 0.0, 7.0, 1.0).unwrap();
            total += o.work;
        }
        let mut counted = total;
        counted.restarts = 0;
        assert_eq!(counted, audit.tally);
        assert!(total.restarts > 0 && total.exp_draws > 0 && total.cond_bm_calls > 0);
    }

    #[test]
    fn same_seed_same_outcomes() {
        let ou = OrnsteinUhlenbeck::new(1.0).unwrap();
        let run = |seed| {
            let mut r = rng(seed);
            (0..200)
                .map(|_| box_exit(&mut r, &ou, 3.0, 2.0, 4.0, 1.0).unwrap())
                .map(|o| (o.time.to_bits(), o.position.to_bits()))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(9), run(9));
    }
}
