//! Exact sampler for the exit time of standard Brownian motion from
//! `(-1, 1)` started at the origin (Laplace transform `1 / cosh(sqrt(2s))`).
//!
//! The density is the alternating series `f(x) = sum_n (-1)^n a_n(x)` with
//!
//! ```text
//! a_n(x) = pi (n + 1/2) exp(-(n + 1/2)^2 pi^2 x / 2)                 x > TRUNC
//! a_n(x) = (2n + 1) sqrt(2 / pi) x^{-3/2} exp(-(2n + 1)^2 / (2x))    x <= TRUNC
//! ```
//!
//! (spectral and image forms respectively). For every `x` the coefficients
//! decrease in `n`, so partial sums alternately over- and under-shoot `f`.
//! The proposal is `a_0`: a Lévy (inverse-Gaussian with infinite mean) head
//! on `(0, TRUNC]` and an exponential tail of rate `pi^2 / 8` beyond.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use statrs::function::erf::erfc;

const TRUNC: f64 = 0.64;
const TAIL_RATE: f64 = PI * PI / 8.0;

struct Proposal {
    /// Probability of drawing from the exponential tail.
    tail_prob: f64,
}

impl Proposal {
    fn new() -> Self {
        // mass of a_0 beyond TRUNC: (4 / pi) exp(-pi^2 TRUNC / 8)
        let tail = 4.0 / PI * (-TAIL_RATE * TRUNC).exp();
        // mass of a_0 below TRUNC: twice the Lévy(1) CDF at TRUNC
        let head = 2.0 * erfc(1.0 / (2.0 * TRUNC).sqrt());
        Self {
            tail_prob: tail / (tail + head),
        }
    }
}

fn coefficient(n: u32, x: f64) -> f64 {
    let h = n as f64 + 0.5;
    if x > TRUNC {
        PI * h * (-h * h * PI * PI * x / 2.0).exp()
    } else {
        let m = 2.0 * h;
        m * (2.0 / PI).sqrt() * x.powf(-1.5) * (-m * m / (2.0 * x)).exp()
    }
}

/// Lévy(1) variate conditioned to be at most `TRUNC`: `1 / Z^2` with `|Z|`
/// conditioned to exceed `1 / sqrt(TRUNC)`, drawn with Marsaglia's tail method.
fn truncated_levy<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let c = 1.0 / TRUNC.sqrt();
    loop {
        let e1: f64 = rng.sample(Exp1);
        let e2: f64 = rng.sample(Exp1);
        let x = e1 / c;
        if x * x <= 2.0 * e2 {
            let z = c + x;
            return 1.0 / (z * z);
        }
    }
}

/// One draw of the exit time of Brownian motion from `(-1, 1)` started at 0.
pub(crate) fn sample<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    thread_local! {
        static PROPOSAL: Proposal = Proposal::new();
    }
    let tail_prob = PROPOSAL.with(|p| p.tail_prob);
    loop {
        let x = if rng.random::<f64>() < tail_prob {
            TRUNC + rng.sample::<f64, _>(Exp1) / TAIL_RATE
        } else {
            truncated_levy(rng)
        };
        let mut s = coefficient(0, x);
        let y = rng.random::<f64>() * s;
        let mut n = 0u32;
        loop {
            n += 1;
            if n % 2 == 1 {
                s -= coefficient(n, x);
                if y < s {
                    return x;
                }
            } else {
                s += coefficient(n, x);
                if y > s {
                    break;
                }
            }
        }
    }
}

/// Standard normal draw; kept here so every Gaussian in the Brownian
/// primitives comes from the same distribution object.
pub(crate) fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}
