//! Kolmogorov-Smirnov, binomial and chi-square tests.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{ensure, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    /// Asymptotic p-value.
    pub p_value: f64,
}

/// Kolmogorov survival function `Q(λ) = 2 Σ (-1)^{j-1} exp(-2 j² λ²)`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-transformed series, fast for small λ
        let y = (-std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda)).exp();
        let s = y + y.powi(9) + y.powi(25) + y.powi(49);
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0);
    }
    let x = (-2.0 * lambda * lambda).exp();
    (2.0 * (x - x.powi(4) + x.powi(9) - x.powi(16))).clamp(0.0, 1.0)
}

fn p_value(d: f64, n_eff: f64) -> f64 {
    let s = n_eff.sqrt();
    kolmogorov_q((s + 0.12 + 0.11 / s) * d)
}

/// Two-sample KS test. Both samples are sorted in place.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(KsResult {
        statistic: d,
        p_value: p_value(d, na * nb / (na + nb)),
    })
}

/// One-sample KS test against a continuous `cdf`. Sorts `sample`.
pub fn ks_one_sample(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(KsResult {
        statistic: d,
        p_value: p_value(d, n),
    })
}

/// Asymptotic critical value of the one-sample KS statistic at level
/// `alpha`: `sqrt(-ln(alpha / 2) / 2) / sqrt(n)`.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// `(k - n p0) / sqrt(n p0 (1 - p0))`.
pub fn binomial_z(successes: u64, n: u64, p0: f64) -> Result<f64> {
    ensure!(n > 0, Precondition, "binomial test needs n > 0");
    ensure!((0.0..=1.0).contains(&p0), Precondition, "p0 must lie in [0, 1], got {p0}");
    let k = successes as f64;
    let nf = n as f64;
    let var = nf * p0 * (1.0 - p0);
    let diff = k - nf * p0;
    if var == 0.0 {
        return Ok(if diff == 0.0 { 0.0 } else { diff.signum() * f64::INFINITY });
    }
    Ok(diff / var.sqrt())
}

/// Pooled two-proportion z statistic.
pub fn two_proportion_z(k1: u64, n1: u64, k2: u64, n2: u64) -> Result<f64> {
    ensure!(n1 > 0 && n2 > 0, Precondition, "two-proportion test needs nonempty samples");
    let (p1, p2) = (k1 as f64 / n1 as f64, k2 as f64 / n2 as f64);
    let p = (k1 + k2) as f64 / (n1 + n2) as f64;
    let var = p * (1.0 - p) * (1.0 / n1 as f64 + 1.0 / n2 as f64);
    if var == 0.0 {
        return Ok(0.0);
    }
    Ok((p1 - p2) / var.sqrt())
}

/// Pearson chi-square goodness of fit; returns `(statistic, p-value)`.
pub fn chi_square_gof(observed: &[u64], probabilities: &[f64]) -> Result<(f64, f64)> {
    ensure!(
        observed.len() == probabilities.len() && observed.len() >= 2,
        Precondition,
        "need matching observation and probability vectors with at least two cells"
    );
    let n: u64 = observed.iter().sum();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mut stat = 0.0;
    for (&o, &p) in observed.iter().zip(probabilities) {
        ensure!(p > 0.0, Precondition, "cell probabilities must be positive");
        let e = n as f64 * p;
        stat += (o as f64 - e).powi(2) / e;
    }
    let dist = ChiSquared::new((observed.len() - 1) as f64).map_err(|e| Error::Precondition(e.to_string()))?;
    Ok((stat, dist.sf(stat)))
}

/// Sample mean and its standard error.
pub fn mean_and_se(sample: &[f64]) -> Result<(f64, f64)> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    if sample.len() == 1 {
        return Ok((mean, f64::INFINITY));
    }
    let var = sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}
