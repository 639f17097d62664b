//! `validate`: empirical exit statistics against their reference values.
//!
//! Each suite runs the walk on one reference configuration and compares the
//! frequency of exits through `b` with the scale-function probability and
//! the mean exit time with the Green-function value, both by a z statistic
//! that must not exceed [`Z_LIMIT`]. The `zero` suite also checks the
//! Brownian primitive directly, and runs one wide rectangle with no horizon
//! where the exit side is sensitive to any error in `gamma`.

use std::io::Write;

use exitsim::bm_exit::exit_time_cdf;
use exitsim::oracle::{binomial_z, exit_probability, ks_critical_value, ks_one_sample, mean_and_se, mean_exit_time};
use exitsim::{exit_bm, Diffusion, Purpose, Side, StreamKey, WalkPlan};

use crate::config::format_horizon;
use crate::output::{self, F};
use crate::{CliError, ExperimentConfig};

/// Default number of exits per suite.
pub const DEFAULT_N: &str = "20000";
/// Largest accepted |z| for probability and mean comparisons.
pub const Z_LIMIT: f64 = 3.0;
/// Level of the KS comparisons.
pub const KS_ALPHA: f64 = 0.01;

pub const COLUMNS: &str = "suite,case,model,a,b,x,T,N,n,quantity,reference,estimate,se,statistic,limit,pass";

/// Names accepted by `--suite` besides `all` and `config`.
pub const SUITES: &[&str] = &["zero", "sin", "ou1", "ou2", "cir"];

#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub suite: String,
    pub label: String,
    pub config: ExperimentConfig,
}

type CaseSpec = (&'static str, &'static str, &'static [(&'static str, f64)], f64, f64, f64, f64, usize);

/// label, model, params, a, b, x, T, N
const CASES: &[(&str, CaseSpec)] = &[
    ("zero", ("zero_walk", "zero", &[], 0.0, 1.0, 0.3, 1.0, 4)),
    ("zero", ("zero_box", "zero", &[], 0.0, 10.0, 3.0, f64::INFINITY, 2)),
    ("sin", ("sin", "sin", &[], 0.0, 7.0, 3.0, 1.0, 14)),
    ("ou1", ("ou1", "ou", &[("lambda", 1.0)], 0.0, 7.0, 3.0, 1.0, 14)),
    ("ou2", ("ou2", "ou", &[("lambda", 2.0)], -2.0, 2.0, 0.5, 0.5, 7)),
    ("cir", ("cir", "cir", &[("k", 3.0), ("theta", 7.0), ("sigma", 1.0)], 1.0, 6.0, 3.0, 1.0, 14)),
];

/// Reference configurations of a named suite (empty if unknown).
pub fn suite_cases(name: &str) -> Vec<Case> {
    CASES
        .iter()
        .filter(|(suite, _)| *suite == name)
        .map(|(suite, (label, model, params, a, b, x, horizon, n))| Case {
            suite: suite.to_string(),
            label: label.to_string(),
            config: ExperimentConfig {
                model: model.to_string(),
                params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
                a: *a,
                b: *b,
                x: *x,
                horizon: *horizon,
                n: *n,
                ..ExperimentConfig::default()
            },
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub quantity: &'static str,
    pub reference: f64,
    pub estimate: f64,
    pub se: f64,
    pub statistic: f64,
    pub limit: f64,
}

impl Row {
    pub fn pass(&self) -> bool {
        self.statistic <= self.limit
    }
}

/// Exit probability and mean exit time rows for one case, with `samples`
/// exits drawn from `sampler` (the case's model unless a mutated one is
/// passed in).
pub fn walk_rows(
    case: &Case,
    sampler: &dyn Diffusion,
    samples: usize,
    seed: u64,
    arm: u32,
) -> Result<Vec<Row>, CliError> {
    let c = &case.config;
    let reference = c.build_model()?;
    let p = exit_probability(&reference, c.x, c.a, c.b)?;
    let u = mean_exit_time(&reference, c.x, c.a, c.b)?;
    let plan = WalkPlan::new(sampler, c.a, c.b, c.horizon, c.n)?;
    let recs = plan.sample_many(seed, StreamKey::new(Purpose::Validate).arm(arm), c.x, samples)?;
    let hits = recs.iter().filter(|r| r.exit_location == c.b).count() as u64;
    let z = binomial_z(hits, samples as u64, p)?;
    let times: Vec<f64> = recs.iter().map(|r| r.exit_time).collect();
    let (mean, se) = mean_and_se(&times)?;
    Ok(vec![
        Row {
            quantity: "exit_probability_b",
            reference: p,
            estimate: hits as f64 / samples as f64,
            se: (p * (1.0 - p) / samples as f64).sqrt(),
            statistic: z.abs(),
            limit: Z_LIMIT,
        },
        Row {
            quantity: "mean_exit_time",
            reference: u,
            estimate: mean,
            se,
            statistic: ((mean - u) / se).abs(),
            limit: Z_LIMIT,
        },
    ])
}

/// Side frequency and KS rows for the Brownian primitive on the case's
/// interval.
pub fn brownian_rows(case: &Case, samples: usize, seed: u64) -> Result<Vec<Row>, CliError> {
    let c = &case.config;
    let mut rng = StreamKey::new(Purpose::Validate).arm(1000).rng(seed);
    let mut times = Vec::with_capacity(samples);
    let mut upper = 0u64;
    for _ in 0..samples {
        let s = exit_bm(&mut rng, c.x, c.a, c.b)?;
        upper += (s.side == Side::Upper) as u64;
        times.push(s.time);
    }
    let p = (c.x - c.a) / (c.b - c.a);
    let ks = ks_one_sample(&mut times, |t| exit_time_cdf(c.x, c.a, c.b, t).unwrap_or(f64::NAN))?;
    Ok(vec![
        Row {
            quantity: "bm_upper_frequency",
            reference: p,
            estimate: upper as f64 / samples as f64,
            se: (p * (1.0 - p) / samples as f64).sqrt(),
            statistic: binomial_z(upper, samples as u64, p)?.abs(),
            limit: Z_LIMIT,
        },
        Row {
            quantity: "bm_exit_time_ks",
            reference: 0.0,
            estimate: ks.statistic,
            se: f64::NAN,
            statistic: ks.statistic,
            limit: ks_critical_value(samples, KS_ALPHA),
        },
    ])
}

/// Cases selected by `--suite`.
pub fn select(suite: &str, cfg: &ExperimentConfig) -> Result<Vec<Case>, CliError> {
    match suite {
        "all" => Ok(SUITES.iter().flat_map(|s| suite_cases(s)).collect()),
        "config" => Ok(vec![Case {
            suite: "config".into(),
            label: "config".into(),
            config: cfg.clone(),
        }]),
        name => match suite_cases(name) {
            cases if !cases.is_empty() => Ok(cases),
            _ => Err(CliError::Config(format!(
                "unknown suite `{name}` (expected all, config, {})",
                SUITES.join(", ")
            ))),
        },
    }
}

/// Runs the selected suites, writes the table and fails with
/// [`CliError::Validation`] if any row fails.
pub fn run(cfg: &ExperimentConfig, suite: &str, gamma_shift: Option<f64>) -> Result<(), CliError> {
    let cases = select(suite, cfg)?;
    let samples = cfg.m as usize;
    let mut w = output::open(cfg.out.as_deref())?;
    output::header(&mut *w, "validate", None, false)?;
    writeln!(w, "# samples={samples} seed={} gamma_shift={}", cfg.seed, gamma_shift.unwrap_or(0.0))?;
    writeln!(w, "{COLUMNS}")?;
    let mut failed = Vec::new();
    for (i, case) in cases.iter().enumerate() {
        let sampler = case.config.build_dyn_model(gamma_shift)?;
        let mut rows = walk_rows(case, sampler.as_ref(), samples, cfg.seed, i as u32)?;
        if case.label == "zero_walk" {
            rows.extend(brownian_rows(case, samples, cfg.seed)?);
        }
        let c = &case.config;
        for r in rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{samples},{},{},{},{},{},{},{}",
                case.suite,
                case.label,
                c.model,
                F(c.a),
                F(c.b),
                F(c.x),
                format_horizon(c.horizon),
                c.n,
                r.quantity,
                F(r.reference),
                F(r.estimate),
                F(r.se),
                F(r.statistic),
                F(r.limit),
                if r.pass() { "pass" } else { "FAIL" }
            )?;
            if !r.pass() {
                failed.push(format!("{}/{}", case.label, r.quantity));
            }
        }
    }
    w.flush()?;
    if failed.is_empty() {
        eprintln!("all {} case(s) passed", cases.len());
        Ok(())
    } else {
        Err(CliError::Validation(failed.join(", ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_named_suite_is_a_valid_config() {
        for s in SUITES {
            let cases = suite_cases(s);
            assert!(!cases.is_empty());
            for case in cases {
                let c = &case.config;
                assert!(c.a < c.x && c.x < c.b);
                c.build_model().unwrap();
            }
        }
        assert!(select("nope", &ExperimentConfig::default()).is_err());
        assert_eq!(select("all", &ExperimentConfig::default()).unwrap().len(), CASES.len());
    }
}
