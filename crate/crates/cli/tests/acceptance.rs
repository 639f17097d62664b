//! Acceptance criteria 1 to 10, one PASS/FAIL line each.
//!
//! Every threshold is a named constant below. A criterion also fails if it
//! runs past its time budget. The process exits nonzero if any criterion
//! fails.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;

use exitsim::bandit::run_epsilon_greedy;
use exitsim::bm_exit::exit_time_cdf;
use exitsim::model::InflatedBounds;
use exitsim::oracle::{binomial_z, chi_square_gof, ks_critical_value, ks_one_sample, ks_two_sample, two_proportion_z};
use exitsim::{
    bandit_diff_exit, box_exit, exit_bm, BanditState, EpsilonSchedule, OrnsteinUhlenbeck, Purpose, RewardKind,
    Side, Sinusoidal, StreamKey, WalkPlan, ZeroDrift,
};
use exitsim_cli::commands::sweep_rows;
use exitsim_cli::validate::{suite_cases, walk_rows};
use exitsim_cli::ExperimentConfig;

const SEED: u64 = 20_240_601;
/// Largest accepted |z| of binomial and mean comparisons.
const Z_MAX: f64 = 3.0;
/// Level of KS and chi-square tests: pass when p exceeds it.
const ALPHA: f64 = 0.01;
/// Criterion 8: bandit running mean over best fixed-N mean.
const ACCELERATION_RATIO: f64 = 1.2;
/// Criterion 9: largest allowed `max / min - 1` of bandit means over T.
const T_SPREAD: f64 = 0.5;
/// Criterion 7: best-arm share over the last half of the pulls.
const BEST_ARM_SHARE: f64 = 0.85;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn key(arm: u32) -> StreamKey {
    StreamKey::new(Purpose::Validate).arm(arm)
}

fn brownian_kernel() -> Verdict {
    let n = 100_000;
    let mut pick = key(1).rng(SEED);
    let (mut worst_z, mut worst_d) = (0f64, 0f64);
    let mut ok = true;
    for i in 0..10 {
        let l = pick.random_range(-5.0..5.0);
        let u = l + pick.random_range(0.1..5.0);
        let x = l + (u - l) * pick.random_range(0.01..0.99);
        let mut r = key(2).replication(i).rng(SEED);
        let mut times = Vec::with_capacity(n);
        let mut upper = 0;
        for _ in 0..n {
            let s = exit_bm(&mut r, x, l, u).unwrap();
            upper += (s.side == Side::Upper) as u64;
            times.push(s.time);
        }
        let z = binomial_z(upper, n as u64, (x - l) / (u - l)).unwrap().abs();
        let d = ks_one_sample(&mut times, |t| exit_time_cdf(x, l, u, t).unwrap()).unwrap().statistic
            / ks_critical_value(n, ALPHA);
        ok &= z <= Z_MAX && d < 1.0;
        worst_z = worst_z.max(z);
        worst_d = worst_d.max(d);
    }
    verdict(ok, format!("10 intervals, max |z| {worst_z:.2}, max D / D_crit {worst_d:.3}"))
}

fn zero_drift_collapse() -> Verdict {
    let n = 100_000u64;
    let mut r = key(3).rng(SEED);
    let (mut tb, mut te) = (Vec::new(), Vec::new());
    let (mut ub, mut ue) = (0, 0);
    for _ in 0..n {
        let o = box_exit(&mut r, &ZeroDrift, 0.3, 0.0, 1.0, f64::INFINITY).unwrap();
        ub += (o.position == 1.0) as u64;
        tb.push(o.time);
        let s = exit_bm(&mut r, 0.3, 0.0, 1.0).unwrap();
        ue += (s.side == Side::Upper) as u64;
        te.push(s.time);
    }
    let p = ks_two_sample(&mut tb, &mut te).unwrap().p_value;
    let z = two_proportion_z(ub, n, ue, n).unwrap();
    verdict(p > ALPHA && z.abs() <= Z_MAX, format!("KS p {p:.3}, location z {z:.2}"))
}

fn oracle_agreement() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, suite) in ["sin", "ou1", "ou2", "cir"].into_iter().enumerate() {
        for case in suite_cases(suite) {
            let model = case.config.build_model().unwrap();
            let rows = walk_rows(&case, &model, 20_000, SEED, 100 + i as u32).unwrap();
            ok &= rows.iter().all(|r| r.pass());
            parts.push(format!(
                "{} |z| {}",
                case.label,
                rows.iter().map(|r| format!("{:.2}", r.statistic)).collect::<Vec<_>>().join("/")
            ));
        }
    }
    verdict(ok, parts.join(", "))
}

fn law_invariance() -> Verdict {
    let ou = OrnsteinUhlenbeck::new(1.0).unwrap();
    let n = 10_000;
    let sample = |slices: usize, horizon: f64, arm: u32| -> Vec<f64> {
        WalkPlan::new(&ou, 0.0, 7.0, horizon, slices)
            .unwrap()
            .sample_many(SEED, key(arm), 3.0, n)
            .unwrap()
            .iter()
            .map(|r| r.exit_time)
            .collect()
    };
    let reference = sample(14, 1.0, 200);
    let mut min_p = f64::INFINITY;
    let mut arm = 201;
    for slices in [2, 7, 14, 21] {
        for horizon in [0.5, 1.0, 2.0] {
            if (slices, horizon) == (14, 1.0) {
                continue;
            }
            let mut other = sample(slices, horizon, arm);
            arm += 1;
            min_p = min_p.min(ks_two_sample(&mut reference.clone(), &mut other).unwrap().p_value);
        }
    }
    verdict(min_p > ALPHA, format!("11 configurations against N=14, T=1: min KS p {min_p:.3}"))
}

fn inflated_bounds() -> Verdict {
    let n = 20_000;
    let loose = InflatedBounds {
        model: Sinusoidal,
        factor: 2.0,
    };
    let tight = WalkPlan::new(&Sinusoidal, 0.0, 7.0, 1.0, 14).unwrap().sample_many(SEED, key(300), 3.0, n).unwrap();
    let wide = WalkPlan::new(&loose, 0.0, 7.0, 1.0, 14).unwrap().sample_many(SEED, key(301), 3.0, n).unwrap();
    let mut t1: Vec<f64> = tight.iter().map(|r| r.exit_time).collect();
    let mut t2: Vec<f64> = wide.iter().map(|r| r.exit_time).collect();
    let p = ks_two_sample(&mut t1, &mut t2).unwrap().p_value;
    let work = |rs: &[exitsim::ExitRecord]| rs.iter().map(|r| r.work.total() as f64).sum::<f64>() / rs.len() as f64;
    let (w1, w2) = (work(&tight), work(&wide));
    verdict(p > ALPHA && w2 > w1, format!("KS p {p:.3}, mean work {w1:.1} -> {w2:.1}"))
}

fn example_one(horizon: f64) -> ExperimentConfig {
    ExperimentConfig {
        horizon,
        seed: SEED,
        ..ExperimentConfig::default()
    }
}

/// Returns the verdict and the best mean work of the sweep.
fn cost_unimodality() -> (Verdict, f64) {
    let cfg = ExperimentConfig {
        n_min: 2,
        n0: 21,
        m: 2_000,
        ..example_one(1.0)
    };
    let rows = sweep_rows(&cfg, &Sinusoidal).unwrap();
    let best = rows.iter().min_by(|a, b| a.mean_work.0.total_cmp(&b.mean_work.0)).unwrap();
    (
        verdict(
            best.n > 3 && best.n < 20,
            format!(
                "argmin N = {}, mean work {:.1} (N=2: {:.1}, N=21: {:.1})",
                best.n,
                best.mean_work.0,
                rows[0].mean_work.0,
                rows.last().unwrap().mean_work.0
            ),
        ),
        best.mean_work.0,
    )
}

fn bandit_correctness() -> Verdict {
    let costs = [5.0, 4.0, 2.5, 3.0, 2.5, 9.0, 7.0, 6.0, 8.0];
    let eps = 0.3;
    let mut state = BanditState::new(10, EpsilonSchedule::Fixed(eps)).unwrap();
    for (n, c) in (2..=10).zip(costs) {
        state.update(n, c).unwrap();
    }
    // eps / 9 on every arm plus 1 - eps on N = 4, the first of the two minima
    let law: Vec<f64> = (2..=10).map(|n| eps / 9.0 + if n == 4 { 1.0 - eps } else { 0.0 }).collect();
    let mut r = key(400).rng(SEED);
    let mut counts = vec![0u64; 9];
    for _ in 0..100_000 {
        counts[state.select_arm(&mut r) - 2] += 1;
    }
    let (_, p) = chi_square_gof(&counts, &law).unwrap();

    let mut state = BanditState::new(21, EpsilonSchedule::Fixed(0.1)).unwrap();
    let cost = |n: usize| 1.0 + 0.2 * (n as f64 - 11.0).abs();
    let trace = run_epsilon_greedy(&mut r, &mut state, 10_000, |r, n| Ok(-cost(n) * (1.0 - r.random::<f64>()).ln()))
        .unwrap();
    let share = trace[5_000..].iter().filter(|t| t.n == 11).count() as f64 / 5_000.0;
    verdict(
        p > ALPHA && share >= BEST_ARM_SHARE,
        format!("chi-square p {p:.3}, best-arm share {share:.3}"),
    )
}

fn bandit_mean(horizon: f64) -> (f64, BanditState) {
    let cfg = example_one(horizon);
    let run = bandit_diff_exit(
        &mut StreamKey::new(Purpose::Bandit).rng(cfg.seed),
        &Sinusoidal,
        cfg.x,
        cfg.a,
        cfg.b,
        cfg.horizon,
        21,
        EpsilonSchedule::Fixed(0.1),
        10_000,
        RewardKind::WorkUnits,
    )
    .unwrap();
    (run.trace.last().unwrap().running_mean, run.state)
}

fn bandit_acceleration(best_fixed: f64) -> Verdict {
    let (mean, state) = bandit_mean(1.0);
    // expected cost per pull under the selection law once the greedy arm is
    // the best one: eps times the average over all arms plus (1 - eps) times
    // the best
    let explore = state.arms().map(|n| state.mean_cost(n)).sum::<f64>() / state.n_arms() as f64;
    let expected = 0.1 * explore + 0.9 * best_fixed;
    verdict(
        mean <= ACCELERATION_RATIO * best_fixed,
        format!(
            "running mean {mean:.1} vs {ACCELERATION_RATIO} x {best_fixed:.1} = {:.1}; \
             selection law expects 0.1 x {explore:.1} + 0.9 x {best_fixed:.1} = {expected:.1}",
            ACCELERATION_RATIO * best_fixed
        ),
    )
}

fn horizon_insensitivity() -> Verdict {
    let means: Vec<f64> = [0.5, 1.0, 2.0].iter().map(|&t| bandit_mean(t).0).collect();
    let (lo, hi) = means.iter().fold((f64::INFINITY, 0f64), |(l, h), &m| (l.min(m), h.max(m)));
    let spread = hi / lo - 1.0;
    verdict(
        spread < T_SPREAD,
        format!(
            "means {} for T = 0.5/1/2, spread {:.1}%",
            means.iter().map(|m| format!("{m:.1}")).collect::<Vec<_>>().join("/"),
            100.0 * spread
        ),
    )
}

fn determinism() -> Verdict {
    let runs: [&[&str]; 3] = [
        &["sample", "--M", "2000", "--N", "7", "--seed", "9"],
        &["sweep", "--N-min", "2", "--N0", "10", "--M", "200", "--seed", "9"],
        &["bandit", "--M", "2000", "--N0", "21", "--epsilon", "0.1", "--seed", "9"],
    ];
    let mut ok = true;
    let mut sizes = Vec::new();
    for args in runs {
        let once = || Command::new(env!("CARGO_BIN_EXE_exitsim")).args(args).output().unwrap();
        let (a, b) = (once(), once());
        ok &= a.status.success() && b.status.success() && a.stdout == b.stdout;
        sizes.push(format!("{} {} bytes", args[0], a.stdout.len()));
    }
    verdict(ok, format!("identical output: {}", sizes.join(", ")))
}

fn main() {
    let mut failed = Vec::new();
    let mut report = |id: u32, name: &str, budget_s: u64, f: &mut dyn FnMut() -> Verdict| {
        let started = Instant::now();
        let v = f();
        let elapsed = started.elapsed();
        let budget = Duration::from_secs(budget_s);
        let pass = v.pass && elapsed < budget;
        println!(
            "criterion {id:>2} {} {name} ({:.1} s of {budget_s} s): {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            v.detail
        );
        if !pass {
            failed.push(id);
        }
    };
    report(1, "Brownian kernel exactness", 120, &mut brownian_kernel);
    report(2, "zero-drift collapse", 60, &mut zero_drift_collapse);
    report(3, "oracle agreement", 600, &mut oracle_agreement);
    report(4, "law invariance across N and T", 300, &mut law_invariance);
    report(5, "conservative bounds", 180, &mut inflated_bounds);
    let mut best_fixed = f64::NAN;
    report(6, "cost unimodality", 300, &mut || {
        let (v, best) = cost_unimodality();
        best_fixed = best;
        v
    });
    report(7, "bandit correctness", 60, &mut bandit_correctness);
    report(8, "bandit acceleration", 300, &mut || bandit_acceleration(best_fixed));
    report(9, "horizon insensitivity", 600, &mut horizon_insensitivity);
    report(10, "determinism", 60, &mut determinism);
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
