//! `sample`, `sweep`, `bandit` and `kernel-check`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use exitsim::bm_exit::{exit_side_cdf_with, exit_time_cdf_with, Series};
use exitsim::box_exit::box_exit_with_bounds;
use exitsim::model::compute_bounds;
use exitsim::{bandit_diff_exit, BoxOutcome, Diffusion, ExitRecord, Purpose, Side, StreamKey, WalkPlan};

use crate::config::format_horizon;
use crate::output::{self, mean_ci, wall_ms, F};
use crate::{CliError, ExperimentConfig, KernelCheckArgs};

/// Columns of `sample`.
pub const SAMPLE_COLUMNS: &str = "seed,replication,exit_time,exit_location,steps,restarts,exit_bm_calls,cond_bm_calls,exp_draws,uniform_draws,work,wall_ms,N,T";
/// Columns of `sample --single-box`.
pub const BOX_COLUMNS: &str =
    "seed,replication,time,position,exited,restarts,exit_bm_calls,cond_bm_calls,exp_draws,uniform_draws,work,wall_ms,T";
/// Columns of `sweep`.
pub const SWEEP_COLUMNS: &str = "N,M,mean_work,work_ci95,mean_steps,steps_ci95,mean_wall_ms,wall_ms_ci95,mean_exit_time,exit_time_ci95,p_exit_b";
/// Columns of the `bandit` trace.
pub const TRACE_COLUMNS: &str = "iter,N,reward,running_mean,epsilon_effective";
/// Columns of the `bandit` arm summary.
pub const ARM_COLUMNS: &str = "N,pulls,mean_cost";
/// Columns of `kernel-check`.
pub const KERNEL_COLUMNS: &str = "x,l,u,t,cdf_image,cdf_spectral,abs_diff,lower_image,lower_spectral,upper_image,upper_spectral";

fn ci_text(mean: f64, half: f64) -> String {
    format!("{mean} (95% CI {} to {})", mean - half, mean + half)
}

/// `M` exits with the walk at fixed `N`, or single rectangles with
/// `single_box`.
pub fn sample(cfg: &ExperimentConfig, single_box: bool) -> Result<(), CliError> {
    let model = cfg.build_model()?;
    if single_box {
        return sample_single_box(cfg, &model);
    }
    let plan = WalkPlan::new(&model, cfg.a, cfg.b, cfg.horizon, cfg.n)?;
    let records = plan.sample_many(cfg.seed, StreamKey::new(Purpose::Sample), cfg.x, cfg.m as usize)?;
    let mut w = output::open(cfg.out.as_deref())?;
    output::header(&mut *w, "sample", Some(cfg), cfg.timing)?;
    writeln!(w, "{SAMPLE_COLUMNS}")?;
    for (i, r) in records.iter().enumerate() {
        writeln!(
            w,
            "{},{i},{},{},{},{},{},{},{},{},{},{},{},{}",
            cfg.seed,
            F(r.exit_time),
            F(r.exit_location),
            r.steps,
            r.work.restarts,
            r.work.exit_bm_calls,
            r.work.cond_bm_calls,
            r.work.exp_draws,
            r.work.uniform_draws,
            r.work.total(),
            wall_ms(r.wall_time, cfg.timing),
            r.chosen_n,
            format_horizon(cfg.horizon)
        )?;
    }
    w.flush()?;
    eprintln!("{}", sample_summary(&records, cfg));
    Ok(())
}

/// Human-readable summary of a `sample` run.
pub fn sample_summary(records: &[ExitRecord], cfg: &ExperimentConfig) -> String {
    let (mt, mt_h) = mean_ci(records.iter().map(|r| r.exit_time));
    let (pb, pb_h) = mean_ci(records.iter().map(|r| if r.exit_location == cfg.b { 1.0 } else { 0.0 }));
    let mut s = format!(
        "M={} mean exit time {}; exit at b {}",
        records.len(),
        ci_text(mt, mt_h),
        ci_text(pb, pb_h)
    );
    if cfg.timing {
        let (wm, wm_h) = mean_ci(records.iter().map(|r| r.wall_time * 1e3));
        s.push_str(&format!("; wall ms {}", ci_text(wm, wm_h)));
    }
    s
}

fn sample_single_box(cfg: &ExperimentConfig, model: &dyn Diffusion) -> Result<(), CliError> {
    let (l, u, z) = (model.lamperti(cfg.a), model.lamperti(cfg.b), model.lamperti(cfg.x));
    let bounds = compute_bounds(model, l, u)?;
    let key = StreamKey::new(Purpose::Sample);
    let draws: Vec<(BoxOutcome, f64)> = (0..cfg.m)
        .into_par_iter()
        .map(|i| {
            let started = Instant::now();
            let out = box_exit_with_bounds(&mut key.replication(i).rng(cfg.seed), model, &bounds, z, l, u, cfg.horizon)?;
            Ok((out, started.elapsed().as_secs_f64()))
        })
        .collect::<Result<_, exitsim::Error>>()?;
    let mut w = output::open(cfg.out.as_deref())?;
    output::header(&mut *w, "sample --single-box", Some(cfg), cfg.timing)?;
    writeln!(w, "{BOX_COLUMNS}")?;
    for (i, (o, secs)) in draws.iter().enumerate() {
        let position = match (o.exited, o.position == l) {
            (true, true) => cfg.a,
            (true, false) => cfg.b,
            (false, _) => model.lamperti_inverse(o.position),
        };
        writeln!(
            w,
            "{},{i},{},{},{},{},{},{},{},{},{},{},{}",
            cfg.seed,
            F(o.time),
            F(position),
            o.exited,
            o.work.restarts,
            o.work.exit_bm_calls,
            o.work.cond_bm_calls,
            o.work.exp_draws,
            o.work.uniform_draws,
            o.work.total(),
            wall_ms(*secs, cfg.timing),
            format_horizon(cfg.horizon)
        )?;
    }
    w.flush()?;
    let exited = draws.iter().filter(|(o, _)| o.exited).count();
    eprintln!("M={} exited before T: {exited}", draws.len());
    Ok(())
}

/// One row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub mean_work: (f64, f64),
    pub mean_steps: (f64, f64),
    pub mean_wall_ms: (f64, f64),
    pub mean_exit_time: (f64, f64),
    pub p_exit_b: f64,
}

/// Mean cost for every `N` in `n_min..=n0`. Every `N` reuses the same
/// substreams, so differences between rows are not sampling noise in the
/// starting randomness.
pub fn sweep_rows(cfg: &ExperimentConfig, model: &dyn Diffusion) -> Result<Vec<SweepRow>, CliError> {
    let key = StreamKey::new(Purpose::Sweep);
    let mut rows = Vec::new();
    for n in cfg.n_min..=cfg.n0 {
        let plan = WalkPlan::new(model, cfg.a, cfg.b, cfg.horizon, n)?;
        let recs = plan.sample_many(cfg.seed, key, cfg.x, cfg.m as usize)?;
        rows.push(SweepRow {
            n,
            mean_work: mean_ci(recs.iter().map(|r| r.work.total() as f64)),
            mean_steps: mean_ci(recs.iter().map(|r| r.steps as f64)),
            mean_wall_ms: mean_ci(recs.iter().map(|r| r.wall_time * 1e3)),
            mean_exit_time: mean_ci(recs.iter().map(|r| r.exit_time)),
            p_exit_b: recs.iter().filter(|r| r.exit_location == cfg.b).count() as f64 / recs.len() as f64,
        });
    }
    Ok(rows)
}

pub fn sweep(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let model = cfg.build_model()?;
    let rows = sweep_rows(cfg, &model)?;
    let mut w = output::open(cfg.out.as_deref())?;
    output::header(&mut *w, "sweep", Some(cfg), cfg.timing)?;
    writeln!(w, "{SWEEP_COLUMNS}")?;
    for r in &rows {
        let (wall, wall_h) = if cfg.timing {
            (format!("{:.3}", r.mean_wall_ms.0), format!("{:.3}", r.mean_wall_ms.1))
        } else {
            ("NA".into(), "NA".into())
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{wall},{wall_h},{},{},{}",
            r.n,
            cfg.m,
            F(r.mean_work.0),
            F(r.mean_work.1),
            F(r.mean_steps.0),
            F(r.mean_steps.1),
            F(r.mean_exit_time.0),
            F(r.mean_exit_time.1),
            F(r.p_exit_b)
        )?;
    }
    w.flush()?;
    if let Some(best) = rows.iter().min_by(|p, q| p.mean_work.0.total_cmp(&q.mean_work.0)) {
        eprintln!("lowest mean work {} at N={}", best.mean_work.0, best.n);
    }
    Ok(())
}

/// Arm summary path: `--arms-out`, else `<out stem>_arms.csv` next to
/// `--out`.
pub fn arms_path(out: Option<&Path>, arms_out: Option<&Path>) -> Option<PathBuf> {
    if let Some(p) = arms_out {
        return Some(p.to_path_buf());
    }
    let out = out?;
    let stem = out.file_stem()?.to_string_lossy();
    Some(out.with_file_name(format!("{stem}_arms.csv")))
}

/// `M` exits with `N` chosen by the bandit; the trace goes to `--out`, the
/// per-arm summary to [`arms_path`] (both to standard output if neither is
/// set).
pub fn bandit(cfg: &ExperimentConfig, arms_out: Option<&Path>) -> Result<(), CliError> {
    let model = cfg.build_model()?;
    let mut rng = StreamKey::new(Purpose::Bandit).rng(cfg.seed);
    let run = bandit_diff_exit(
        &mut rng,
        &model,
        cfg.x,
        cfg.a,
        cfg.b,
        cfg.horizon,
        cfg.n0,
        cfg.epsilon,
        cfg.m,
        cfg.reward,
    )?;
    let mut w = output::open(cfg.out.as_deref())?;
    output::header(&mut *w, "bandit", Some(cfg), cfg.timing)?;
    writeln!(w, "{TRACE_COLUMNS}")?;
    for t in &run.trace {
        writeln!(w, "{},{},{},{},{}", t.iter, t.n, F(t.reward), F(t.running_mean), F(t.epsilon))?;
    }
    let arms = arms_path(cfg.out.as_deref(), arms_out);
    if arms.is_some() {
        w.flush()?;
        w = output::open(arms.as_deref())?;
        output::header(&mut *w, "bandit arms", Some(cfg), cfg.timing)?;
    } else {
        writeln!(w, "# arms")?;
    }
    writeln!(w, "{ARM_COLUMNS}")?;
    for n in run.state.arms() {
        writeln!(w, "{n},{},{}", run.state.pulls(n), F(run.state.mean_cost(n)))?;
    }
    w.flush()?;
    let last = run.trace.last().map_or(f64::NAN, |t| t.running_mean);
    eprintln!(
        "M={} final running mean {} ({}); greedy arm N={}",
        cfg.m,
        last,
        cfg.reward,
        run.state.greedy_arm()
    );
    Ok(())
}

/// CDF tables of the Brownian exit from `(l, u)` by both series.
pub fn kernel_check(args: &KernelCheckArgs) -> Result<(), CliError> {
    if !(args.t_min > 0.0 && args.t_max > args.t_min && args.points >= 2) {
        return Err(CliError::Config("need 0 < t-min < t-max and at least two points".into()));
    }
    let mut w = output::open(args.out.as_deref())?;
    output::header(&mut *w, "kernel-check", None, false)?;
    writeln!(w, "{KERNEL_COLUMNS}")?;
    let ratio = (args.t_max / args.t_min).ln();
    for i in 0..args.points {
        let t = args.t_min * (ratio * i as f64 / (args.points - 1) as f64).exp();
        let (x, l, u) = (args.x, args.l, args.u);
        let img = exit_time_cdf_with(x, l, u, t, Series::Image)?;
        let spec = exit_time_cdf_with(x, l, u, t, Series::Spectral)?;
        let side = |s: Side, series: Series| exit_side_cdf_with(x, l, u, t, s, series);
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            F(x),
            F(l),
            F(u),
            F(t),
            F(img),
            F(spec),
            F((img - spec).abs()),
            F(side(Side::Lower, Series::Image)?),
            F(side(Side::Lower, Series::Spectral)?),
            F(side(Side::Upper, Series::Image)?),
            F(side(Side::Upper, Series::Spectral)?)
        )?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arms_path_rules() {
        assert_eq!(arms_path(None, None), None);
        assert_eq!(
            arms_path(Some(Path::new("/tmp/run.csv")), None),
            Some(PathBuf::from("/tmp/run_arms.csv"))
        );
        assert_eq!(
            arms_path(Some(Path::new("run.csv")), Some(Path::new("a.csv"))),
            Some(PathBuf::from("a.csv"))
        );
    }
}
