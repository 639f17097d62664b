//! Random walk on overlapping space-time rectangles.
//!
//! The transformed interval `[â, b̂]` is cut into `N` cells of width
//! `δ = (b̂ - â) / N`; slice `ι` is `(a_{ι-1}, a_{ι+1})`. From the current
//! position the walk runs [`box_exit`] on the slice picked by
//! [`SliceGrid::slice_index`] and stops once a box ends exactly on `â` or
//! `b̂`. Grid points are `â + jδ` (one multiplication each) and the last one
//! is `b̂` itself, so reaching an end is an exact float comparison.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use crate::box_exit::{box_exit_with_bounds, BoxOutcome, WorkCounter};
use crate::error::{ensure, Error, Result};
use crate::model::{compute_bounds, Diffusion, IntervalBounds};
use crate::rng::StreamKey;

/// Boxes allowed in one walk before it is declared runaway.
pub const STEP_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceGrid {
    a_hat: f64,
    b_hat: f64,
    n: usize,
    delta: f64,
}

impl SliceGrid {
    pub fn new(a_hat: f64, b_hat: f64, n: usize) -> Result<Self> {
        ensure!(n >= 2, Precondition, "N must be at least 2, got {n}");
        ensure!(
            a_hat.is_finite() && b_hat.is_finite() && a_hat < b_hat,
            Precondition,
            "invalid interval [{a_hat}, {b_hat}]"
        );
        Ok(Self {
            a_hat,
            b_hat,
            n,
            delta: (b_hat - a_hat) / n as f64,
        })
    }

    pub fn a_hat(&self) -> f64 {
        self.a_hat
    }

    pub fn b_hat(&self) -> f64 {
        self.b_hat
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Grid point `a_j`; `a_N` is `b̂` exactly.
    pub fn point(&self, j: usize) -> f64 {
        if j >= self.n {
            self.b_hat
        } else {
            self.a_hat + j as f64 * self.delta
        }
    }

    /// The slice in charge of `x`: `j` when `x - â ∈ [δ/2 + (j-1)δ, δ/2 + jδ)`,
    /// clamped to `1` and `N - 1` within `δ/2` of the ends.
    pub fn slice_index(&self, x: f64) -> Result<usize> {
        ensure!(
            x >= self.a_hat && x <= self.b_hat,
            Precondition,
            "{x} outside [{}, {}]",
            self.a_hat,
            self.b_hat
        );
        let half = 0.5 * self.delta;
        let last = self.n - 1;
        if x <= self.a_hat + half {
            return Ok(1);
        }
        if x >= self.b_hat - half {
            return Ok(last);
        }
        let mut j = (((x - self.a_hat - half) / self.delta).floor() as usize + 1).clamp(1, last);
        // rounding in the division can land one cell off
        while j > 1 && x <= self.point(j - 1) {
            j -= 1;
        }
        while j < last && x >= self.point(j + 1) {
            j += 1;
        }
        Ok(j)
    }

    /// `(a_{ι-1}, a_{ι+1})`.
    pub fn slice_interval(&self, iota: usize) -> Result<(f64, f64)> {
        ensure!(
            iota >= 1 && iota < self.n,
            Precondition,
            "slice index {iota} outside 1..={}",
            self.n - 1
        );
        Ok((self.point(iota - 1), self.point(iota + 1)))
    }
}

/// One simulated exit from `[a, b]`, in original coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitRecord {
    pub exit_time: f64,
    /// `a` or `b`, bit-exact.
    pub exit_location: f64,
    /// Number of rectangles used.
    pub steps: u64,
    pub work: WorkCounter,
    /// Seconds spent in the walk, from a monotonic clock.
    pub wall_time: f64,
    pub chosen_n: usize,
}

/// Everything about a walk that does not depend on the start point: the
/// grid and the bounds of every slice.
#[derive(Debug, Clone)]
pub struct WalkPlan<'m, M: ?Sized> {
    model: &'m M,
    a: f64,
    b: f64,
    horizon: f64,
    grid: SliceGrid,
    bounds: Vec<IntervalBounds>,
}

impl<'m, M: Diffusion + ?Sized> WalkPlan<'m, M> {
    /// Prepares walks on `[a, b]` (original coordinates) with `n` cells and
    /// rectangle horizon `horizon` (may be infinite if `gamma ≥ 0` on every
    /// slice).
    pub fn new(model: &'m M, a: f64, b: f64, horizon: f64, n: usize) -> Result<Self> {
        ensure!(a < b, Precondition, "empty interval [{a}, {b}]");
        ensure!(
            model.domain().contains_closed(a, b),
            Domain,
            "[{a}, {b}] is not inside the domain of {}",
            model.name()
        );
        ensure!(horizon > 0.0, Precondition, "horizon must be positive, got {horizon}");
        let grid = SliceGrid::new(model.lamperti(a), model.lamperti(b), n)?;
        let bounds = (1..n)
            .map(|i| {
                let (l, u) = grid.slice_interval(i)?;
                compute_bounds(model, l, u)
            })
            .collect::<Result<Vec<_>>>()?;
        if horizon.is_infinite() {
            if let Some(i) = bounds.iter().position(|b| b.gamma_inf < 0.0) {
                let (l, u) = grid.slice_interval(i + 1)?;
                return Err(Error::Configuration(format!(
                    "infinite horizon needs gamma >= 0 on every slice; slice [{l}, {u}] has inf gamma = {}",
                    bounds[i].gamma_inf
                )));
            }
        }
        Ok(Self {
            model,
            a,
            b,
            horizon,
            grid,
            bounds,
        })
    }

    pub fn grid(&self) -> &SliceGrid {
        &self.grid
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Bounds of slice `iota` (1-based).
    pub fn slice_bounds(&self, iota: usize) -> &IntervalBounds {
        &self.bounds[iota - 1]
    }

    /// One exit from `[a, b]` started at `x` (original coordinates).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, x: f64) -> Result<ExitRecord> {
        self.walk(rng, x, |_, _| {})
    }

    /// Like [`WalkPlan::sample`], also returning every rectangle as
    /// `(slice index, start, outcome)`.
    pub fn sample_traced<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        x: f64,
    ) -> Result<(ExitRecord, Vec<(usize, f64, BoxOutcome)>)> {
        let mut boxes = Vec::new();
        let rec = self.walk(rng, x, |iota, (z, o)| boxes.push((iota, z, o)))?;
        Ok((rec, boxes))
    }

    fn walk<R, F>(&self, rng: &mut R, x: f64, mut observe: F) -> Result<ExitRecord>
    where
        R: Rng + ?Sized,
        F: FnMut(usize, (f64, BoxOutcome)),
    {
        ensure!(
            self.a < x && x < self.b,
            Precondition,
            "start {x} must lie strictly inside ({}, {})",
            self.a,
            self.b
        );
        let started = Instant::now();
        let (a_hat, b_hat) = (self.grid.a_hat(), self.grid.b_hat());
        let mut z = self.model.lamperti(x);
        ensure!(
            a_hat < z && z < b_hat,
            Domain,
            "transformed start {z} is not inside ({a_hat}, {b_hat})"
        );
        let mut time = 0.0;
        let mut steps = 0u64;
        let mut work = WorkCounter::default();
        while z != a_hat && z != b_hat {
            if steps >= STEP_CAP {
                return Err(Error::Runaway(format!("walk exceeded {STEP_CAP} rectangles")));
            }
            let iota = self.grid.slice_index(z)?;
            let (l, u) = self.grid.slice_interval(iota)?;
            let out = box_exit_with_bounds(rng, self.model, &self.bounds[iota - 1], z, l, u, self.horizon)?;
            observe(iota, (z, out));
            time += out.time;
            work += out.work;
            steps += 1;
            z = out.position;
        }
        Ok(ExitRecord {
            exit_time: time,
            exit_location: if z == a_hat { self.a } else { self.b },
            steps,
            work,
            wall_time: started.elapsed().as_secs_f64(),
            chosen_n: self.grid.n(),
        })
    }

    /// `m` independent exits in parallel; replication `i` uses the stream
    /// `key.replication(i)`, so the result does not depend on scheduling.
    pub fn sample_many(&self, seed: u64, key: StreamKey, x: f64, m: usize) -> Result<Vec<ExitRecord>> {
        (0..m as u64)
            .into_par_iter()
            .map(|i| self.sample(&mut key.replication(i).rng(seed), x))
            .collect()
    }
}

/// One exit of `model` from `[a, b]` started at `x`, with `n` cells and
/// rectangle horizon `horizon`.
pub fn diff_exit<R, M>(rng: &mut R, model: &M, x: f64, a: f64, b: f64, horizon: f64, n: usize) -> Result<ExitRecord>
where
    R: Rng + ?Sized,
    M: Diffusion + ?Sized,
{
    WalkPlan::new(model, a, b, horizon, n)?.sample(rng, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Cir, OrnsteinUhlenbeck, Sinusoidal, ZeroDrift};
    use crate::rng::Purpose;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid7() -> SliceGrid {
        SliceGrid::new(0.0, 7.0, 7).unwrap()
    }

    #[test]
    fn slice_index_examples() {
        let g = grid7();
        assert_eq!(g.slice_index(3.2).unwrap(), 3);
        assert_eq!(g.slice_index(0.1).unwrap(), 1);
        assert_eq!(g.slice_index(6.9).unwrap(), 6);
        assert_eq!(g.slice_index(2.5).unwrap(), 3);
        assert_eq!(g.slice_index(2.49).unwrap(), 2);
        assert!(matches!(g.slice_index(7.5), Err(Error::Precondition(_))));
    }

    #[test]
    fn slice_interval_examples() {
        let g = grid7();
        assert_eq!(g.slice_interval(1).unwrap(), (0.0, 2.0));
        assert_eq!(g.slice_interval(3).unwrap(), (2.0, 4.0));
        assert_eq!(g.slice_interval(6).unwrap().1, 7.0);
        assert!(g.slice_interval(0).is_err() && g.slice_interval(7).is_err());
        let odd = SliceGrid::new(0.1, 0.7, 3).unwrap();
        assert_eq!(odd.slice_interval(2).unwrap().1, 0.7);
    }

    #[test]
    fn slices_cover_the_interval() {
        for n in 2..=30 {
            let g = SliceGrid::new(-1.3, 2.9, n).unwrap();
            for i in 1..10_000 {
                let x = -1.3 + 4.2 * i as f64 / 10_000.0;
                let iota = g.slice_index(x).unwrap();
                let (l, u) = g.slice_interval(iota).unwrap();
                assert!(l < x && x < u, "n={n} x={x} slice {iota} = ({l}, {u})");
            }
        }
    }

    proptest! {
        #[test]
        fn chosen_slice_keeps_half_cell_margin(
            a in -50.0f64..50.0, w in 0.01f64..100.0, n in 2usize..70, s in 0.0f64..1.0,
        ) {
            let g = SliceGrid::new(a, a + w, n).unwrap();
            let x = a + s * w;
            prop_assume!(x > a && x < a + w);
            let iota = g.slice_index(x).unwrap();
            let (l, u) = g.slice_interval(iota).unwrap();
            prop_assert!(l < x && x < u);
            let d = g.delta();
            if x >= a + d / 2.0 && x <= a + w - d / 2.0 {
                prop_assert!((x - l).min(u - x) >= d / 2.0 * (1.0 - 1e-9));
            }
        }
    }

    #[test]
    fn records_end_on_the_original_endpoints() {
        let cir = Cir::new(3.0, 7.0, 1.0).unwrap();
        let plan = WalkPlan::new(&cir, 1.0, 6.0, 1.0, 10).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..300 {
            let rec = plan.sample(&mut r, 3.0).unwrap();
            assert!(rec.exit_location == 1.0 || rec.exit_location == 6.0);
            assert!(rec.steps >= 1 && rec.exit_time > 0.0);
            assert_eq!(rec.chosen_n, 10);
        }
    }

    #[test]
    fn exit_time_is_sum_of_box_times() {
        let ou = OrnsteinUhlenbeck::new(1.0).unwrap();
        let plan = WalkPlan::new(&ou, 0.0, 7.0, 1.0, 14).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let (rec, boxes) = plan.sample_traced(&mut r, 3.0).unwrap();
            assert_eq!(rec.steps as usize, boxes.len());
            let total: f64 = boxes.iter().map(|(_, _, o)| o.time).sum();
            assert_eq!(rec.exit_time, total);
        }
    }

    #[test]
    fn infinite_horizon_checked_per_slice() {
        assert!(WalkPlan::new(&Sinusoidal, 0.0, 7.0, f64::INFINITY, 7).is_ok());
        let ou = OrnsteinUhlenbeck::new(2.0).unwrap();
        assert!(matches!(
            WalkPlan::new(&ou, -2.0, 2.0, f64::INFINITY, 5),
            Err(Error::Configuration(_))
        ));
        // gamma >= 0 when |y| >= 1/sqrt(lambda)
        let ou1 = OrnsteinUhlenbeck::new(1.0).unwrap();
        assert!(WalkPlan::new(&ou1, 1.0, 7.0, f64::INFINITY, 6).is_ok());
    }

    #[test]
    fn two_cells_use_the_whole_interval() {
        let plan = WalkPlan::new(&ZeroDrift, 0.0, 1.0, 0.05, 2).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(3);
        let (_, boxes) = plan.sample_traced(&mut r, 0.5).unwrap();
        for (iota, _, _) in boxes {
            assert_eq!(plan.grid().slice_interval(iota).unwrap(), (0.0, 1.0));
        }
    }

    #[test]
    fn starts_are_interior_over_many_steps() {
        let ou = OrnsteinUhlenbeck::new(2.0).unwrap();
        let plan = WalkPlan::new(&ou, -2.0, 2.0, 0.5, 21).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(4);
        let mut steps = 0;
        while steps < 200_000 {
            let (_, boxes) = plan.sample_traced(&mut r, 0.5).unwrap();
            for (iota, z, _) in &boxes {
                let (l, u) = plan.grid().slice_interval(*iota).unwrap();
                assert!(l < *z && *z < u);
            }
            steps += boxes.len();
        }
    }

    #[test]
    fn sample_many_is_schedule_independent() {
        let plan = WalkPlan::new(&Sinusoidal, 0.0, 7.0, 1.0, 7).unwrap();
        let key = StreamKey::new(Purpose::Test).arm(7);
        let par = plan.sample_many(11, key, 3.0, 64).unwrap();
        for (i, rec) in par.iter().enumerate() {
            let seq = plan.sample(&mut key.replication(i as u64).rng(11), 3.0).unwrap();
            assert_eq!(rec.exit_time.to_bits(), seq.exit_time.to_bits());
            assert_eq!(rec.work, seq.work);
        }
    }
}
