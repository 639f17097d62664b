//! Epsilon-greedy choice of the slicing parameter `N`.
//!
//! Arms are `N ∈ {2, …, N0}` and the reward of a pull is the cost of one
//! walk, so the greedy arm is the one with the *smallest* empirical mean.
//! The first pull is uniform. Afterwards arm `N` is chosen with probability
//!
//! ```text
//! eps / (N0 - 1) + (1 - eps) * [N = argmin mean_cost]
//! ```
//!
//! with ties going to the smallest `N`. Arms never pulled report a mean of
//! zero, so the greedy branch tries every arm once before settling.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{ensure, Error, Result};
use crate::model::Diffusion;
use crate::random_walk::{ExitRecord, WalkPlan};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonSchedule {
    Fixed(f64),
    /// `eps(n) = min(1, n^{-1/3} ((N0 - 1) ln n)^{1/3})`.
    CubeRootDecay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RewardKind {
    /// Milliseconds of wall-clock time (monotonic clock).
    WallTime,
    /// [`crate::WorkCounter::total`] of the walk.
    WorkUnits,
}

/// Smallest wall-time reward, the clock resolution used for reporting.
const WALL_RESOLUTION_MS: f64 = 1e-3;

impl RewardKind {
    pub fn reward(&self, record: &ExitRecord) -> f64 {
        match self {
            RewardKind::WallTime => (record.wall_time * 1e3).max(WALL_RESOLUTION_MS),
            RewardKind::WorkUnits => record.work.total() as f64,
        }
    }
}

impl fmt::Display for RewardKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RewardKind::WallTime => "wall",
            RewardKind::WorkUnits => "work",
        })
    }
}

impl FromStr for RewardKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wall" | "wall_time" => Ok(RewardKind::WallTime),
            "work" | "work_units" => Ok(RewardKind::WorkUnits),
            other => Err(Error::Configuration(format!("unknown reward `{other}` (expected wall or work)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BanditState {
    n0: usize,
    mean_cost: Vec<f64>,
    pulls: Vec<u64>,
    schedule: EpsilonSchedule,
}

impl BanditState {
    pub fn new(n0: usize, schedule: EpsilonSchedule) -> Result<Self> {
        ensure!(n0 >= 3, Precondition, "N0 must be at least 3, got {n0}");
        if let EpsilonSchedule::Fixed(eps) = schedule {
            ensure!(eps > 0.0 && eps <= 1.0, Precondition, "epsilon must lie in (0, 1], got {eps}");
        }
        Ok(Self {
            n0,
            mean_cost: vec![0.0; n0 - 1],
            pulls: vec![0; n0 - 1],
            schedule,
        })
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn n_arms(&self) -> usize {
        self.n0 - 1
    }

    pub fn arms(&self) -> std::ops::RangeInclusive<usize> {
        2..=self.n0
    }

    pub fn mean_cost(&self, n: usize) -> f64 {
        self.mean_cost[n - 2]
    }

    pub fn pulls(&self, n: usize) -> u64 {
        self.pulls[n - 2]
    }

    pub fn completed(&self) -> u64 {
        self.pulls.iter().sum()
    }

    /// Epsilon used for the next pull (`1` for the very first one).
    pub fn epsilon(&self) -> f64 {
        let n = self.completed() + 1;
        if n == 1 {
            return 1.0;
        }
        match self.schedule {
            EpsilonSchedule::Fixed(eps) => eps,
            EpsilonSchedule::CubeRootDecay => {
                let nf = n as f64;
                (nf.powf(-1.0 / 3.0) * ((self.n0 - 1) as f64 * nf.ln()).cbrt()).min(1.0)
            }
        }
    }

    /// `argmin mean_cost`, smallest `N` on ties.
    pub fn greedy_arm(&self) -> usize {
        let mut best = 0;
        for (i, &m) in self.mean_cost.iter().enumerate() {
            if m < self.mean_cost[best] {
                best = i;
            }
        }
        best + 2
    }

    /// Probability of each arm `(N, p)` for the next pull.
    pub fn selection_probabilities(&self) -> Vec<(usize, f64)> {
        let eps = self.epsilon();
        let greedy = self.greedy_arm();
        let base = eps / self.n_arms() as f64;
        self.arms()
            .map(|n| (n, if n == greedy { base + (1.0 - eps) } else { base }))
            .collect()
    }

    pub fn select_arm<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let eps = self.epsilon();
        if eps >= 1.0 || rng.random::<f64>() < eps {
            rng.random_range(self.arms())
        } else {
            self.greedy_arm()
        }
    }

    pub fn update(&mut self, n: usize, reward: f64) -> Result<()> {
        ensure!(self.arms().contains(&n), Precondition, "arm {n} outside 2..={}", self.n0);
        ensure!(
            reward > 0.0 && reward.is_finite(),
            Precondition,
            "reward must be positive and finite, got {reward}"
        );
        let i = n - 2;
        let m = self.pulls[i] as f64;
        self.mean_cost[i] = (m * self.mean_cost[i] + reward) / (m + 1.0);
        self.pulls[i] += 1;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: u64,
    pub n: usize,
    pub reward: f64,
    /// Mean of all rewards up to and including this iteration.
    pub running_mean: f64,
    /// Epsilon in force when the arm was chosen.
    pub epsilon: f64,
}

#[derive(Debug, Clone)]
pub struct BanditRun {
    pub records: Vec<ExitRecord>,
    pub trace: Vec<TraceRow>,
    pub state: BanditState,
}

/// Runs `m` pulls against `env`, which maps an arm to its observed reward.
pub fn run_epsilon_greedy<R, F>(rng: &mut R, state: &mut BanditState, m: u64, mut env: F) -> Result<Vec<TraceRow>>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R, usize) -> Result<f64>,
{
    let mut trace = Vec::with_capacity(m as usize);
    let mut sum = 0.0;
    for iter in 1..=m {
        let epsilon = state.epsilon();
        let n = state.select_arm(rng);
        let reward = env(rng, n)?;
        state.update(n, reward)?;
        sum += reward;
        trace.push(TraceRow {
            iter,
            n,
            reward,
            running_mean: sum / iter as f64,
            epsilon,
        });
    }
    Ok(trace)
}

/// `m` exits of `model` from `[a, b]` started at `x`, each with an `N`
/// chosen by the bandit over `{2, …, n0}`.
#[allow(clippy::too_many_arguments)]
pub fn bandit_diff_exit<R, M>(
    rng: &mut R,
    model: &M,
    x: f64,
    a: f64,
    b: f64,
    horizon: f64,
    n0: usize,
    schedule: EpsilonSchedule,
    m: u64,
    reward: RewardKind,
) -> Result<BanditRun>
where
    R: Rng + ?Sized,
    M: Diffusion + ?Sized,
{
    ensure!(m >= 1, Precondition, "M must be at least 1");
    let mut state = BanditState::new(n0, schedule)?;
    let mut plans: BTreeMap<usize, WalkPlan<'_, M>> = BTreeMap::new();
    let mut records = Vec::with_capacity(m as usize);
    let trace = run_epsilon_greedy(rng, &mut state, m, |rng, n| {
        if !plans.contains_key(&n) {
            plans.insert(n, WalkPlan::new(model, a, b, horizon, n)?);
        }
        let rec = plans[&n].sample(rng, x)?;
        records.push(rec);
        Ok(reward.reward(&rec))
    })?;
    Ok(BanditRun { records, trace, state })
}
