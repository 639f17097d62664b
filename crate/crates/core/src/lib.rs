//! Exact simulation of the exit time and exit location of one-dimensional
//! diffusions from an interval.
//!
//! The building blocks, bottom-up:
//!
//! * [`bm_exit`]: exact Brownian primitives (exit time/side from an interval,
//!   position at a fixed time conditioned on survival) built on rigorous
//!   sandwich bounds of the absorbing heat kernel.
//! * [`box_exit`]: acceptance-rejection sampler for the exit of a unit-diffusion
//!   process from a space-time rectangle `[0, T] x [l, u]`.
//! * [`random_walk`]: a random walk on overlapping slices of the (Lamperti
//!   transformed) interval, chaining rectangle exits until the process leaves
//!   `[a, b]`.
//! * [`bandit`]: epsilon-greedy tuning of the slicing parameter `N` driven by
//!   the observed cost of each simulation.
//! * [`oracle`]: independent ground truth (scale and Green functions, Euler
//!   scheme, statistical tests) used for validation.
//!
//! All samplers are deterministic functions of the RNG stream they are given.

pub mod bandit;
pub mod bm_exit;
pub mod box_exit;
pub mod error;
pub mod model;
pub mod oracle;
pub mod random_walk;
pub mod rng;

pub use bandit::{bandit_diff_exit, BanditRun, BanditState, EpsilonSchedule, RewardKind, TraceRow};
pub use bm_exit::{cond_bm, exit_bm, BmExitSample, Side};
pub use box_exit::{box_exit, exp_draw, BoxOutcome, WorkCounter};
pub use error::{Error, Result};
pub use model::{
    BuiltinModel, Cir, CustomModel, Diffusion, IntervalBounds, OrnsteinUhlenbeck, Sinusoidal,
    ZeroDrift,
};
pub use random_walk::{diff_exit, ExitRecord, SliceGrid, WalkPlan};
pub use rng::{SimRng, StreamKey, Purpose};
