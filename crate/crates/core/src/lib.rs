//! Inexact online gradient descent (IOGD) for time-varying convex optimization.
//!
//! The crate is organised around one iteration,
//!
//! ```text
//! x_{k+1} = P_X[ x_k - alpha * (grad f_k(x_k) + e_k) ]
//! ```
//!
//! run against a [`problem::ProblemSequence`] with a pluggable gradient-error
//! source, and three application families built on top of it:
//!
//! * [`lsq`]: time-varying least squares solved with sampled (incremental)
//!   gradients whose sample size grows over time.
//! * [`tracking`]: multi-agent multi-target tracking, run in the dual domain
//!   with a closed-form primal step.
//! * [`completion`]: online matrix completion with a proximal step
//!   (singular value thresholding).
//!
//! [`analysis`] evaluates the step-size conditions, contraction constants and
//! regret/tracking bounds of the method, and [`montecarlo`] holds the seeded
//! Monte-Carlo helpers used to compare those bounds with simulated runs.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod completion;
pub mod error;
pub mod feasible;
pub mod iogd;
pub mod lsq;
pub mod montecarlo;
pub mod noise;
pub mod problem;
pub mod trace;
pub mod tracking;

pub use error::{Error, Result};
pub use feasible::FeasibleSet;
pub use iogd::{iogd_step, run_iogd, IogdConfig};
pub use noise::{EpsSchedule, ErrorDistribution, ErrorModel, ErrorRegime};
pub use problem::{ProblemSequence, SlotProblem};
pub use trace::RunTrace;

/// Dense real vector used for decision points and gradients.
pub type Vector = nalgebra::DVector<f64>;
/// Dense real matrix.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Random number generator used everywhere a seed is accepted.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Builds the crate's RNG from a 64-bit seed.
pub fn seeded_rng(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}

/// Formats a float with 17 significant digits, the precision used by every
/// CSV writer in the crate. Round-trips exactly through `str::parse::<f64>`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Crate version, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
