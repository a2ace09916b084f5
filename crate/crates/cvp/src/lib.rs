//! Solvers for a closest vector problem (CVP) over binary generators.
//!
//! Given a set of 0-1 *generator* vectors, an integer *target* vector and a
//! cap `C`, the problem asks for a nonnegative integer combination of the
//! generators whose l-infinity distance to the target is at most `C` and
//! whose l1 distance (the *total change*) is minimum. An optional second
//! objective term charges the coefficient sum (the *beam-on time*).
//!
//! The crate provides:
//!
//! - [`core`]: domain types, solution evaluation and validation;
//! - [`lp`]: an exact rational simplex for the natural LP relaxation;
//! - [`flow`]: a min-cost flow reduction that solves the problem exactly
//!   when every generator has consecutive ones;
//! - [`rounding`]: randomized rounding of an extremal LP optimum, with a
//!   sum-preserving variant and a Monte Carlo deviation harness;
//! - [`segmentation`]: decomposition of intensity matrices into
//!   leaf-position segments under the minimum separation constraint;
//! - [`oracle`]: brute-force exact solvers used as ground truth in tests;
//! - [`instgen`]: instance factories, including a 3SAT-6 reduction that
//!   produces hard 2-row matrix instances;
//! - [`io`]: JSON instance/solution files and helpers behind the `cvp` CLI.
//!
//! Every solver works in exact integer/rational arithmetic; results are
//! deterministic given the same inputs (and the same seed, where random).
//!
//! See the `examples/` directory for one runnable walkthrough per
//! capability, e.g. `cargo run --release --example min_cost_flow`.

pub mod cli;
pub mod core;
pub mod flow;
pub mod instgen;
pub mod io;
pub mod lp;
pub mod oracle;
pub mod rat;
pub mod rounding;
pub mod segmentation;

pub use crate::core::{
    Cap, CvpInstance, Generator, Interval, Method, ObjectiveWeights, OnesSpan, Solution,
    SolveReport, SolveStatus,
};
