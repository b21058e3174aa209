//! Minimax-regret sample allocation for stratified randomized experiments.
//!
//! Given population shares and outcome variances for `G` groups and a
//! budget of `N` participants, the crate computes the allocations that
//! minimize worst-case expected regret under three decision paradigms,
//! evaluates worst-case and scenario-specific regret in closed form, and
//! checks both with a seeded Monte Carlo trial simulator.

pub mod allocate;
pub mod casestudy;
pub mod cli;
pub mod error;
pub mod model;
pub mod regret;
pub mod report;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
pub use model::{
    AbsentGroupRule, Allocation, DesignProblem, GroupSpec, Paradigm, RegretValue, TruthScenario,
};
