//! Approximation framework for generalized network design (GND) under
//! (dis)economies of scale.
//!
//! Resources carry real-exponent polynomial (REP) cost functions
//! `F(l) = sigma + sum_j xi_j * l^alpha_j` for `l > 0` and `F(0) = 0`.
//! Weighted requests pick replies (resource subsets); the crate builds the
//! induced cost-sharing game, runs approximate best-response dynamics against
//! toll-minimizing reply oracles, and ships verification tooling (potential,
//! smoothness, brute-force optimum, Nash enumeration, price of anarchy).

pub mod abrd;
pub mod analysis;
pub mod bounds;
pub mod error;
pub mod file;
pub mod fmt;
pub mod fpl;
pub mod graph;
pub mod instance;
pub mod oracle;
pub mod rng;
pub mod sharing;

pub use abrd::{
    approximate_best_response, delta_vector, initial_profile, run_abrd, AbrdConfig, OutputMode,
    RunResult, Selection, StepRecord,
};
pub use bounds::{harmonic, theoretical_bounds, TheoreticalBounds};
pub use error::{GndError, Result};
pub use instance::{
    load_vector, rep_cost, total_cost, validate_reply, ExponentProfile, Feasibility, HostGraph,
    Instance, InstanceBuilder, LoadVector, Reply, Request, RequestKind, ResourceParams,
    StrategyProfile,
};
pub use oracle::{OracleAnswer, TollFunction};
pub use sharing::{CsmFamily, Mechanism, RepExpansionConstants, ShareQuery};

/// Relative tolerance used wherever two computed reals are asserted equal.
pub const REL_TOL: f64 = 1e-9;
/// Absolute floor paired with [`REL_TOL`].
pub const ABS_TOL: f64 = 1e-12;

/// `a <= b` up to the crate-wide tolerance.
pub fn approx_le(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * a.abs().max(b.abs()) + ABS_TOL
}

/// `a == b` up to the crate-wide tolerance.
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()) + ABS_TOL
}
