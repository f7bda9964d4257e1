//! Offline-optimal energy management for a point-to-point energy-harvesting
//! link whose receiver pays a decoding cost and is topped up by an
//! energy-harvesting helper over a lossy wireless power link.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure numerics:
//!
//! - [`model`]: energy traces, the rate / decoding-cost family and policies.
//! - [`waterfill`]: directional waterfilling primitives (plain, capped and
//!   floor-constrained with iterative slot exclusion).
//! - [`scenarios`]: the four end-to-end solvers, one per battery
//!   configuration of transmitter and receiver.
//! - [`oracle`]: feasibility checking and an independent cutting-plane
//!   solver used to validate the scenario solvers on small instances.
//!
//! IO, file formats and the command line live in the `ehcoop` crate.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod model;
pub mod oracle;
pub mod scenarios;
pub mod waterfill;

pub use model::{builtin_cost_model, validate_trace, CostKind, CostModel, EnergyTrace, ModelError, Policy, TraceError};
pub use oracle::{
    brute_force, check_feasible, ConstraintKind, ConstraintSlack, ConstraintSystem, OracleError, OracleResult, Sense, Shape, SlackReport,
    FEASIBILITY_TOL, MAX_ORACLE_SLOTS,
};
pub use scenarios::{
    solve, solve_s1, solve_s2, solve_s3, solve_s3_traced, solve_s4, transfer_schedule, ScenarioKind, Solution, SolveError,
    StepPass, TransferError,
};
pub use waterfill::{
    capped_waterfill, min_capped_waterfill, min_constrained_waterfill, staircase_levels, ExclusionRound, ExclusionState,
    SegmentSchedule, WaterfillError,
};
