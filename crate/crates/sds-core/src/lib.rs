//! Simplified direct search: a derivative-free solver built around a single
//! sufficient-decrease test, together with the geometry and bookkeeping
//! needed to verify its worst-case evaluation guarantees on real runs.
//!
//! The pieces:
//!
//! * [`directions`] — positive spanning sets of unit directions, exact and
//!   sampled cosine-measure computation.
//! * [`objective`] — a small catalog of test objectives with ground-truth
//!   metadata, and the metered evaluator that counts every oracle call.
//! * [`solver`] — the poll loop itself: inner success chains, geometric
//!   stepsize shrinking, full trace recording with JSON/CSV export.
//! * [`init`] — three ways to establish the starting certificate, each with
//!   a provable evaluation cost.
//! * [`analysis`] — closed-form gradient, gap, distance and evaluation-count
//!   bounds, checked row by row against recorded traces.

// Validation writes `!(x > 0.0)` on purpose: it rejects NaN along with the
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod directions;
pub mod init;
mod linalg;
pub mod objective;
pub mod solver;

pub use analysis::{
    dominant_bound_term, eval_count_bound_at_epsilon, eval_count_bound_exact_k,
    gradient_bound_check, gradient_norm_bound, iteration_success_cap, k_epsilon, optimal_c,
    optimal_c_on_grid, verify_trace, AnalysisError, BoundKind, BoundReport, BoundRow,
    ProblemConstants, Regime,
};
pub use directions::{
    build_direction_set, maximal_positive_basis, CosineMeasureResult, CosineMethod,
    DirectionError, DirectionSet,
};
pub use init::{bootstrap_init, forcing_constant_init, stepsize_init, InitError, InitReport, InitStrategy};
pub use objective::{
    build_objective, catalog_names, diag_quadratic, finite_difference_gradient,
    level_set_radius_quadratic, log_sum_exp, rosenbrock, sphere, ConvexityClass, EvalError,
    MeteredEvaluator, ObjectiveBuilder, ObjectiveConfig, ObjectiveError, ObjectiveSpec,
};
pub use solver::{
    check_initialization_assumption, poll, run_outer_iteration, solve, solve_with_evaluator,
    AssumptionCheck, EarlyStopCap, OuterIterateRecord, PollKind, PollOutcome, PollPolicy,
    SafetyCaps, SolverConfig, SolverError, SolverTrace, StopRule, TerminationReason,
};
