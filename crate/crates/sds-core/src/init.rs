//! Initialization strategies that establish the starting certificate
//! `f(x0 + alpha0 d) > f(x0) - c alpha0^2` for all `d`, each with a
//! provable evaluation-cost bound.
//!
//! * bootstrap — fixed-stepsize success chain from `x~0` until the first
//!   unsuccessful sweep; finds `x0`. Cost within
//!   `|D| ((f(x~0) - f*) / (c alpha0^2) + 1)`.
//! * stepsize — doubles `alpha` along each direction while it keeps paying
//!   off; finds `alpha0 >= alpha~0`. Cost within `|D| + log2 M` where
//!   `M = max(1, 2 sqrt((f(x0) - f*) / (c alpha~0^2)))`. The output
//!   certificate is guaranteed for convex objectives and checked
//!   empirically otherwise.
//! * forcing-constant — one sweep, then
//!   `c = 1 + max(0, (f(x0) - min_d f(x0 + alpha0 d)) / alpha0^2)`.
//!   Cost exactly `|D|`; the certificate holds by construction.
//!
//! Costs exclude the single `f` evaluation needed to seed each strategy.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::directions::DirectionSet;
use crate::linalg::axpy;
use crate::objective::{ConvexityClass, MeteredEvaluator};
use crate::solver::{
    check_initialization_assumption, sweep, PollPolicy, SolverError, SweepResult,
};

#[derive(Debug, Error)]
pub enum InitError {
    #[error("{strategy:?} initialization exceeded its evaluation budget of {budget}")]
    BudgetExhausted { strategy: InitStrategy, budget: u64 },
    #[error("invalid initialization parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitStrategy {
    Bootstrap,
    Stepsize,
    ForcingConstant,
}

/// Output triple of a strategy plus its observed and theoretical costs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InitReport {
    pub strategy: InitStrategy,
    pub x0: Vec<f64>,
    pub alpha0: f64,
    pub c: f64,
    /// Evaluations spent by the strategy itself, not counting the seed
    /// `f` evaluation nor any post-hoc certificate sweep.
    pub evaluations_used: u64,
    /// Evaluations spent on a separate certificate sweep (stepsize only).
    pub certificate_evaluations: u64,
    /// The strategy's own cost bound; `None` when it needs an unknown `f*`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theoretical_cost_bound: Option<f64>,
    pub start_certified: bool,
    /// Values `f(x0 + alpha0 d)` backing the certificate, in poll order;
    /// `None` entries mark failed evaluations (no sufficient decrease).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Vec<Option<f64>>>,
}

fn seed_value(
    evaluator: &mut MeteredEvaluator<'_>,
    x: &[f64],
) -> Result<f64, InitError> {
    evaluator
        .evaluate(x)
        .map_err(|_| InitError::InvalidParameter("f at the starting point is not finite".into()))
}

fn check_budget(
    strategy: InitStrategy,
    spent: u64,
    budget: Option<u64>,
) -> Result<(), InitError> {
    match budget {
        Some(b) if spent >= b => Err(InitError::BudgetExhausted { strategy, budget: b }),
        _ => Ok(()),
    }
}

/// Runs the fixed-stepsize success chain from `x_tilde0` until the first
/// unsuccessful sweep; the final sweep doubles as the output certificate.
pub fn bootstrap_init(
    evaluator: &mut MeteredEvaluator<'_>,
    x_tilde0: &[f64],
    alpha0: f64,
    c: f64,
    directions: &DirectionSet,
    budget: Option<u64>,
) -> Result<InitReport, InitError> {
    validate_positive(alpha0, "alpha0")?;
    validate_positive(c, "c")?;
    let start = evaluator.eval_count();
    let f_tilde0 = seed_value(evaluator, x_tilde0)?;

    let mut x = x_tilde0.to_vec();
    let mut f = f_tilde0;
    // The loop's final (unsuccessful) sweep doubles as the certificate, so
    // its polled values are kept without spending extra evaluations.
    let certificate = loop {
        check_budget(InitStrategy::Bootstrap, evaluator.eval_count() - start, budget)?;
        match sweep(
            evaluator,
            &x,
            f,
            alpha0,
            c,
            directions,
            PollPolicy::FirstImprovement,
            None,
        ) {
            SweepResult::Success { point, value, .. } => {
                x = point;
                f = value;
            }
            SweepResult::Unsuccessful { values } => break values,
            SweepResult::Truncated { .. } => unreachable!("no budget passed to the sweep"),
        }
    };

    let evaluations_used = evaluator.eval_count() - start - 1;
    let bound = evaluator.objective().f_star().map(|f_star| {
        directions.size() as f64 * ((f_tilde0 - f_star) / (c * alpha0 * alpha0) + 1.0)
    });
    Ok(InitReport {
        strategy: InitStrategy::Bootstrap,
        x0: x,
        alpha0,
        c,
        evaluations_used,
        certificate_evaluations: 0,
        theoretical_cost_bound: bound,
        start_certified: true,
        certificate: Some(certificate),
    })
}

/// Two-counter doubling loop: at direction `i`, a sufficient decrease at the
/// current `alpha` doubles it, otherwise `i` advances. Terminates with
/// `alpha0 = alpha` once every direction has failed at its final stepsize.
pub fn stepsize_init(
    evaluator: &mut MeteredEvaluator<'_>,
    x0: &[f64],
    alpha_tilde0: f64,
    c: f64,
    directions: &DirectionSet,
    budget: Option<u64>,
) -> Result<InitReport, InitError> {
    validate_positive(alpha_tilde0, "alpha_tilde0")?;
    validate_positive(c, "c")?;
    let start = evaluator.eval_count();
    let f0 = seed_value(evaluator, x0)?;

    let mut alpha = alpha_tilde0;
    let mut i = 0usize;
    while i < directions.size() {
        check_budget(InitStrategy::Stepsize, evaluator.eval_count() - start, budget)?;
        let candidate = axpy(x0, alpha, directions.direction(i));
        let value = evaluator.evaluate(&candidate).ok();
        if value.is_some_and(|v| v <= f0 - c * alpha * alpha) {
            alpha *= 2.0;
        } else {
            i += 1;
        }
    }
    let evaluations_used = evaluator.eval_count() - start - 1;

    // Post-hoc certificate sweep at the output stepsize; guaranteed to pass
    // for convex objectives, informative otherwise.
    let before_certificate = evaluator.eval_count();
    let check = check_initialization_assumption(evaluator, x0, Some(f0), alpha, c, directions)?;
    let certificate_evaluations = evaluator.eval_count() - before_certificate;
    debug_assert!(matches!(
        evaluator.objective().convexity_class(),
        ConvexityClass::Nonconvex
    ) || check.holds);

    let bound = evaluator.objective().f_star().map(|f_star| {
        let m = f64::max(
            1.0,
            2.0 * ((f0 - f_star) / (c * alpha_tilde0 * alpha_tilde0)).sqrt(),
        );
        directions.size() as f64 + m.log2()
    });
    Ok(InitReport {
        strategy: InitStrategy::Stepsize,
        x0: x0.to_vec(),
        alpha0: alpha,
        c,
        evaluations_used,
        certificate_evaluations,
        theoretical_cost_bound: bound,
        start_certified: check.holds,
        certificate: Some(check.polled_values),
    })
}

/// One sweep at `(x0, alpha0)`, then a forcing constant strictly larger than
/// every observed decrease: the certificate holds by construction.
pub fn forcing_constant_init(
    evaluator: &mut MeteredEvaluator<'_>,
    x0: &[f64],
    alpha0: f64,
    directions: &DirectionSet,
    budget: Option<u64>,
) -> Result<InitReport, InitError> {
    validate_positive(alpha0, "alpha0")?;
    if budget.is_some_and(|b| b < directions.size() as u64 + 1) {
        return Err(InitError::BudgetExhausted {
            strategy: InitStrategy::ForcingConstant,
            budget: budget.expect("checked"),
        });
    }
    let start = evaluator.eval_count();
    let f0 = seed_value(evaluator, x0)?;

    let mut values: Vec<Option<f64>> = Vec::with_capacity(directions.size());
    let mut min_value = f64::INFINITY;
    for d in directions.directions() {
        let candidate = axpy(x0, alpha0, d);
        let value = evaluator.evaluate(&candidate).ok();
        if let Some(v) = value {
            min_value = min_value.min(v);
        }
        values.push(value);
    }
    let c = 1.0 + f64::max(0.0, (f0 - min_value) / (alpha0 * alpha0));
    let evaluations_used = evaluator.eval_count() - start - 1;
    debug_assert_eq!(evaluations_used, directions.size() as u64);

    Ok(InitReport {
        strategy: InitStrategy::ForcingConstant,
        x0: x0.to_vec(),
        alpha0,
        c,
        evaluations_used,
        certificate_evaluations: 0,
        theoretical_cost_bound: Some(directions.size() as f64),
        start_certified: true,
        certificate: Some(values),
    })
}

fn validate_positive(value: f64, name: &str) -> Result<(), InitError> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(InitError::InvalidParameter(format!(
            "{name} must be positive and finite"
        )));
    }
    Ok(())
}
