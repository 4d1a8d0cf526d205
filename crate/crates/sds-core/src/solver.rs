//! The simplified direct search solver: poll sweeps, inner success chains,
//! geometric stepsize shrinking, and full trace recording.
//!
//! One outer iteration `k` shrinks the stepsize once (`alpha_k =
//! shrink_factor * alpha_{k-1}`), chains sufficient-decrease steps
//! (`f(x + alpha d) <= f(x) - c alpha^2`, non-strict) until a full sweep
//! fails, and records the failing sweep as the iterate's certificate:
//! `f(x_k + alpha_k d) > f(x_k) - c alpha_k^2` for every stored direction.
//! The number of successes is `l_k`; evaluation counts per iteration never
//! exceed `|D| (l_k + 1)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::directions::{DirectionError, DirectionSet, DEFAULT_SPANNING_TOL};
use crate::linalg::{axpy, norm};
use crate::objective::{MeteredEvaluator, ObjectiveSpec};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("direction set is not a positive spanning set")]
    NotPositiveSpanning,
    #[error(transparent)]
    Direction(#[from] DirectionError),
    #[error("objective value at the starting point is not finite")]
    PathologicalStart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PollPolicy {
    /// Evaluate directions in stored order, accept the first that passes.
    FirstImprovement,
    /// Evaluate every direction, accept the best passing value
    /// (lowest index on ties).
    BestImprovement,
}

/// Primary stop rule; exactly one per run. Additional guards live in
/// [`SafetyCaps`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    MaxOuterIterations(u32),
    MinStepsize(f64),
    EvalBudget(u64),
    /// Stop once `f(x_k) - f* <= epsilon`; needs a known `f*` (diagnostic).
    TargetGap(f64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SafetyCaps {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_outer_iterations: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_stepsize: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_budget: Option<u64>,
}

/// Optional cap on successes per iteration; ending an iteration early this
/// way skips its certificate sweep, halving the evaluation bound when the
/// relevant constant (`B` or `S`) is known.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EarlyStopCap {
    #[default]
    Off,
    /// End iteration `k` once `l_k` reaches `ceil(B / (c alpha_k))`.
    Convex { b: f64 },
    /// End iteration `k` once `l_k` reaches `ceil(3 S / c)`.
    StronglyConvex { s: f64 },
}

fn default_shrink_factor() -> f64 {
    0.5
}

fn default_poll_policy() -> PollPolicy {
    PollPolicy::FirstImprovement
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub x0: Vec<f64>,
    /// Initial stepsize; iteration 1 polls at `shrink_factor * alpha0`.
    pub alpha0: f64,
    /// Forcing constant in the sufficient-decrease threshold `c alpha^2`.
    pub c: f64,
    #[serde(default = "default_shrink_factor")]
    pub shrink_factor: f64,
    #[serde(default = "default_poll_policy")]
    pub poll_policy: PollPolicy,
    #[serde(default)]
    pub move_to_best_on_unsuccessful: bool,
    pub stop: StopRule,
    #[serde(default)]
    pub safety: SafetyCaps,
    #[serde(default)]
    pub early_stop_l_cap: EarlyStopCap,
    #[serde(default)]
    pub skip_spanning_check: bool,
}

impl SolverConfig {
    /// Minimal config with the halving defaults and a fixed iteration count.
    pub fn new(x0: Vec<f64>, alpha0: f64, c: f64, stop: StopRule) -> Self {
        SolverConfig {
            x0,
            alpha0,
            c,
            shrink_factor: default_shrink_factor(),
            poll_policy: default_poll_policy(),
            move_to_best_on_unsuccessful: false,
            stop,
            safety: SafetyCaps::default(),
            early_stop_l_cap: EarlyStopCap::default(),
            skip_spanning_check: false,
        }
    }

    pub fn validate(&self, dimension: usize) -> Result<(), SolverError> {
        if self.x0.len() != dimension {
            return Err(SolverError::InvalidConfig(format!(
                "x0 has dimension {}, objective expects {}",
                self.x0.len(),
                dimension
            )));
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::InvalidConfig("x0 must be finite".into()));
        }
        if !(self.alpha0 > 0.0) || !self.alpha0.is_finite() {
            return Err(SolverError::InvalidConfig("alpha0 must be positive".into()));
        }
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(SolverError::InvalidConfig(
                "forcing constant c must be positive".into(),
            ));
        }
        if !(self.shrink_factor > 0.0 && self.shrink_factor < 1.0) {
            return Err(SolverError::InvalidConfig(
                "shrink_factor must lie in (0, 1)".into(),
            ));
        }
        match self.stop {
            StopRule::MinStepsize(m) if !(m > 0.0) => {
                return Err(SolverError::InvalidConfig(
                    "min_stepsize must be positive".into(),
                ));
            }
            StopRule::EvalBudget(0) => {
                return Err(SolverError::InvalidConfig(
                    "eval_budget must allow at least the f(x0) evaluation".into(),
                ));
            }
            StopRule::TargetGap(g) if !(g >= 0.0) || !g.is_finite() => {
                return Err(SolverError::InvalidConfig(
                    "target_gap must be nonnegative".into(),
                ));
            }
            _ => {}
        }
        match self.early_stop_l_cap {
            EarlyStopCap::Convex { b } if !(b > 0.0) => {
                return Err(SolverError::InvalidConfig(
                    "early-stop constant B must be positive".into(),
                ));
            }
            EarlyStopCap::StronglyConvex { s } if !(s > 0.0) => {
                return Err(SolverError::InvalidConfig(
                    "early-stop constant S must be positive".into(),
                ));
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PollKind {
    Success,
    Unsuccessful,
}

/// Result of one poll sweep at a fixed stepsize.
#[derive(Debug, Clone)]
pub struct PollOutcome {
    pub kind: PollKind,
    pub accepted_index: Option<usize>,
    pub new_point: Option<Vec<f64>>,
    pub new_value: Option<f64>,
    pub evaluations_used: u64,
    /// Directions observed to satisfy the sufficient-decrease test
    /// (diagnostic; meaningful under best-improvement).
    pub decreases_found: u64,
}

pub(crate) enum SweepResult {
    Success {
        index: usize,
        point: Vec<f64>,
        value: f64,
        evaluations: u64,
        decreases: u64,
    },
    /// Certificate established: every direction was evaluated and failed the
    /// test. `values[i]` is `None` when the evaluation errored (treated as
    /// no sufficient decrease).
    Unsuccessful { values: Vec<Option<f64>> },
    /// Evaluation budget ran out before the sweep finished.
    Truncated { evaluations: u64 },
}

/// One pass over the directions at stepsize `alpha`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn sweep(
    evaluator: &mut MeteredEvaluator<'_>,
    x: &[f64],
    f_x: f64,
    alpha: f64,
    c: f64,
    directions: &DirectionSet,
    policy: PollPolicy,
    remaining: Option<u64>,
) -> SweepResult {
    let threshold = f_x - c * alpha * alpha;
    let p = directions.size();
    let mut values: Vec<Option<f64>> = Vec::with_capacity(p);
    let mut best: Option<(usize, f64)> = None;
    let mut decreases = 0u64;

    for (index, d) in directions.directions().iter().enumerate() {
        if remaining.is_some_and(|r| r <= values.len() as u64) {
            return SweepResult::Truncated {
                evaluations: values.len() as u64,
            };
        }
        let candidate = axpy(x, alpha, d);
        let value = evaluator.evaluate(&candidate).ok();
        let passes = value.is_some_and(|v| v <= threshold);
        values.push(value);
        if passes {
            decreases += 1;
            let v = value.expect("passing value is finite");
            match policy {
                PollPolicy::FirstImprovement => {
                    return SweepResult::Success {
                        index,
                        point: candidate,
                        value: v,
                        evaluations: values.len() as u64,
                        decreases,
                    };
                }
                PollPolicy::BestImprovement => {
                    if best.is_none() || v < best.expect("checked").1 {
                        best = Some((index, v));
                    }
                }
            }
        }
    }

    if let Some((index, value)) = best {
        return SweepResult::Success {
            point: axpy(x, alpha, directions.direction(index)),
            index,
            value,
            evaluations: p as u64,
            decreases,
        };
    }
    SweepResult::Unsuccessful { values }
}

/// Polls the directions once at stepsize `alpha` from the incumbent
/// `(x, f_x)`; `f_x` is trusted, not re-evaluated. An unsuccessful outcome
/// certifies `f(x + alpha d) > f_x - c alpha^2` for every direction and
/// always costs exactly `|D|` evaluations.
pub fn poll(
    evaluator: &mut MeteredEvaluator<'_>,
    x: &[f64],
    f_x: f64,
    alpha: f64,
    c: f64,
    directions: &DirectionSet,
    policy: PollPolicy,
) -> PollOutcome {
    match sweep(evaluator, x, f_x, alpha, c, directions, policy, None) {
        SweepResult::Success {
            index,
            point,
            value,
            evaluations,
            decreases,
        } => PollOutcome {
            kind: PollKind::Success,
            accepted_index: Some(index),
            new_point: Some(point),
            new_value: Some(value),
            evaluations_used: evaluations,
            decreases_found: decreases,
        },
        SweepResult::Unsuccessful { values } => PollOutcome {
            kind: PollKind::Unsuccessful,
            accepted_index: None,
            new_point: None,
            new_value: None,
            evaluations_used: values.len() as u64,
            decreases_found: 0,
        },
        SweepResult::Truncated { .. } => unreachable!("no budget was imposed"),
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// Everything recorded about one outer iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterIterateRecord {
    pub k: u32,
    pub x: Vec<f64>,
    pub alpha: f64,
    /// Successful steps taken before the certificate sweep.
    pub l: u64,
    pub f: f64,
    /// Function evaluations spent inside this iteration.
    pub evals: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_norm: Option<f64>,
    /// Set when the evaluation budget ran out mid-iteration; the record then
    /// carries no certificate.
    #[serde(default, skip_serializing_if = "is_false")]
    pub incomplete: bool,
    /// Set when the early-stop cap ended the iteration before a certificate.
    #[serde(default, skip_serializing_if = "is_false")]
    pub early_stopped: bool,
    /// Set when the incumbent moved to the best strictly-improving polled
    /// point after certification; `pre_move_x`/`pre_move_f` then hold the
    /// certified point.
    #[serde(default, skip_serializing_if = "is_false")]
    pub moved_to_best: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pre_move_x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pre_move_f: Option<f64>,
}

impl OuterIterateRecord {
    /// True when the record carries an unsuccessful-sweep certificate.
    pub fn certified(&self) -> bool {
        !self.incomplete && !self.early_stopped
    }

    /// The point at which the certificate holds (differs from `x` only when
    /// the incumbent moved to the best polled point afterwards).
    pub fn certified_point(&self) -> (&[f64], f64) {
        match (&self.pre_move_x, self.pre_move_f) {
            (Some(x), Some(f)) => (x, f),
            _ => (&self.x, self.f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    MaxOuterIterations,
    MinStepsize,
    EvalBudget,
    TargetGap,
    SafetyMaxOuterIterations,
    SafetyMinStepsize,
    SafetyEvalBudget,
}

/// Full record of a solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub config: SolverConfig,
    pub directions: DirectionSet,
    /// Value of the single leading evaluation `f(x0)`.
    pub f_x0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_norm_x0: Option<f64>,
    pub iterates: Vec<OuterIterateRecord>,
    /// Equals `1 + sum of per-iteration evals`.
    pub total_evaluations: u64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub pathology_count: u64,
    pub termination_reason: TerminationReason,
}

fn is_zero(v: &u64) -> bool {
    *v == 0
}

impl SolverTrace {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("trace serializes");
        s.push('\n');
        s
    }

    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }

    pub fn write_json(&self, path: &std::path::Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json())
    }

    /// Flat CSV export, one row per outer iterate. Floats are printed with
    /// the same shortest round-trip formatting as the JSON.
    pub fn to_csv(&self) -> String {
        let n = self.directions.dimension();
        let mut out = String::from("k,alpha,l,f,evals,grad_norm");
        for i in 0..n {
            out.push_str(&format!(",x{i}"));
        }
        out.push('\n');
        for rec in &self.iterates {
            out.push_str(&format!(
                "{},{},{},{},{},{}",
                rec.k,
                fmt_f64(rec.alpha),
                rec.l,
                fmt_f64(rec.f),
                rec.evals,
                rec.grad_norm.map(fmt_f64).unwrap_or_default()
            ));
            for v in &rec.x {
                out.push(',');
                out.push_str(&fmt_f64(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &std::path::Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv())
    }

    /// Sum of the recorded per-iteration evaluation counts.
    pub fn evals_in_iterations(&self) -> u64 {
        self.iterates.iter().map(|r| r.evals).sum()
    }

    /// The evaluation bound `1 + sum |D| (l_j + 1)` over recorded iterations.
    pub fn eval_accounting_bound(&self) -> u64 {
        let p = self.directions.size() as u64;
        1 + self.iterates.iter().map(|r| p * (r.l + 1)).sum::<u64>()
    }
}

fn fmt_f64(v: f64) -> String {
    serde_json::to_string(&v).expect("finite float serializes")
}

/// Result of the `|D|`-evaluation check that the triple `(x0, alpha0, c)`
/// already certifies an unsuccessful sweep at `alpha0`.
#[derive(Debug, Clone)]
pub struct AssumptionCheck {
    pub holds: bool,
    pub f_x0: f64,
    /// Value polled along each direction; `None` marks a failed evaluation
    /// (counted as "no sufficient decrease").
    pub polled_values: Vec<Option<f64>>,
    pub evaluations_used: u64,
}

/// Checks `f(x0 + alpha0 d) > f(x0) - c alpha0^2` for every direction.
/// Costs exactly `|D|` evaluations, plus one for `f(x0)` when not supplied.
pub fn check_initialization_assumption(
    evaluator: &mut MeteredEvaluator<'_>,
    x0: &[f64],
    f_x0: Option<f64>,
    alpha0: f64,
    c: f64,
    directions: &DirectionSet,
) -> Result<AssumptionCheck, SolverError> {
    let before = evaluator.eval_count();
    let f0 = match f_x0 {
        Some(v) => v,
        None => evaluator
            .evaluate(x0)
            .map_err(|_| SolverError::PathologicalStart)?,
    };
    let threshold = f0 - c * alpha0 * alpha0;
    let mut polled_values = Vec::with_capacity(directions.size());
    let mut holds = true;
    for d in directions.directions() {
        let candidate = axpy(x0, alpha0, d);
        let value = evaluator.evaluate(&candidate).ok();
        if value.is_some_and(|v| v <= threshold) {
            holds = false;
        }
        polled_values.push(value);
    }
    Ok(AssumptionCheck {
        holds,
        f_x0: f0,
        polled_values,
        evaluations_used: evaluator.eval_count() - before,
    })
}

/// Chains successful polls at stepsize `alpha_k` (already shrunk by the
/// caller) until a full sweep certifies the iterate, the early-stop cap
/// fires, or the remaining evaluation budget (`remaining`, if any) runs
/// out — in the last case the record is flagged `incomplete` and carries
/// no certificate.
#[allow(clippy::too_many_arguments)]
pub fn run_outer_iteration(
    evaluator: &mut MeteredEvaluator<'_>,
    k: u32,
    x_prev: &[f64],
    f_prev: f64,
    alpha_k: f64,
    directions: &DirectionSet,
    config: &SolverConfig,
    remaining: Option<u64>,
) -> OuterIterateRecord {
    let mut x = x_prev.to_vec();
    let mut f = f_prev;
    let mut l: u64 = 0;
    let mut evals: u64 = 0;
    let mut incomplete = false;
    let mut early_stopped = false;
    let mut moved_to_best = false;
    let mut pre_move: Option<(Vec<f64>, f64)> = None;

    let success_cap = match config.early_stop_l_cap {
        EarlyStopCap::Off => None,
        EarlyStopCap::Convex { b } => Some((b / (config.c * alpha_k)).ceil().max(1.0) as u64),
        EarlyStopCap::StronglyConvex { s } => Some((3.0 * s / config.c).ceil().max(1.0) as u64),
    };

    loop {
        let left = remaining.map(|r| r.saturating_sub(evals));
        match sweep(
            evaluator,
            &x,
            f,
            alpha_k,
            config.c,
            directions,
            config.poll_policy,
            left,
        ) {
            SweepResult::Success {
                point,
                value,
                evaluations,
                ..
            } => {
                evals += evaluations;
                x = point;
                f = value;
                l += 1;
                if success_cap.is_some_and(|cap| l >= cap) {
                    early_stopped = true;
                    break;
                }
            }
            SweepResult::Unsuccessful { values } => {
                evals += values.len() as u64;
                if config.move_to_best_on_unsuccessful {
                    let mut best: Option<(usize, f64)> = None;
                    for (index, value) in values.iter().enumerate() {
                        if let Some(v) = value {
                            if *v < f && best.is_none_or(|(_, bv)| *v < bv) {
                                best = Some((index, *v));
                            }
                        }
                    }
                    if let Some((index, value)) = best {
                        pre_move = Some((x.clone(), f));
                        x = axpy(&x, alpha_k, directions.direction(index));
                        f = value;
                        moved_to_best = true;
                    }
                }
                break;
            }
            SweepResult::Truncated { evaluations } => {
                evals += evaluations;
                incomplete = true;
                break;
            }
        }
    }

    let grad_norm = evaluator.objective().gradient(&x).map(|g| norm(&g));
    let (pre_move_x, pre_move_f) = match pre_move {
        Some((px, pf)) => (Some(px), Some(pf)),
        None => (None, None),
    };
    OuterIterateRecord {
        k,
        x,
        alpha: alpha_k,
        l,
        f,
        evals,
        grad_norm,
        incomplete,
        early_stopped,
        moved_to_best,
        pre_move_x,
        pre_move_f,
    }
}

/// Runs the solver with a caller-owned evaluator, so evaluation counts can
/// be audited externally. `solve` is the plain entry point.
pub fn solve_with_evaluator(
    evaluator: &mut MeteredEvaluator<'_>,
    directions: &DirectionSet,
    config: &SolverConfig,
) -> Result<SolverTrace, SolverError> {
    let objective = evaluator.objective();
    config.validate(objective.dimension())?;
    if directions.dimension() != objective.dimension() {
        return Err(SolverError::InvalidConfig(format!(
            "direction set dimension {} does not match objective dimension {}",
            directions.dimension(),
            objective.dimension()
        )));
    }
    if !config.skip_spanning_check && !directions.is_positive_spanning_set(DEFAULT_SPANNING_TOL)? {
        return Err(SolverError::NotPositiveSpanning);
    }
    let f_star = objective.f_star();
    if matches!(config.stop, StopRule::TargetGap(_)) && f_star.is_none() {
        return Err(SolverError::InvalidConfig(
            "target_gap stop rule needs an objective with known f*".into(),
        ));
    }

    let primary_budget = match config.stop {
        StopRule::EvalBudget(n) => Some(n),
        _ => None,
    };
    let budget = match (primary_budget, config.safety.eval_budget) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };

    let start_count = evaluator.eval_count();
    let start_pathologies = evaluator.pathology_count();
    let f_x0 = evaluator
        .evaluate(&config.x0)
        .map_err(|_| SolverError::PathologicalStart)?;
    let grad_norm_x0 = objective.gradient(&config.x0).map(|g| norm(&g));

    let mut iterates: Vec<OuterIterateRecord> = Vec::new();
    let mut x = config.x0.clone();
    let mut f = f_x0;
    let mut alpha = config.alpha0;
    let mut k: u32 = 0;

    let reason = loop {
        let used = evaluator.eval_count() - start_count;
        if let StopRule::MaxOuterIterations(max_k) = config.stop {
            if k >= max_k {
                break TerminationReason::MaxOuterIterations;
            }
        }
        if let StopRule::TargetGap(gap) = config.stop {
            if f - f_star.expect("validated") <= gap {
                break TerminationReason::TargetGap;
            }
        }
        let alpha_next = alpha * config.shrink_factor;
        if let StopRule::MinStepsize(min_alpha) = config.stop {
            if alpha_next < min_alpha {
                break TerminationReason::MinStepsize;
            }
        }
        if primary_budget.is_some_and(|n| used >= n) {
            break TerminationReason::EvalBudget;
        }
        if config.safety.max_outer_iterations.is_some_and(|cap| k >= cap) {
            break TerminationReason::SafetyMaxOuterIterations;
        }
        if config.safety.min_stepsize.is_some_and(|m| alpha_next < m) {
            break TerminationReason::SafetyMinStepsize;
        }
        if config.safety.eval_budget.is_some_and(|n| used >= n) {
            break TerminationReason::SafetyEvalBudget;
        }

        alpha = alpha_next;
        k += 1;
        let remaining = budget.map(|n| n - used);
        let record = run_outer_iteration(
            evaluator, k, &x, f, alpha, directions, config, remaining,
        );
        x = record.x.clone();
        f = record.f;
        let truncated = record.incomplete;
        iterates.push(record);
        if truncated {
            let exhausted_primary = primary_budget
                .is_some_and(|n| evaluator.eval_count() - start_count >= n);
            break if exhausted_primary {
                TerminationReason::EvalBudget
            } else {
                TerminationReason::SafetyEvalBudget
            };
        }
    };

    Ok(SolverTrace {
        config: config.clone(),
        directions: directions.clone(),
        f_x0,
        grad_norm_x0,
        iterates,
        total_evaluations: evaluator.eval_count() - start_count,
        pathology_count: evaluator.pathology_count() - start_pathologies,
        termination_reason: reason,
    })
}

/// Runs the solver on `objective` from `config.x0`, checking (unless waived)
/// that the directions positively span, and returns the full trace.
pub fn solve(
    objective: &ObjectiveSpec,
    directions: &DirectionSet,
    config: &SolverConfig,
) -> Result<SolverTrace, SolverError> {
    let mut evaluator = MeteredEvaluator::new(objective);
    solve_with_evaluator(&mut evaluator, directions, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::directions::{build_direction_set, maximal_positive_basis};
    use crate::objective::{sphere, ObjectiveBuilder};
    use proptest::prelude::*;

    fn one_d_directions() -> DirectionSet {
        build_direction_set(&[vec![1.0], vec![-1.0]]).unwrap()
    }

    #[test]
    fn poll_first_improvement_hand_trace() {
        let obj = sphere(1).unwrap();
        let mut me = MeteredEvaluator::new(&obj);
        let d = one_d_directions();
        // Incumbent (1, f=1), alpha=1, c=1: f(2)=4 fails, f(0)=0 <= 0 passes.
        let out = poll(&mut me, &[1.0], 1.0, 1.0, 1.0, &d, PollPolicy::FirstImprovement);
        assert_eq!(out.kind, PollKind::Success);
        assert_eq!(out.accepted_index, Some(1));
        assert_eq!(out.new_point.unwrap(), vec![0.0]);
        assert_eq!(out.evaluations_used, 2);
        assert_eq!(me.eval_count(), 2);
    }

    #[test]
    fn poll_at_minimizer_is_unsuccessful() {
        let obj = sphere(1).unwrap();
        let mut me = MeteredEvaluator::new(&obj);
        let d = one_d_directions();
        let out = poll(&mut me, &[0.0], 0.0, 0.5, 1.0, &d, PollPolicy::FirstImprovement);
        assert_eq!(out.kind, PollKind::Unsuccessful);
        assert_eq!(out.evaluations_used, 2);
    }

    #[test]
    fn poll_best_improvement_evaluates_all() {
        let obj = sphere(1).unwrap();
        let mut me = MeteredEvaluator::new(&obj);
        let d = one_d_directions();
        let out = poll(&mut me, &[1.0], 1.0, 1.0, 1.0, &d, PollPolicy::BestImprovement);
        assert_eq!(out.kind, PollKind::Success);
        assert_eq!(out.accepted_index, Some(1));
        assert_eq!(out.evaluations_used, 2);
        assert_eq!(out.decreases_found, 1);
    }

    #[test]
    fn acceptance_test_is_non_strict() {
        // f(x + alpha d) == f(x) - c alpha^2 exactly counts as a success.
        let obj = sphere(1).unwrap();
        let mut me = MeteredEvaluator::new(&obj);
        let d = one_d_directions();
        // x=1, alpha=1, c=1: f(0) = 0 = 1 - 1 exactly.
        let out = poll(&mut me, &[1.0], 1.0, 1.0, 1.0, &d, PollPolicy::FirstImprovement);
        assert_eq!(out.kind, PollKind::Success);
    }

    #[test]
    fn pathological_values_fail_the_test() {
        let obj = ObjectiveBuilder::new("hole", 1, |x: &[f64]| {
            if x[0] < 0.0 {
                f64::NAN
            } else {
                x[0] * x[0]
            }
        })
        .finish()
        .unwrap();
        let mut me = MeteredEvaluator::new(&obj);
        let d = one_d_directions();
        let out = poll(&mut me, &[0.0], 0.0, 1.0, 1e-9, &d, PollPolicy::FirstImprovement);
        assert_eq!(out.kind, PollKind::Unsuccessful);
        assert_eq!(out.evaluations_used, 2);
        assert_eq!(me.pathology_count(), 1);
    }

    #[test]
    fn solve_reproduces_hand_simulated_sphere_run() {
        let obj = sphere(1).unwrap();
        let d = one_d_directions();
        let config = SolverConfig::new(vec![1.0], 2.0, 1.0, StopRule::MaxOuterIterations(3));
        let trace = solve(&obj, &d, &config).unwrap();

        assert_eq!(trace.f_x0, 1.0);
        assert_eq!(trace.iterates.len(), 3);
        let rows: Vec<(u32, f64, u64, f64, u64)> = trace
            .iterates
            .iter()
            .map(|r| (r.k, r.alpha, r.l, r.x[0], r.evals))
            .collect();
        assert_eq!(
            rows,
            vec![
                (1, 1.0, 1, 0.0, 4),
                (2, 0.5, 0, 0.0, 2),
                (3, 0.25, 0, 0.0, 2),
            ]
        );
        assert_eq!(trace.total_evaluations, 9);
        assert_eq!(trace.termination_reason, TerminationReason::MaxOuterIterations);
        assert_eq!(trace.grad_norm_x0, Some(2.0));
        assert_eq!(trace.iterates[0].grad_norm, Some(0.0));
    }

    #[test]
    fn solve_from_minimizer_only_pays_certificates() {
        let obj = sphere(2).unwrap();
        let d = maximal_positive_basis(2).unwrap();
        let config = SolverConfig::new(vec![0.0, 0.0], 1.0, 0.5, StopRule::MaxOuterIterations(4));
        let trace = solve(&obj, &d, &config).unwrap();
        assert!(trace.iterates.iter().all(|r| r.l == 0));
        assert_eq!(trace.total_evaluations, 1 + 4 * d.size() as u64);
    }

    #[test]
    fn l_k_respects_the_decrease_budget() {
        // l_k <= (f(x_{k-1}) - f*) / (c alpha_k^2) whenever f* is known.
        let obj = sphere(1).unwrap();
        let d = one_d_directions();
        let config = SolverConfig::new(vec![7.0], 4.0, 0.25, StopRule::MaxOuterIterations(6));
        let trace = solve(&obj, &d, &config).unwrap();
        let mut f_prev = trace.f_x0;
        for rec in &trace.iterates {
            let cap = (f_prev - 0.0) / (config.c * rec.alpha * rec.alpha);
            assert!(
                (rec.l as f64) <= cap + 1e-9,
                "k={}: l={} cap={cap}",
                rec.k,
                rec.l
            );
            f_prev = rec.f;
        }
    }

    #[test]
    fn non_spanning_directions_are_rejected() {
        let obj = sphere(2).unwrap();
        let half = build_direction_set(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let config = SolverConfig::new(vec![1.0, 1.0], 1.0, 1.0, StopRule::MaxOuterIterations(2));
        assert!(matches!(
            solve(&obj, &half, &config),
            Err(SolverError::NotPositiveSpanning)
        ));
        let mut waived = config;
        waived.skip_spanning_check = true;
        assert!(solve(&obj, &half, &waived).is_ok());
    }

    #[test]
    fn eval_budget_truncates_mid_iteration() {
        let obj = sphere(1).unwrap();
        let d = one_d_directions();
        // Budget 4: f(x0), then iteration 1 can afford 3 of its 4 evaluations.
        let config = SolverConfig::new(vec![1.0], 2.0, 1.0, StopRule::EvalBudget(4));
        let trace = solve(&obj, &d, &config).unwrap();
        assert_eq!(trace.total_evaluations, 4);
        assert_eq!(trace.termination_reason, TerminationReason::EvalBudget);
        let last = trace.iterates.last().unwrap();
        assert!(last.incomplete);
        assert!(!last.certified());
        assert_eq!(trace.evals_in_iterations() + 1, trace.total_evaluations);
    }

    #[test]
    fn min_stepsize_stop_fires_before_running_the_iteration() {
        let obj = sphere(1).unwrap();
        let d = one_d_directions();
        let config = SolverConfig::new(vec![0.0], 1.0, 1.0, StopRule::MinStepsize(0.2));
        let trace = solve(&obj, &d, &config).unwrap();
        // alpha halves 0.5, 0.25; the next would be 0.125 < 0.2.
        assert_eq!(trace.iterates.len(), 2);
        assert_eq!(trace.termination_reason, TerminationReason::MinStepsize);
    }

    #[test]
    fn target_gap_stop_is_immediate_at_the_minimizer() {
        let obj = sphere(1).unwrap();
        let d = one_d_directions();
        let config = SolverConfig::new(vec![0.0], 1.0, 1.0, StopRule::TargetGap(1e-9));
        let trace = solve(&obj, &d, &config).unwrap();
        assert!(trace.iterates.is_empty());
        assert_eq!(trace.total_evaluations, 1);
        assert_eq!(trace.termination_reason, TerminationReason::TargetGap);
    }

    #[test]
    fn safety_caps_terminate_with_their_own_reason() {
        let obj = sphere(1).unwrap();
        let d = one_d_directions();
        let mut config = SolverConfig::new(vec![1.0], 2.0, 1.0, StopRule::MinStepsize(1e-30));
        config.safety.max_outer_iterations = Some(2);
        let trace = solve(&obj, &d, &config).unwrap();
        assert_eq!(trace.iterates.len(), 2);
        assert_eq!(
            trace.termination_reason,
            TerminationReason::SafetyMaxOuterIterations
        );
    }

    #[test]
    fn move_to_best_records_both_points() {
        // Steep quadratic: at alpha=1, c=10 the decrease test fails although
        // one polled point strictly improves.
        let obj = sphere(1).unwrap();
        let d = one_d_directions();
        let mut config = SolverConfig::new(vec![0.6], 2.0, 10.0, StopRule::MaxOuterIterations(1));
        config.move_to_best_on_unsuccessful = true;
        let trace = solve(&obj, &d, &config).unwrap();
        let rec = &trace.iterates[0];
        assert_eq!(rec.l, 0);
        assert!(rec.moved_to_best);
        // Certified at 0.6; moved to 0.6 - 1.0 = -0.4 with f = 0.16 < 0.36.
        assert_eq!(rec.pre_move_x.as_deref(), Some(&[0.6][..]));
        assert_eq!(rec.pre_move_f, Some(0.36));
        assert!((rec.x[0] - (-0.4)).abs() < 1e-15);
        assert!(rec.f < rec.pre_move_f.unwrap());
        let (cx, cf) = rec.certified_point();
        assert_eq!(cx, &[0.6]);
        assert_eq!(cf, 0.36);
    }

    #[test]
    fn early_stop_cap_ends_iterations_without_certificates() {
        let obj = sphere(1).unwrap();
        let d = one_d_directions();
        let mut config = SolverConfig::new(vec![8.0], 2.0, 0.01, StopRule::MaxOuterIterations(1));
        config.early_stop_l_cap = EarlyStopCap::StronglyConvex { s: 0.003 };
        // cap = ceil(3 * 0.003 / 0.01) = 1: stop after the first success.
        let trace = solve(&obj, &d, &config).unwrap();
        let rec = &trace.iterates[0];
        assert_eq!(rec.l, 1);
        assert!(rec.early_stopped);
        assert!(!rec.certified());
    }

    #[test]
    fn run_outer_iteration_hand_traces() {
        let obj = sphere(1).unwrap();
        let d = one_d_directions();
        let config = SolverConfig::new(vec![1.0], 2.0, 1.0, StopRule::MaxOuterIterations(1));

        // One success (2 evals) plus the certificate sweep (2 evals).
        let mut me = MeteredEvaluator::new(&obj);
        let rec = run_outer_iteration(&mut me, 1, &[1.0], 1.0, 1.0, &d, &config, None);
        assert_eq!(rec.x, vec![0.0]);
        assert_eq!(rec.l, 1);
        assert_eq!(rec.evals, 4);
        assert!(rec.certified());

        // From the minimizer: zero successes, |D| evaluations.
        let mut me = MeteredEvaluator::new(&obj);
        let rec = run_outer_iteration(&mut me, 1, &[0.0], 0.0, 1.0, &d, &config, None);
        assert_eq!(rec.l, 0);
        assert_eq!(rec.x, vec![0.0]);
        assert_eq!(rec.evals, d.size() as u64);
    }

    #[test]
    fn external_evaluator_sees_exactly_the_trace_counts() {
        let obj = sphere(2).unwrap();
        let d = maximal_positive_basis(2).unwrap();
        let config = SolverConfig::new(vec![2.0, -1.0], 1.0, 0.5, StopRule::MaxOuterIterations(5));
        let mut me = MeteredEvaluator::new(&obj);
        let trace = solve_with_evaluator(&mut me, &d, &config).unwrap();
        // No hidden evaluations: the meter agrees with the trace sum.
        assert_eq!(me.eval_count(), trace.total_evaluations);
        assert_eq!(me.eval_count(), 1 + trace.evals_in_iterations());
        // The best value seen is at most every recorded iterate value.
        let (_, best) = me.best_seen().unwrap();
        for rec in &trace.iterates {
            assert!(best <= rec.f);
        }
    }

    #[test]
    fn trace_counts_are_deltas_on_a_pre_used_evaluator() {
        // A pathological probe before the run must not leak into the
        // trace's totals.
        let obj = ObjectiveBuilder::new("guard", 1, |x: &[f64]| {
            if x[0] > 10.0 {
                f64::INFINITY
            } else {
                x[0] * x[0]
            }
        })
        .finish()
        .unwrap();
        let d = one_d_directions();
        let mut me = MeteredEvaluator::new(&obj);
        let _ = me.evaluate(&[11.0]); // pathological, counted on the meter
        assert_eq!(me.pathology_count(), 1);
        let config = SolverConfig::new(vec![1.0], 1.0, 1.0, StopRule::MaxOuterIterations(2));
        let trace = solve_with_evaluator(&mut me, &d, &config).unwrap();
        assert_eq!(trace.pathology_count, 0);
        assert_eq!(trace.total_evaluations, 1 + trace.evals_in_iterations());
    }

    #[test]
    fn shared_types_are_send_and_sync() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<DirectionSet>();
        assert_send_sync::<SolverTrace>();
        assert_send_sync::<crate::objective::ObjectiveSpec>();
    }

    #[test]
    fn check_initialization_assumption_examples() {
        let obj = sphere(1).unwrap();
        let d = one_d_directions();

        let mut me = MeteredEvaluator::new(&obj);
        let check =
            check_initialization_assumption(&mut me, &[1.0], None, 2.0, 1.0, &d).unwrap();
        assert!(check.holds); // f(3)=9 > -3, f(-1)=1 > -3
        assert_eq!(check.evaluations_used, 3); // f(x0) + |D|

        let mut me = MeteredEvaluator::new(&obj);
        let check =
            check_initialization_assumption(&mut me, &[1.0], Some(1.0), 1.0, 1.0, &d).unwrap();
        assert!(!check.holds); // f(0) = 0 is not > 0: boundary failure
        assert_eq!(check.evaluations_used, 2);

        let mut me = MeteredEvaluator::new(&obj);
        let check =
            check_initialization_assumption(&mut me, &[0.0], None, 0.7, 0.3, &d).unwrap();
        assert!(check.holds); // polling at the minimizer never decreases
    }

    #[test]
    fn trace_json_round_trips() {
        let obj = sphere(1).unwrap();
        let d = one_d_directions();
        let config = SolverConfig::new(vec![1.0], 2.0, 1.0, StopRule::MaxOuterIterations(3));
        let trace = solve(&obj, &d, &config).unwrap();
        let json = trace.to_json();
        let back = SolverTrace::from_json(&json).unwrap();
        assert_eq!(trace, back);
        assert_eq!(back.to_json(), json);
    }

    #[test]
    fn csv_numbers_match_json_numbers() {
        let obj = sphere(1).unwrap();
        let d = one_d_directions();
        let config = SolverConfig::new(vec![1.0], 2.0, 1.0, StopRule::MaxOuterIterations(3));
        let trace = solve(&obj, &d, &config).unwrap();
        let csv = trace.to_csv();
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert_eq!(header, "k,alpha,l,f,evals,grad_norm,x0");
        for (line, rec) in lines.zip(&trace.iterates) {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells[0].parse::<u32>().unwrap(), rec.k);
            assert_eq!(cells[1].parse::<f64>().unwrap(), rec.alpha);
            assert_eq!(cells[2].parse::<u64>().unwrap(), rec.l);
            assert_eq!(cells[3].parse::<f64>().unwrap(), rec.f);
            assert_eq!(cells[4].parse::<u64>().unwrap(), rec.evals);
            assert_eq!(cells[6].parse::<f64>().unwrap(), rec.x[0]);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        /// Monotone objective values, exact stepsize law, per-iteration
        /// accounting, and a sound certificate on replay.
        #[test]
        fn solver_trace_invariants(
            x0 in -8.0f64..8.0,
            alpha0 in 0.25f64..4.0,
            c in 0.05f64..2.0,
            iterations in 1u32..7,
            best in proptest::bool::ANY,
        ) {
            let obj = sphere(1).unwrap();
            let d = one_d_directions();
            let mut config = SolverConfig::new(
                vec![x0], alpha0, c, StopRule::MaxOuterIterations(iterations),
            );
            if best {
                config.poll_policy = PollPolicy::BestImprovement;
            }
            let trace = solve(&obj, &d, &config).unwrap();

            let mut f_prev = trace.f_x0;
            for (i, rec) in trace.iterates.iter().enumerate() {
                prop_assert!(rec.f <= f_prev);
                f_prev = rec.f;
                // alpha_k = alpha0 * shrink^k, exactly, for shrink = 0.5.
                prop_assert_eq!(rec.alpha, alpha0 * 0.5f64.powi(i as i32 + 1));
                prop_assert!(rec.evals <= d.size() as u64 * (rec.l + 1));
                // Certificate replay.
                let (cx, cf) = rec.certified_point();
                for dir in d.directions() {
                    let y = axpy(cx, rec.alpha, dir);
                    prop_assert!(obj.value(&y) > cf - config.c * rec.alpha * rec.alpha);
                }
            }
            prop_assert_eq!(1 + trace.evals_in_iterations(), trace.total_evaluations);
            prop_assert!(trace.total_evaluations <= trace.eval_accounting_bound());
            if best {
                prop_assert_eq!(trace.total_evaluations, trace.eval_accounting_bound());
            }
        }

        /// A single first-improvement poll never spends more evaluations
        /// than the best-improvement poll from the same incumbent.
        #[test]
        fn first_improvement_is_no_costlier_per_poll(
            x0 in -4.0f64..4.0,
            alpha in 0.1f64..2.0,
            c in 0.05f64..1.5,
        ) {
            let obj = sphere(2).unwrap();
            let d = maximal_positive_basis(2).unwrap();
            let x = vec![x0, -x0 / 2.0];
            let f_x = obj.value(&x);
            let mut me1 = MeteredEvaluator::new(&obj);
            let first = poll(&mut me1, &x, f_x, alpha, c, &d, PollPolicy::FirstImprovement);
            let mut me2 = MeteredEvaluator::new(&obj);
            let best = poll(&mut me2, &x, f_x, alpha, c, &d, PollPolicy::BestImprovement);
            prop_assert!(first.evaluations_used <= best.evaluations_used);
        }

        /// Identical configs produce bit-identical traces.
        #[test]
        fn solver_is_deterministic(x0 in -5.0f64..5.0, alpha0 in 0.5f64..3.0) {
            let obj = sphere(1).unwrap();
            let d = one_d_directions();
            let config = SolverConfig::new(vec![x0], alpha0, 1.0, StopRule::MaxOuterIterations(4));
            let a = solve(&obj, &d, &config).unwrap();
            let b = solve(&obj, &d, &config).unwrap();
            prop_assert_eq!(a.to_json(), b.to_json());
        }
    }
}
