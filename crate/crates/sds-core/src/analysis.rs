//! Closed-form complexity bounds and their verification against solver
//! traces.
//!
//! Every certified iterate `x_k` (one whose sweep at `alpha_k` failed for
//! all directions) obeys the gradient bound
//!
//! ```text
//! ||grad f(x_k)|| <= (L/2 + c) alpha_k / mu
//! ```
//!
//! For convex objectives this implies `f(x_k) - f* <= B alpha_k` with
//! `B = R0 (L/2 + c) / mu`; for lambda-strongly convex ones,
//! `f(x_k) - f* <= S alpha_k^2` and `||x_k - x*|| <= (L/2 + c) alpha_k /
//! (mu lambda)` with `S = (L/2 + c)^2 / (2 lambda mu^2)`. Per-iteration
//! success counts and total evaluation counts have matching closed forms.
//! All formulas are stated for a general shrink factor `s` via `q = 1/s`
//! and reduce to the halving-case constants at `s = 1/2`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{norm, sub};
use crate::solver::SolverTrace;

/// Relative slack granted to every verified inequality. The bounds carry
/// genuine mathematical slack, so a violation beyond this is a bug, not
/// rounding.
pub const BOUND_REL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("missing constant for this check: {0}")]
    MissingConstant(&'static str),
    #[error("invalid constants: {0}")]
    InvalidConstants(String),
    #[error("epsilon {epsilon} outside the admissible range {requirement}")]
    EpsilonOutOfRange {
        epsilon: f64,
        requirement: &'static str,
    },
    #[error("empty grid")]
    EmptyGrid,
    #[error("grid values must be positive, got {0}")]
    NonPositiveGridValue(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Nonconvex,
    Convex,
    StronglyConvex,
}

/// Problem and algorithm constants feeding the bound formulas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    /// Lipschitz constant of the gradient (global, or local over the region
    /// the run certifies).
    pub l: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_star: Option<f64>,
    /// `f(x0)`, needed by the nonconvex evaluation-count bounds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_x0: Option<f64>,
    /// Radius of the sublevel set through `x0` around the minimizer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_star: Option<Vec<f64>>,
    pub mu: f64,
    pub cardinality_d: usize,
    pub c: f64,
    pub alpha0: f64,
    pub shrink_factor: f64,
}

impl ProblemConstants {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        let fail = |msg: &str| Err(AnalysisError::InvalidConstants(msg.into()));
        if !(self.l > 0.0) || !self.l.is_finite() {
            return fail("L must be positive");
        }
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return fail("mu must lie in (0, 1]");
        }
        if !(self.c > 0.0) || !(self.alpha0 > 0.0) {
            return fail("c and alpha0 must be positive");
        }
        if !(self.shrink_factor > 0.0 && self.shrink_factor < 1.0) {
            return fail("shrink_factor must lie in (0, 1)");
        }
        if self.lambda.is_some_and(|v| !(v >= 0.0)) {
            return fail("lambda must be nonnegative");
        }
        if self.r0.is_some_and(|v| !(v >= 0.0)) {
            return fail("R0 must be nonnegative");
        }
        if self.cardinality_d == 0 {
            return fail("|D| must be positive");
        }
        Ok(())
    }

    /// `q = 1 / shrink_factor`; plain halving has `q = 2`.
    fn q(&self) -> f64 {
        1.0 / self.shrink_factor
    }

    fn half_l_plus_c(&self) -> f64 {
        self.l / 2.0 + self.c
    }

    /// `B = R0 (L/2 + c) / mu` (convex analysis constant).
    pub fn b(&self) -> Result<f64, AnalysisError> {
        let r0 = self.r0.ok_or(AnalysisError::MissingConstant("R0"))?;
        Ok(r0 * self.half_l_plus_c() / self.mu)
    }

    /// `S = (L/2 + c)^2 / (2 lambda mu^2)` (strongly convex constant).
    pub fn s(&self) -> Result<f64, AnalysisError> {
        let lambda = self
            .lambda
            .filter(|v| *v > 0.0)
            .ok_or(AnalysisError::MissingConstant("lambda > 0"))?;
        let a = self.half_l_plus_c();
        Ok(a * a / (2.0 * lambda * self.mu * self.mu))
    }

    fn f_gap0(&self) -> Result<f64, AnalysisError> {
        let f_x0 = self.f_x0.ok_or(AnalysisError::MissingConstant("f(x0)"))?;
        let f_star = self.f_star.ok_or(AnalysisError::MissingConstant("f*"))?;
        Ok(f_x0 - f_star)
    }

    fn alpha_k(&self, k: u32) -> f64 {
        self.alpha0 * self.shrink_factor.powi(k as i32)
    }
}

/// `(L/2 + c) alpha0 s^k / mu`: the certified-iterate gradient bound.
/// Applies for `k >= 1` always, and at `k = 0` once the starting triple's
/// certificate holds.
pub fn gradient_norm_bound(constants: &ProblemConstants, k: u32) -> f64 {
    constants.half_l_plus_c() * constants.alpha_k(k) / constants.mu
}

/// Ceil of `log_base(x)`, snapping values within 1e-9 of an integer.
fn ceil_log(base: f64, x: f64) -> u32 {
    let raw = x.ln() / base.ln();
    let snapped = raw.round();
    let ceiled = if (raw - snapped).abs() < 1e-9 {
        snapped
    } else {
        raw.ceil()
    };
    ceiled.max(0.0) as u32
}

/// Smallest iteration count guaranteeing the regime's epsilon-accuracy:
/// gradient norm below `epsilon` (nonconvex) or `f`-gap below `epsilon`
/// (convex regimes).
pub fn k_epsilon(
    constants: &ProblemConstants,
    epsilon: f64,
    regime: Regime,
) -> Result<u32, AnalysisError> {
    constants.validate()?;
    let q = constants.q();
    match regime {
        Regime::Nonconvex => {
            let limit = constants.half_l_plus_c() * constants.alpha0 / constants.mu;
            if !(epsilon > 0.0 && epsilon < limit) {
                return Err(AnalysisError::EpsilonOutOfRange {
                    epsilon,
                    requirement: "0 < epsilon < (L/2 + c) alpha0 / mu",
                });
            }
            Ok(ceil_log(q, limit / epsilon))
        }
        Regime::Convex => {
            let b_alpha0 = constants.b()? * constants.alpha0;
            if !(epsilon > 0.0 && epsilon <= b_alpha0) {
                return Err(AnalysisError::EpsilonOutOfRange {
                    epsilon,
                    requirement: "0 < epsilon <= B alpha0",
                });
            }
            Ok(ceil_log(q, b_alpha0 / epsilon))
        }
        Regime::StronglyConvex => {
            let s = constants.s()?;
            let limit = s * constants.alpha0 * constants.alpha0;
            if !(epsilon > 0.0 && epsilon < limit) {
                return Err(AnalysisError::EpsilonOutOfRange {
                    epsilon,
                    requirement: "0 < epsilon < S alpha0^2",
                });
            }
            Ok(ceil_log(q, constants.alpha0 * (s / epsilon).sqrt()))
        }
    }
}

/// Per-iteration success cap `l_k <= ...` for the regime:
/// `q^{2k} (f(x0) - f*) / (c alpha0^2)` (nonconvex),
/// `q^{k+1} B / (c alpha0)` (convex), `q^2 S / c` (strongly convex).
pub fn iteration_success_cap(
    constants: &ProblemConstants,
    k: u32,
    regime: Regime,
) -> Result<f64, AnalysisError> {
    let q = constants.q();
    match regime {
        Regime::Nonconvex => {
            let gap = constants.f_gap0()?;
            Ok(q.powi(2 * k as i32) * gap / (constants.c * constants.alpha0 * constants.alpha0))
        }
        Regime::Convex => {
            let b = constants.b()?;
            Ok(q.powi(k as i32 + 1) * b / (constants.c * constants.alpha0))
        }
        Regime::StronglyConvex => Ok(q * q * constants.s()? / constants.c),
    }
}

/// Evaluation-count bound after exactly `k` outer iterations, nonconvex
/// accounting: `1 + k |D| + |D| (f(x0) - f*) / (c alpha0^2) * sum_{j<=k}
/// q^{2j}` (the geometric sum is `4 (4^k - 1) / 3` in the halving case).
pub fn eval_count_bound_exact_k(
    constants: &ProblemConstants,
    k: u32,
) -> Result<f64, AnalysisError> {
    constants.validate()?;
    let gap = constants.f_gap0()?;
    let q2 = constants.q() * constants.q();
    let geometric = q2 * (q2.powi(k as i32) - 1.0) / (q2 - 1.0);
    let p = constants.cardinality_d as f64;
    Ok(1.0 + k as f64 * p + p * gap / (constants.c * constants.alpha0 * constants.alpha0) * geometric)
}

/// Evaluation-count bound at accuracy `epsilon` for the regime. The halving
/// case reads `1 + |D| (k(e) + 16 (f(x0)-f*) (L/2+c)^2 / (3 c mu^2 e^2))`
/// (nonconvex), `1 + |D| (k(e) + 8 B^2 / (c e))` (convex) and
/// `1 + |D| (4S/c + 1)(1 + log2(alpha0 sqrt(S/e)))` (strongly convex).
pub fn eval_count_bound_at_epsilon(
    constants: &ProblemConstants,
    epsilon: f64,
    regime: Regime,
) -> Result<f64, AnalysisError> {
    let k_eps = k_epsilon(constants, epsilon, regime)? as f64;
    let p = constants.cardinality_d as f64;
    let q = constants.q();
    match regime {
        Regime::Nonconvex => {
            let gap = constants.f_gap0()?;
            let a = constants.half_l_plus_c();
            let coeff = q.powi(4) / (q * q - 1.0); // 16/3 at q = 2
            let tail =
                coeff * gap * a * a / (constants.c * constants.mu * constants.mu * epsilon * epsilon);
            Ok(1.0 + p * (k_eps + tail))
        }
        Regime::Convex => {
            let b = constants.b()?;
            let coeff = q.powi(3) / (q - 1.0); // 8 at q = 2
            Ok(1.0 + p * (k_eps + coeff * b * b / (constants.c * epsilon)))
        }
        Regime::StronglyConvex => {
            let s = constants.s()?;
            let per_iteration = q * q * s / constants.c + 1.0; // 4S/c + 1 at q = 2
            let log_term = (constants.alpha0 * (s / epsilon).sqrt()).ln() / q.ln();
            Ok(1.0 + p * per_iteration * (1.0 + log_term))
        }
    }
}

/// The forcing constant minimizing every regime's dominant bound term.
pub fn optimal_c(l: f64) -> f64 {
    l / 2.0
}

fn dominant_term_scaled(regime: Regime, l: f64, c: f64, r0: f64, mu: f64, lambda: f64) -> f64 {
    let a = l / 2.0 + c;
    match regime {
        Regime::Nonconvex => a * a / c,
        Regime::Convex => {
            let b = r0 * a / mu;
            b * b / c
        }
        Regime::StronglyConvex => a * a / (2.0 * lambda * mu * mu) / c,
    }
}

/// The regime's dominant bound term as a function of `c`, with the real
/// problem constants.
pub fn dominant_bound_term(
    constants: &ProblemConstants,
    regime: Regime,
    c: f64,
) -> Result<f64, AnalysisError> {
    match regime {
        Regime::Nonconvex => Ok(dominant_term_scaled(regime, constants.l, c, 1.0, 1.0, 1.0)),
        Regime::Convex => {
            let r0 = constants.r0.ok_or(AnalysisError::MissingConstant("R0"))?;
            Ok(dominant_term_scaled(regime, constants.l, c, r0, constants.mu, 1.0))
        }
        Regime::StronglyConvex => {
            let lambda = constants
                .lambda
                .filter(|v| *v > 0.0)
                .ok_or(AnalysisError::MissingConstant("lambda > 0"))?;
            Ok(dominant_term_scaled(regime, constants.l, c, 1.0, constants.mu, lambda))
        }
    }
}

/// Grid argmin of the regime's dominant bound term; the scale factors
/// (`R0`, `mu`, `lambda`) multiply the term uniformly and cannot move the
/// argmin, so unit values are used. Returns `L/2` whenever it is on the grid.
pub fn optimal_c_on_grid(l: f64, grid: &[f64], regime: Regime) -> Result<f64, AnalysisError> {
    if grid.is_empty() {
        return Err(AnalysisError::EmptyGrid);
    }
    let mut best: Option<(f64, f64)> = None;
    for &c in grid {
        if !(c > 0.0) || !c.is_finite() {
            return Err(AnalysisError::NonPositiveGridValue(c));
        }
        let term = dominant_term_scaled(regime, l, c, 1.0, 1.0, 1.0);
        if best.is_none_or(|(_, t)| term < t) {
            best = Some((c, term));
        }
    }
    Ok(best.expect("grid nonempty").0)
}

/// One per-iterate gradient-bound check.
#[derive(Debug, Clone, Serialize)]
pub struct GradientBoundRow {
    pub k: u32,
    pub grad_norm: f64,
    pub bound: f64,
    pub pass: bool,
    /// Only certified iterates carry the guarantee; uncertified rows are
    /// informational.
    pub certified: bool,
}

/// Checks `||grad f|| <= (L/2 + c) alpha_k / mu` at every iterate's
/// certified point, using the supplied gradient oracle.
pub fn gradient_bound_check(
    trace: &SolverTrace,
    constants: &ProblemConstants,
    gradient: impl Fn(&[f64]) -> Vec<f64>,
) -> Vec<GradientBoundRow> {
    trace
        .iterates
        .iter()
        .map(|rec| {
            let (point, _) = rec.certified_point();
            let grad_norm = norm(&gradient(point));
            let bound = constants.half_l_plus_c() * rec.alpha / constants.mu;
            GradientBoundRow {
                k: rec.k,
                grad_norm,
                bound,
                pass: within(grad_norm, bound),
                certified: rec.certified(),
            }
        })
        .collect()
}

fn within(observed: f64, bound: f64) -> bool {
    observed <= bound + BOUND_REL_TOL * (1.0 + bound.abs())
}

fn margin(observed: f64, bound: f64) -> f64 {
    (bound - observed) / (1.0 + bound.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `||grad f(x_k)||` against the certified-iterate bound.
    GradientNorm,
    /// `f(x_k) - f*` against the regime's gap bound.
    FGap,
    /// `||x_k - x*||` against the strongly convex distance bound.
    Distance,
    /// `l_k` against the regime's per-iteration success cap.
    SuccessCap,
    /// Total evaluations against the exact-`k` accounting bound.
    TotalEvalsExactK,
    /// Evaluations through iteration `k(epsilon)` against the regime bound.
    TotalEvalsAtEpsilon,
    /// The accuracy target itself at iteration `k(epsilon)`.
    TargetAtKEpsilon,
}

/// One verified inequality: observed value, bound, and normalized margin
/// `(bound - observed) / (1 + |bound|)`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub kind: BoundKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    pub observed: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
    /// Advisory rows lack the guarantee's hypotheses (uncertified iterate,
    /// missing starting certificate) and do not affect `all_pass`.
    pub advisory: bool,
}

/// Bound-by-bound comparison of a trace against the regime's guarantees.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub regime: Regime,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub start_certified: bool,
    /// False when the trace contains truncated or early-stopped iterations.
    pub trace_complete: bool,
    pub rows: Vec<BoundRow>,
    pub all_pass: bool,
    /// Smallest normalized margin over the non-advisory rows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_margin: Option<f64>,
}

impl BoundReport {
    fn push(&mut self, kind: BoundKind, k: Option<u32>, observed: f64, bound: f64, advisory: bool) {
        self.rows.push(BoundRow {
            kind,
            k,
            observed,
            bound,
            margin: margin(observed, bound),
            pass: within(observed, bound),
            advisory,
        });
    }

    fn finalize(&mut self) {
        let hard = self.rows.iter().filter(|r| !r.advisory);
        self.all_pass = hard.clone().all(|r| r.pass);
        self.worst_margin = hard.map(|r| r.margin).fold(None, |acc, m| {
            Some(acc.map_or(m, |a: f64| a.min(m)))
        });
    }

    /// Plain-text table, one row per inequality, 9 significant digits.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<22} {:>4} {:>16} {:>16} {:>11} {:>6}\n",
            "bound", "k", "observed", "limit", "margin", "pass"
        ));
        for row in &self.rows {
            let kind = format!(
                "{:?}{}",
                row.kind,
                if row.advisory { " (advisory)" } else { "" }
            );
            let k = row.k.map_or(String::from("-"), |k| k.to_string());
            out.push_str(&format!(
                "{:<22} {:>4} {:>16} {:>16} {:>11} {:>6}\n",
                kind,
                k,
                fmt9(row.observed),
                fmt9(row.bound),
                format!("{:+.2e}", row.margin),
                if row.pass { "yes" } else { "NO" }
            ));
        }
        out.push_str(&format!(
            "all_pass: {}  worst_margin: {}\n",
            self.all_pass,
            self.worst_margin.map_or(String::from("-"), |m| format!("{m:+.3e}"))
        ));
        out
    }
}

fn fmt9(v: f64) -> String {
    format!("{v:.8e}")
}

/// Fills a [`BoundReport`] for the trace: pointwise gradient, gap and
/// distance bounds, per-iteration success caps, and (optionally, at a given
/// `epsilon`) the total-evaluation bounds through `k(epsilon)`.
///
/// `start_certified` states whether the starting triple's certificate
/// was established; the `k = 0` rows and the `k = 1` success caps in the
/// convex regimes depend on it.
pub fn verify_trace(
    trace: &SolverTrace,
    constants: &ProblemConstants,
    regime: Regime,
    epsilon: Option<f64>,
    start_certified: bool,
) -> Result<BoundReport, AnalysisError> {
    constants.validate()?;
    // Fill in trace-derived constants the caller did not supply.
    let mut constants = constants.clone();
    constants.f_x0 = constants.f_x0.or(Some(trace.f_x0));

    if regime == Regime::Convex {
        constants.b()?; // fail fast on missing R0
    }
    if regime == Regime::StronglyConvex {
        constants.s()?;
    }
    let f_star = match regime {
        Regime::Nonconvex => constants.f_star,
        _ => Some(
            constants
                .f_star
                .ok_or(AnalysisError::MissingConstant("f*"))?,
        ),
    };

    let mut report = BoundReport {
        regime,
        epsilon,
        start_certified,
        trace_complete: trace.iterates.iter().all(|r| r.certified()),
        rows: Vec::new(),
        all_pass: true,
        worst_margin: None,
    };

    // k = 0 rows: valid once the starting certificate holds.
    if regime != Regime::Nonconvex {
        let advisory0 = !start_certified;
        if let Some(g0) = trace.grad_norm_x0 {
            report.push(
                BoundKind::GradientNorm,
                Some(0),
                g0,
                gradient_norm_bound(&constants, 0),
                advisory0,
            );
        }
        let gap0 = trace.f_x0 - f_star.expect("present in convex regimes");
        report.push(
            BoundKind::FGap,
            Some(0),
            gap0,
            f_gap_bound(&constants, regime, 0)?,
            advisory0,
        );
        if regime == Regime::StronglyConvex {
            if let Some(x_star) = &constants.x_star {
                report.push(
                    BoundKind::Distance,
                    Some(0),
                    norm(&sub(&trace.config.x0, x_star)),
                    distance_bound(&constants, 0)?,
                    advisory0,
                );
            }
        }
    }

    // Per-iterate rows.
    let mut prev_gap_valid = start_certified;
    let mut f_prev = trace.f_x0;
    for rec in &trace.iterates {
        let certified = rec.certified();
        // The gap and distance bounds survive a move to the best polled
        // point (the value only improves and strong convexity converts the
        // gap); the gradient bound does not.
        let grad_advisory = !certified || rec.moved_to_best;
        if let Some(g) = rec.grad_norm {
            report.push(
                BoundKind::GradientNorm,
                Some(rec.k),
                g,
                gradient_norm_bound(&constants, rec.k),
                grad_advisory,
            );
        }
        if let Some(f_star) = f_star {
            if regime != Regime::Nonconvex {
                report.push(
                    BoundKind::FGap,
                    Some(rec.k),
                    rec.f - f_star,
                    f_gap_bound(&constants, regime, rec.k)?,
                    !certified,
                );
            }
        }
        if regime == Regime::StronglyConvex {
            if let Some(x_star) = &constants.x_star {
                report.push(
                    BoundKind::Distance,
                    Some(rec.k),
                    norm(&sub(&rec.x, x_star)),
                    distance_bound(&constants, rec.k)?,
                    !certified,
                );
            }
        }
        // Success caps. The nonconvex cap `(f(x_{k-1}) - f*) / (c alpha_k^2)`
        // holds unconditionally (each success pays at least c alpha_k^2 out
        // of the remaining gap); the convex and strongly convex caps inherit
        // the previous iterate's gap bound.
        match regime {
            Regime::Nonconvex => {
                if let Some(f_star) = constants.f_star {
                    let cap = (f_prev - f_star) / (constants.c * rec.alpha * rec.alpha);
                    report.push(BoundKind::SuccessCap, Some(rec.k), rec.l as f64, cap, false);
                }
            }
            _ => {
                let cap = iteration_success_cap(&constants, rec.k, regime)?;
                report.push(
                    BoundKind::SuccessCap,
                    Some(rec.k),
                    rec.l as f64,
                    cap,
                    !prev_gap_valid,
                );
            }
        }
        prev_gap_valid = certified;
        f_prev = rec.f;
    }

    // Aggregate: exact-k accounting bound (nonconvex form, holds always).
    if constants.f_gap0().is_ok() && !trace.iterates.is_empty() {
        let k_last = trace.iterates.last().expect("nonempty").k;
        report.push(
            BoundKind::TotalEvalsExactK,
            Some(k_last),
            trace.total_evaluations as f64,
            eval_count_bound_exact_k(&constants, k_last)?,
            false,
        );
    }

    // Aggregate rows at the requested accuracy.
    if let Some(eps) = epsilon {
        let k_eps = k_epsilon(&constants, eps, regime)?;
        let have_k = trace.iterates.len() as u32 >= k_eps;
        let prefix_certified = trace
            .iterates
            .iter()
            .take(k_eps as usize)
            .all(|r| r.certified());
        let hypotheses_hold = have_k
            && prefix_certified
            && (regime == Regime::Nonconvex || start_certified);
        if have_k {
            let observed_n: u64 = 1 + trace
                .iterates
                .iter()
                .take(k_eps as usize)
                .map(|r| r.evals)
                .sum::<u64>();
            let bound_ok = match regime {
                Regime::Nonconvex => constants.f_gap0().is_ok(),
                _ => true,
            };
            if bound_ok {
                report.push(
                    BoundKind::TotalEvalsAtEpsilon,
                    Some(k_eps),
                    observed_n as f64,
                    eval_count_bound_at_epsilon(&constants, eps, regime)?,
                    !hypotheses_hold,
                );
            }
            let target_observed = match regime {
                Regime::Nonconvex => {
                    if k_eps == 0 {
                        trace.grad_norm_x0
                    } else {
                        trace.iterates[k_eps as usize - 1].grad_norm
                    }
                }
                _ => {
                    let f_k = if k_eps == 0 {
                        trace.f_x0
                    } else {
                        trace.iterates[k_eps as usize - 1].f
                    };
                    Some(f_k - f_star.expect("present in convex regimes"))
                }
            };
            if let Some(observed) = target_observed {
                let advisory = !hypotheses_hold || (regime == Regime::Nonconvex && k_eps == 0);
                report.push(BoundKind::TargetAtKEpsilon, Some(k_eps), observed, eps, advisory);
            }
        }
    }

    report.finalize();
    Ok(report)
}

fn f_gap_bound(
    constants: &ProblemConstants,
    regime: Regime,
    k: u32,
) -> Result<f64, AnalysisError> {
    let alpha_k = constants.alpha_k(k);
    match regime {
        Regime::Nonconvex => Err(AnalysisError::MissingConstant(
            "no f-gap bound in the nonconvex regime",
        )),
        Regime::Convex => Ok(constants.b()? * alpha_k),
        Regime::StronglyConvex => Ok(constants.s()? * alpha_k * alpha_k),
    }
}

fn distance_bound(constants: &ProblemConstants, k: u32) -> Result<f64, AnalysisError> {
    let lambda = constants
        .lambda
        .filter(|v| *v > 0.0)
        .ok_or(AnalysisError::MissingConstant("lambda > 0"))?;
    Ok(constants.half_l_plus_c() * constants.alpha_k(k) / (constants.mu * lambda))
}
