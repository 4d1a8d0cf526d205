//! Evaluatable objectives with ground-truth metadata, and the metered
//! evaluator that counts every oracle call.
//!
//! Function evaluations are the unit of cost for everything downstream, so
//! [`MeteredEvaluator::evaluate`] is the only sanctioned way for a solver to
//! touch an objective: one call, one count, no hidden evaluations.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ObjectiveError {
    #[error("invalid objective parameter: {0}")]
    InvalidParameter(String),
    #[error("objective metadata is inconsistent: {0}")]
    InconsistentMetadata(String),
    #[error("step size must be positive and finite")]
    NonPositiveStep,
    #[error("objective produced a non-finite value during differentiation")]
    Pathology,
}

/// Error surfaced by a single metered evaluation.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("input has a non-finite coordinate at index {0}")]
    NonFiniteInput(usize),
    #[error("objective returned a non-finite value")]
    PathologicalValue,
    #[error("input has dimension {found}, expected {expected}")]
    WrongDimension { found: usize, expected: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvexityClass {
    Nonconvex,
    Convex,
    StronglyConvex,
}

type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// An objective `f : R^n -> R` plus whatever ground truth is known about it.
///
/// Evaluation must be a pure function of its argument. The optional metadata
/// (gradient, smoothness constant `L`, strong convexity `lambda`, optimal
/// value `f*`, minimizer `x*`) feeds the bound-verification layer; absent
/// fields simply disable the checks that need them.
#[derive(Clone)]
pub struct ObjectiveSpec {
    name: String,
    dimension: usize,
    eval: EvalFn,
    gradient: Option<GradFn>,
    smoothness_l: Option<f64>,
    strong_convexity_lambda: Option<f64>,
    f_star: Option<f64>,
    x_star: Option<Vec<f64>>,
    convexity_class: ConvexityClass,
}

impl std::fmt::Debug for ObjectiveSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ObjectiveSpec")
            .field("name", &self.name)
            .field("dimension", &self.dimension)
            .field("smoothness_l", &self.smoothness_l)
            .field("strong_convexity_lambda", &self.strong_convexity_lambda)
            .field("f_star", &self.f_star)
            .field("convexity_class", &self.convexity_class)
            .finish()
    }
}

/// Builder for [`ObjectiveSpec`]; `finish` validates the metadata.
pub struct ObjectiveBuilder {
    spec: ObjectiveSpec,
}

impl ObjectiveBuilder {
    pub fn new(
        name: impl Into<String>,
        dimension: usize,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ObjectiveBuilder {
            spec: ObjectiveSpec {
                name: name.into(),
                dimension,
                eval: Arc::new(eval),
                gradient: None,
                smoothness_l: None,
                strong_convexity_lambda: None,
                f_star: None,
                x_star: None,
                convexity_class: ConvexityClass::Nonconvex,
            },
        }
    }

    pub fn gradient(mut self, g: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.spec.gradient = Some(Arc::new(g));
        self
    }

    pub fn smoothness_l(mut self, l: f64) -> Self {
        self.spec.smoothness_l = Some(l);
        self
    }

    pub fn strong_convexity_lambda(mut self, lambda: f64) -> Self {
        self.spec.strong_convexity_lambda = Some(lambda);
        self
    }

    pub fn f_star(mut self, f_star: f64) -> Self {
        self.spec.f_star = Some(f_star);
        self
    }

    pub fn x_star(mut self, x_star: Vec<f64>) -> Self {
        self.spec.x_star = Some(x_star);
        self
    }

    pub fn convexity_class(mut self, class: ConvexityClass) -> Self {
        self.spec.convexity_class = class;
        self
    }

    pub fn finish(self) -> Result<ObjectiveSpec, ObjectiveError> {
        let spec = self.spec;
        if spec.dimension == 0 {
            return Err(ObjectiveError::InvalidParameter(
                "dimension must be at least 1".into(),
            ));
        }
        if let Some(l) = spec.smoothness_l {
            if !(l > 0.0) || !l.is_finite() {
                return Err(ObjectiveError::InvalidParameter(
                    "smoothness constant L must be positive".into(),
                ));
            }
        }
        if let Some(lambda) = spec.strong_convexity_lambda {
            if !(lambda >= 0.0) || !lambda.is_finite() {
                return Err(ObjectiveError::InvalidParameter(
                    "strong convexity constant must be nonnegative".into(),
                ));
            }
            if lambda > 0.0 {
                if spec.convexity_class != ConvexityClass::StronglyConvex {
                    return Err(ObjectiveError::InconsistentMetadata(
                        "lambda > 0 requires the strongly-convex class".into(),
                    ));
                }
                if let Some(l) = spec.smoothness_l {
                    if lambda > l {
                        return Err(ObjectiveError::InconsistentMetadata(
                            "lambda must not exceed L".into(),
                        ));
                    }
                }
            }
        }
        if let Some(x_star) = &spec.x_star {
            if x_star.len() != spec.dimension {
                return Err(ObjectiveError::InconsistentMetadata(
                    "x_star has the wrong dimension".into(),
                ));
            }
            if let Some(g) = &spec.gradient {
                let grad = g(x_star);
                let norm: f64 = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
                if !(norm < 1e-8) {
                    return Err(ObjectiveError::InconsistentMetadata(format!(
                        "gradient norm at x_star is {norm:e}, expected < 1e-8"
                    )));
                }
            }
        }
        Ok(spec)
    }
}

impl ObjectiveSpec {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Raw, unmetered evaluation. Solvers must go through
    /// [`MeteredEvaluator::evaluate`] instead.
    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dimension);
        (self.eval)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.gradient.as_ref().map(|g| g(x))
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn smoothness_l(&self) -> Option<f64> {
        self.smoothness_l
    }

    pub fn strong_convexity_lambda(&self) -> Option<f64> {
        self.strong_convexity_lambda
    }

    pub fn f_star(&self) -> Option<f64> {
        self.f_star
    }

    pub fn x_star(&self) -> Option<&[f64]> {
        self.x_star.as_deref()
    }

    pub fn convexity_class(&self) -> ConvexityClass {
        self.convexity_class
    }
}

/// Wraps an objective and counts every evaluation.
///
/// `eval_count` goes up by exactly one per [`Self::evaluate`] call, whether
/// or not the call succeeds; `best_seen` tracks the minimum over all finite
/// values observed.
pub struct MeteredEvaluator<'a> {
    objective: &'a ObjectiveSpec,
    eval_count: u64,
    pathology_count: u64,
    best_seen: Option<(Vec<f64>, f64)>,
}

impl<'a> MeteredEvaluator<'a> {
    pub fn new(objective: &'a ObjectiveSpec) -> Self {
        MeteredEvaluator {
            objective,
            eval_count: 0,
            pathology_count: 0,
            best_seen: None,
        }
    }

    pub fn objective(&self) -> &'a ObjectiveSpec {
        self.objective
    }

    pub fn eval_count(&self) -> u64 {
        self.eval_count
    }

    /// Number of evaluations that produced a non-finite value.
    pub fn pathology_count(&self) -> u64 {
        self.pathology_count
    }

    pub fn best_seen(&self) -> Option<(&[f64], f64)> {
        self.best_seen.as_ref().map(|(x, f)| (x.as_slice(), *f))
    }

    /// Evaluates `f(x)`, counting the call. Non-finite inputs and non-finite
    /// outputs are errors; the solver treats both as a failed
    /// sufficient-decrease test rather than aborting.
    pub fn evaluate(&mut self, x: &[f64]) -> Result<f64, EvalError> {
        self.eval_count += 1;
        if x.len() != self.objective.dimension() {
            return Err(EvalError::WrongDimension {
                found: x.len(),
                expected: self.objective.dimension(),
            });
        }
        if let Some(bad) = x.iter().position(|v| !v.is_finite()) {
            return Err(EvalError::NonFiniteInput(bad));
        }
        let value = self.objective.value(x);
        if !value.is_finite() {
            self.pathology_count += 1;
            return Err(EvalError::PathologicalValue);
        }
        match &self.best_seen {
            Some((_, best)) if *best <= value => {}
            _ => self.best_seen = Some((x.to_vec(), value)),
        }
        Ok(value)
    }
}

/// Named objective selectable from an experiment config, e.g.
/// `{"name": "sphere", "n": 10}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObjectiveConfig {
    Sphere { n: usize },
    DiagQuadratic { d: Vec<f64> },
    Rosenbrock { n: usize },
    LogSumExp { a: Vec<Vec<f64>>, b: Vec<f64> },
}

/// Instantiates a catalog objective from its config.
pub fn build_objective(config: &ObjectiveConfig) -> Result<ObjectiveSpec, ObjectiveError> {
    match config {
        ObjectiveConfig::Sphere { n } => sphere(*n),
        ObjectiveConfig::DiagQuadratic { d } => diag_quadratic(d),
        ObjectiveConfig::Rosenbrock { n } => rosenbrock(*n),
        ObjectiveConfig::LogSumExp { a, b } => log_sum_exp(a.clone(), b.clone()),
    }
}

/// Names understood by [`build_objective`], in catalog order.
pub fn catalog_names() -> &'static [&'static str] {
    &["sphere", "diag-quadratic", "rosenbrock", "log-sum-exp"]
}

/// `f(x) = ||x||^2`, with `L = 2`, `lambda = 2`, `f* = 0`, `x* = 0`.
pub fn sphere(n: usize) -> Result<ObjectiveSpec, ObjectiveError> {
    if n == 0 {
        return Err(ObjectiveError::InvalidParameter(
            "sphere needs n >= 1".into(),
        ));
    }
    ObjectiveBuilder::new("sphere", n, |x: &[f64]| x.iter().map(|v| v * v).sum())
        .gradient(|x: &[f64]| x.iter().map(|v| 2.0 * v).collect())
        .smoothness_l(2.0)
        .strong_convexity_lambda(2.0)
        .f_star(0.0)
        .x_star(vec![0.0; n])
        .convexity_class(ConvexityClass::StronglyConvex)
        .finish()
}

/// `f(x) = (1/2) x' Diag(d) x` with all `d_i > 0`; `L = max d`, `lambda = min d`.
pub fn diag_quadratic(d: &[f64]) -> Result<ObjectiveSpec, ObjectiveError> {
    if d.is_empty() {
        return Err(ObjectiveError::InvalidParameter(
            "diag-quadratic needs at least one coefficient".into(),
        ));
    }
    if d.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(ObjectiveError::InvalidParameter(
            "diag-quadratic coefficients must be positive and finite".into(),
        ));
    }
    let n = d.len();
    let l = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lambda = d.iter().cloned().fold(f64::INFINITY, f64::min);
    let d_eval = d.to_vec();
    let d_grad = d.to_vec();
    ObjectiveBuilder::new("diag-quadratic", n, move |x: &[f64]| {
        0.5 * x.iter().zip(&d_eval).map(|(xi, di)| di * xi * xi).sum::<f64>()
    })
    .gradient(move |x: &[f64]| x.iter().zip(&d_grad).map(|(xi, di)| di * xi).collect())
    .smoothness_l(l)
    .strong_convexity_lambda(lambda)
    .f_star(0.0)
    .x_star(vec![0.0; n])
    .convexity_class(ConvexityClass::StronglyConvex)
    .finish()
}

/// Chained Rosenbrock, `sum_i (1 - x_i)^2 + 100 (x_{i+1} - x_i^2)^2`.
/// Nonconvex; no global smoothness constant, so `L` is left unset and
/// bound checks take a caller-supplied local constant.
pub fn rosenbrock(n: usize) -> Result<ObjectiveSpec, ObjectiveError> {
    if n < 2 {
        return Err(ObjectiveError::InvalidParameter(
            "rosenbrock needs n >= 2".into(),
        ));
    }
    ObjectiveBuilder::new("rosenbrock", n, |x: &[f64]| {
        let mut sum = 0.0;
        for i in 0..x.len() - 1 {
            let a = 1.0 - x[i];
            let b = x[i + 1] - x[i] * x[i];
            sum += a * a + 100.0 * b * b;
        }
        sum
    })
    .gradient(|x: &[f64]| {
        let n = x.len();
        let mut g = vec![0.0; n];
        for i in 0..n - 1 {
            let b = x[i + 1] - x[i] * x[i];
            g[i] += -2.0 * (1.0 - x[i]) - 400.0 * x[i] * b;
            g[i + 1] += 200.0 * b;
        }
        g
    })
    .f_star(0.0)
    .x_star(vec![1.0; n])
    .convexity_class(ConvexityClass::Nonconvex)
    .finish()
}

/// `f(x) = log sum_j exp(a_j' x + b_j)` over user-supplied affine pieces.
pub fn log_sum_exp(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<ObjectiveSpec, ObjectiveError> {
    if a.is_empty() || a.len() != b.len() {
        return Err(ObjectiveError::InvalidParameter(
            "log-sum-exp needs matching, nonempty a and b".into(),
        ));
    }
    let n = a[0].len();
    if n == 0 || a.iter().any(|row| row.len() != n) {
        return Err(ObjectiveError::InvalidParameter(
            "log-sum-exp rows must share a positive dimension".into(),
        ));
    }
    let a_eval = a.clone();
    let b_eval = b.clone();
    let exponents = move |x: &[f64]| -> Vec<f64> {
        a_eval
            .iter()
            .zip(&b_eval)
            .map(|(row, bi)| row.iter().zip(x).map(|(ai, xi)| ai * xi).sum::<f64>() + bi)
            .collect()
    };
    let exps_for_eval = exponents.clone();
    let a_grad = a;
    ObjectiveBuilder::new("log-sum-exp", n, move |x: &[f64]| {
        let z = exps_for_eval(x);
        let zmax = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        zmax + z.iter().map(|zi| (zi - zmax).exp()).sum::<f64>().ln()
    })
    .gradient(move |x: &[f64]| {
        let z = exponents(x);
        let zmax = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = z.iter().map(|zi| (zi - zmax).exp()).collect();
        let total: f64 = weights.iter().sum();
        let mut g = vec![0.0; x.len()];
        for (row, w) in a_grad.iter().zip(&weights) {
            for (gi, ai) in g.iter_mut().zip(row) {
                *gi += ai * w / total;
            }
        }
        g
    })
    .convexity_class(ConvexityClass::Convex)
    .finish()
}

/// Central-difference gradient; costs `2n` raw evaluations.
pub fn finite_difference_gradient(
    objective: &ObjectiveSpec,
    x: &[f64],
    h: f64,
) -> Result<Vec<f64>, ObjectiveError> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(ObjectiveError::NonPositiveStep);
    }
    let n = objective.dimension();
    let mut grad = vec![0.0; n];
    let mut probe = x.to_vec();
    for i in 0..n {
        probe[i] = x[i] + h;
        let plus = objective.value(&probe);
        probe[i] = x[i] - h;
        let minus = objective.value(&probe);
        probe[i] = x[i];
        let slope = (plus - minus) / (2.0 * h);
        if !slope.is_finite() {
            return Err(ObjectiveError::Pathology);
        }
        grad[i] = slope;
    }
    Ok(grad)
}

/// Radius of the sublevel set through `x0` for `f(x) = (1/2) x' Diag(d) x`:
/// `sqrt(2 f(x0) / min d)`. Exact for this family.
pub fn level_set_radius_quadratic(d: &[f64], x0: &[f64]) -> Result<f64, ObjectiveError> {
    if d.is_empty() || d.len() != x0.len() {
        return Err(ObjectiveError::InvalidParameter(
            "coefficients and point must have matching, positive length".into(),
        ));
    }
    if d.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(ObjectiveError::InvalidParameter(
            "all curvature coefficients must be positive".into(),
        ));
    }
    let f0: f64 = 0.5 * d.iter().zip(x0).map(|(di, xi)| di * xi * xi).sum::<f64>();
    let d_min = d.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((2.0 * f0 / d_min).sqrt())
}
