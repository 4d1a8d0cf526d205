//! Positive spanning sets of unit directions and their cosine measure.
//!
//! A [`DirectionSet`] is an immutable, ordered list of unit-norm vectors in
//! `R^n`. Poll order is the stored order. The cosine measure
//!
//! ```text
//! mu(D) = min_{v != 0} max_{d in D} <v, d> / ||v||
//! ```
//!
//! is computed two independent ways: exactly, by enumerating the linearly
//! independent `n`-subsets of `D` (each subset pins a candidate witness with
//! equal inner products against its members), and numerically, by seeded
//! sampling of the unit sphere followed by a deterministic local polish.
//! `mu > 0` exactly when `D` positively spans `R^n`.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::linalg::{self, condition_1, dot, lu_factor, norm};

/// Unit-norm agreement required of stored directions.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Directions closer than this (Euclidean, after normalization) are duplicates.
pub const DUPLICATE_TOL: f64 = 1e-12;

/// Subsets with a 1-norm condition estimate above this are treated as
/// linearly dependent and skipped during exact enumeration.
pub const INDEPENDENCE_CONDITION_LIMIT: f64 = 1e10;

/// Default cap on the number of `n`-subsets the exact enumeration may visit.
pub const DEFAULT_SUBSET_BUDGET: usize = 5_000_000;

/// Default positivity tolerance for the positive-spanning verdict.
pub const DEFAULT_SPANNING_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DirectionError {
    #[error("direction set must contain at least one vector")]
    Empty,
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("direction {index} is zero (or too short to normalize)")]
    InvalidDirection { index: usize },
    #[error("direction {index} has a non-finite component")]
    NonFinite { index: usize },
    #[error("direction {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        found: usize,
        expected: usize,
    },
    #[error("directions {first} and {second} coincide after normalization")]
    DuplicateDirection { first: usize, second: usize },
    #[error("no linearly independent {dimension}-subset exists; the set is degenerate")]
    DegenerateSet { dimension: usize },
    #[error("subset enumeration needs {required} subsets, over the budget of {budget}")]
    EnumerationBudget { required: u128, budget: usize },
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("tolerance must be positive")]
    NonPositiveTolerance,
    #[error("query vector is zero or non-finite")]
    InvalidQuery,
}

/// How a [`CosineMeasureResult`] was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CosineMethod {
    ExactEnumeration,
    Sampled { num_samples: u64, seed: u64 },
}

/// Cosine measure value together with the unit vector attaining it.
///
/// `mu` always equals `max_{d in D} <witness, d>` bit-for-bit; for the exact
/// method it is the minimum of that quantity over all candidate witnesses,
/// for the sampled method an upper estimate that converges from above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosineMeasureResult {
    pub mu: f64,
    pub witness: Vec<f64>,
    pub method: CosineMethod,
}

/// An ordered, immutable set of unit-norm directions in `R^n`.
pub struct DirectionSet {
    dimension: usize,
    directions: Vec<Vec<f64>>,
    exact_cache: OnceLock<CosineMeasureResult>,
}

impl std::fmt::Debug for DirectionSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DirectionSet")
            .field("dimension", &self.dimension)
            .field("size", &self.directions.len())
            .finish()
    }
}

impl Clone for DirectionSet {
    fn clone(&self) -> Self {
        let exact_cache = OnceLock::new();
        if let Some(r) = self.exact_cache.get() {
            let _ = exact_cache.set(r.clone());
        }
        DirectionSet {
            dimension: self.dimension,
            directions: self.directions.clone(),
            exact_cache,
        }
    }
}

impl PartialEq for DirectionSet {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension && self.directions == other.directions
    }
}

/// Normalizes `raw_vectors` and validates them into a [`DirectionSet`].
///
/// Order is preserved. Zero vectors, mixed dimensions and duplicates
/// (within [`DUPLICATE_TOL`] after normalization) are rejected.
pub fn build_direction_set(raw_vectors: &[Vec<f64>]) -> Result<DirectionSet, DirectionError> {
    DirectionSet::new(raw_vectors)
}

/// The maximal positive basis `{+e_i, -e_i}` in the order
/// `e_1, -e_1, e_2, -e_2, ...`; its cosine measure is `1/sqrt(n)`.
pub fn maximal_positive_basis(n: usize) -> Result<DirectionSet, DirectionError> {
    if n == 0 {
        return Err(DirectionError::ZeroDimension);
    }
    let mut directions = Vec::with_capacity(2 * n);
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = sign;
            directions.push(e);
        }
    }
    Ok(DirectionSet {
        dimension: n,
        directions,
        exact_cache: OnceLock::new(),
    })
}

impl DirectionSet {
    pub fn new(raw_vectors: &[Vec<f64>]) -> Result<Self, DirectionError> {
        if raw_vectors.is_empty() {
            return Err(DirectionError::Empty);
        }
        let dimension = raw_vectors[0].len();
        if dimension == 0 {
            return Err(DirectionError::ZeroDimension);
        }
        let mut directions: Vec<Vec<f64>> = Vec::with_capacity(raw_vectors.len());
        for (index, raw) in raw_vectors.iter().enumerate() {
            if raw.len() != dimension {
                return Err(DirectionError::DimensionMismatch {
                    index,
                    found: raw.len(),
                    expected: dimension,
                });
            }
            if raw.iter().any(|x| !x.is_finite()) {
                return Err(DirectionError::NonFinite { index });
            }
            let len = norm(raw);
            if !(len > 1e-300) || !len.is_finite() {
                return Err(DirectionError::InvalidDirection { index });
            }
            let unit = linalg::scaled(raw, 1.0 / len);
            for (prev_index, prev) in directions.iter().enumerate() {
                if norm(&linalg::sub(&unit, prev)) < DUPLICATE_TOL {
                    return Err(DirectionError::DuplicateDirection {
                        first: prev_index,
                        second: index,
                    });
                }
            }
            directions.push(unit);
        }
        Ok(DirectionSet {
            dimension,
            directions,
            exact_cache: OnceLock::new(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// `|D|`, the number of stored directions.
    pub fn size(&self) -> usize {
        self.directions.len()
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn direction(&self, index: usize) -> &[f64] {
        &self.directions[index]
    }

    /// `|D| / mu^2`, the quantity through which the direction set enters
    /// every evaluation-count bound.
    pub fn cardinality_over_mu_squared(&self) -> Result<f64, DirectionError> {
        let mu = self.cosine_measure_exact()?.mu;
        Ok(self.size() as f64 / (mu * mu))
    }

    /// Exact cosine measure by enumeration of linearly independent
    /// `n`-subsets. Cached after the first successful computation.
    ///
    /// Every candidate value is `max_{d in D} <v, d> >= mu`, and whenever
    /// `D` positively spans, the true minimizer's active set contains a
    /// linearly independent `n`-subset, so the enumeration minimum is exact.
    /// For non-spanning sets the result is an upper bound on `mu`; it is
    /// still nonpositive on all the plain failure shapes (missing orthant,
    /// rank-deficient span).
    pub fn cosine_measure_exact(&self) -> Result<&CosineMeasureResult, DirectionError> {
        if let Some(cached) = self.exact_cache.get() {
            return Ok(cached);
        }
        let computed = self.compute_exact(DEFAULT_SUBSET_BUDGET)?;
        Ok(self.exact_cache.get_or_init(|| computed))
    }

    /// Same as [`Self::cosine_measure_exact`] with an explicit subset budget;
    /// bypasses the cache.
    pub fn cosine_measure_exact_with_budget(
        &self,
        max_subsets: usize,
    ) -> Result<CosineMeasureResult, DirectionError> {
        self.compute_exact(max_subsets)
    }

    fn compute_exact(&self, budget: usize) -> Result<CosineMeasureResult, DirectionError> {
        let n = self.dimension;
        let p = self.size();
        if p < n {
            return Err(DirectionError::DegenerateSet { dimension: n });
        }
        let required = binomial(p as u128, n as u128);
        if required > budget as u128 {
            return Err(DirectionError::EnumerationBudget { required, budget });
        }

        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut found_independent = false;
        let mut matrix = vec![0.0; n * n];
        let ones = vec![1.0; n];

        let mut indices: Vec<usize> = (0..n).collect();
        loop {
            for (row, &idx) in indices.iter().enumerate() {
                matrix[row * n..(row + 1) * n].copy_from_slice(&self.directions[idx]);
            }
            if let Some(lu) = lu_factor(&matrix, n) {
                let well_conditioned = condition_1(&matrix, n)
                    .is_some_and(|cond| cond <= INDEPENDENCE_CONDITION_LIMIT);
                if well_conditioned {
                    found_independent = true;
                    let u = lu.solve(&ones);
                    let len = norm(&u);
                    if len.is_finite() && len > 1e-300 {
                        for sign in [1.0, -1.0] {
                            let v = linalg::scaled(&u, sign / len);
                            let value = self.max_alignment(&v);
                            if best.as_ref().is_none_or(|(b, _)| value < *b) {
                                best = Some((value, v));
                            }
                        }
                    }
                }
            }
            if !next_combination(&mut indices, p) {
                break;
            }
        }

        if !found_independent {
            return Err(DirectionError::DegenerateSet { dimension: n });
        }
        let (mu, witness) = best.expect("independent subset implies a candidate");
        Ok(CosineMeasureResult {
            mu,
            witness,
            method: CosineMethod::ExactEnumeration,
        })
    }

    /// Sampled cosine measure: the minimum of `max_{d in D} <v, d>` over
    /// `num_samples` seeded uniform unit vectors, followed by a deterministic
    /// tangent pattern descent from the best samples.
    ///
    /// The polish step keeps the estimate an upper bound on `mu` (every unit
    /// vector's alignment value is) while removing the sampling resolution
    /// floor, which grows too fast with the dimension for the raw minimum to
    /// be usable beyond `n = 3` at practical sample counts.
    pub fn cosine_measure_sampled(
        &self,
        num_samples: u64,
        seed: u64,
    ) -> Result<CosineMeasureResult, DirectionError> {
        if num_samples == 0 {
            return Err(DirectionError::NoSamples);
        }
        let n = self.dimension;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        // Keep the best few distinct sample starts for the polish phase.
        const POLISH_STARTS: usize = 16;
        let mut leaders: Vec<(f64, Vec<f64>)> = Vec::with_capacity(POLISH_STARTS + 1);
        let mut v = vec![0.0; n];
        for _ in 0..num_samples {
            fill_random_unit_vector(&mut rng, &mut v);
            let value = self.max_alignment(&v);
            if leaders.len() < POLISH_STARTS || value < leaders.last().expect("nonempty").0 {
                let pos = leaders.partition_point(|(lv, _)| *lv <= value);
                leaders.insert(pos, (value, v.clone()));
                leaders.truncate(POLISH_STARTS);
            }
        }

        let (mut mu, mut witness) = leaders.first().cloned().expect("num_samples >= 1");
        for (index, (_, start)) in leaders.iter().enumerate() {
            let polish_seed = seed ^ (0x9e37_79b9_7f4a_7c15_u64.wrapping_mul(index as u64 + 1));
            let (value, v) = self.pattern_descent(start, polish_seed);
            if value < mu {
                mu = value;
                witness = v;
            }
        }
        Ok(CosineMeasureResult {
            mu,
            witness,
            method: CosineMethod::Sampled { num_samples, seed },
        })
    }

    /// Minimizes `max_{d in D} <v, d>` over the unit sphere, starting from a
    /// near-optimal sample: pattern moves along the tangent coordinate basis
    /// plus composite moves away from the top-aligned pieces, halving the
    /// step on stalled passes.
    ///
    /// The composite moves handle the ridge case the coordinate moves miss
    /// (descending requires leaving several tied pieces at once); when a
    /// pass still stalls, a burst of seeded random tangent directions probes
    /// for any remaining descent cone before the step shrinks. Moves must
    /// clear a small relative decrease so the nonsmooth vertex cannot absorb
    /// unbounded zigzag passes; the pass cap keeps the cost fixed either way.
    fn pattern_descent(&self, start: &[f64], rng_seed: u64) -> (f64, Vec<f64>) {
        let n = self.dimension;
        let mut v = start.to_vec();
        let mut best = self.max_alignment(&v);
        if n == 1 {
            return (best, v);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let mut step = 0.05_f64;
        let mut passes = 0u32;
        while step > 1e-12 && passes < 4000 {
            passes += 1;
            let mut improved = false;
            let try_move = |t: &[f64], best: &mut f64, v: &mut Vec<f64>| -> bool {
                let mut moved = false;
                for sign in [1.0, -1.0] {
                    let cand = unit(&linalg::axpy(v, sign * step, t));
                    let value = self.max_alignment(&cand);
                    if value < *best - 1e-12 * (1.0 + best.abs()) {
                        *best = value;
                        *v = cand;
                        moved = true;
                    }
                }
                moved
            };
            let mut moves = tangent_basis(&v);
            moves.extend(self.ridge_descent_directions(&v));
            for t in &moves {
                improved |= try_move(t, &mut best, &mut v);
            }
            if !improved {
                let mut probe = vec![0.0; n];
                for _ in 0..32 {
                    fill_standard_normals(&mut rng, &mut probe);
                    let radial = dot(&probe, &v);
                    for (p, vi) in probe.iter_mut().zip(&v) {
                        *p -= radial * vi;
                    }
                    let len = norm(&probe);
                    if len > 1e-12 {
                        let t = linalg::scaled(&probe, 1.0 / len);
                        if try_move(&t, &mut best, &mut v) {
                            improved = true;
                            break;
                        }
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        (best, v)
    }

    /// Tangent directions pointing away from combinations of the
    /// top-aligned pieces: the pairwise sums resolve two-piece ridges
    /// exactly, and the full top-set sum covers wider vertices.
    fn ridge_descent_directions(&self, v: &[f64]) -> Vec<Vec<f64>> {
        let n = self.dimension;
        let top = n.min(4).min(self.directions.len());
        // Indices of the `top` largest alignments.
        let mut order: Vec<usize> = (0..self.directions.len()).collect();
        order.sort_by(|&a, &b| {
            dot(v, &self.directions[b]).total_cmp(&dot(v, &self.directions[a]))
        });
        order.truncate(top);

        let tangent_away = |sum: &[f64]| -> Option<Vec<f64>> {
            let radial = dot(sum, v);
            let mut t: Vec<f64> = sum
                .iter()
                .zip(v)
                .map(|(s, vi)| -(s - radial * vi))
                .collect();
            let len = norm(&t);
            if len > 1e-12 {
                for x in t.iter_mut() {
                    *x /= len;
                }
                Some(t)
            } else {
                None
            }
        };

        let mut moves = Vec::new();
        for i in 0..order.len() {
            for j in i + 1..order.len() {
                let sum: Vec<f64> = self.directions[order[i]]
                    .iter()
                    .zip(&self.directions[order[j]])
                    .map(|(a, b)| a + b)
                    .collect();
                moves.extend(tangent_away(&sum));
            }
        }
        if order.len() > 2 {
            let mut sum = vec![0.0; n];
            for &idx in &order {
                for (s, di) in sum.iter_mut().zip(&self.directions[idx]) {
                    *s += di;
                }
            }
            moves.extend(tangent_away(&sum));
        }
        moves
    }

    /// `max_{d in D} <v, d>` for unit `v`.
    fn max_alignment(&self, v: &[f64]) -> f64 {
        self.directions
            .iter()
            .map(|d| dot(v, d))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Verdict `mu(D) > tol` from the exact computation. A degenerate set
    /// (no independent `n`-subset) cannot span and maps to `false`.
    pub fn is_positive_spanning_set(&self, tol: f64) -> Result<bool, DirectionError> {
        if !(tol > 0.0) {
            return Err(DirectionError::NonPositiveTolerance);
        }
        match self.cosine_measure_exact() {
            Ok(result) => Ok(result.mu > tol),
            Err(DirectionError::DegenerateSet { .. }) => Ok(false),
            Err(other) => Err(other),
        }
    }

    /// The stored direction best aligned with `v`, as `(index, cosine)` with
    /// `cosine = <v, d> / ||v||`. Ties break to the lowest index. When `D`
    /// positively spans, the returned cosine is at least `mu(D)`.
    pub fn best_aligned_direction(&self, v: &[f64]) -> Result<(usize, f64), DirectionError> {
        if v.len() != self.dimension {
            return Err(DirectionError::DimensionMismatch {
                index: 0,
                found: v.len(),
                expected: self.dimension,
            });
        }
        let len = norm(v);
        if !len.is_finite() || !(len > 0.0) || v.iter().any(|x| !x.is_finite()) {
            return Err(DirectionError::InvalidQuery);
        }
        let mut best_index = 0;
        let mut best_cos = f64::NEG_INFINITY;
        for (index, d) in self.directions.iter().enumerate() {
            let cos = dot(v, d) / len;
            if cos > best_cos {
                best_cos = cos;
                best_index = index;
            }
        }
        Ok((best_index, best_cos))
    }
}

/// JSON shape: `{"dimension": n, "directions": [[...], ...]}`. Directions are
/// written post-normalization; input vectors may be non-unit and are
/// normalized (and validated) on deserialization.
impl Serialize for DirectionSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            dimension: usize,
            directions: &'a [Vec<f64>],
        }
        Repr {
            dimension: self.dimension,
            directions: &self.directions,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DirectionSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            dimension: usize,
            directions: Vec<Vec<f64>>,
        }
        let repr = Repr::deserialize(deserializer)?;
        let set = DirectionSet::new(&repr.directions).map_err(D::Error::custom)?;
        if set.dimension() != repr.dimension {
            return Err(D::Error::custom(format!(
                "declared dimension {} does not match vectors of dimension {}",
                repr.dimension,
                set.dimension()
            )));
        }
        Ok(set)
    }
}

/// Orthonormal basis of the tangent space at unit vector `v`, built by
/// Gram-Schmidt over the coordinate axes. Deterministic in `v`.
fn tangent_basis(v: &[f64]) -> Vec<Vec<f64>> {
    let n = v.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for i in 0..n {
        if basis.len() == n - 1 {
            break;
        }
        let mut w: Vec<f64> = (0..n).map(|j| -v[j] * v[i]).collect();
        w[i] += 1.0;
        for b in &basis {
            let proj = dot(&w, b);
            for (wj, bj) in w.iter_mut().zip(b) {
                *wj -= proj * bj;
            }
        }
        let len = norm(&w);
        if len > 1e-8 {
            basis.push(linalg::scaled(&w, 1.0 / len));
        }
    }
    basis
}

fn unit(v: &[f64]) -> Vec<f64> {
    linalg::scaled(v, 1.0 / norm(v))
}

/// Uniform unit vector via normalized gaussians.
#[cfg(test)]
fn random_unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    fill_random_unit_vector(rng, &mut v);
    v
}

fn fill_random_unit_vector(rng: &mut ChaCha8Rng, v: &mut [f64]) {
    loop {
        fill_standard_normals(rng, v);
        let len = norm(v);
        if len > 1e-12 {
            for x in v.iter_mut() {
                *x /= len;
            }
            return;
        }
    }
}

/// Marsaglia polar method: two gaussians per accepted uniform pair.
fn fill_standard_normals(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    let mut i = 0;
    while i < out.len() {
        let (u, w) = loop {
            let u = 2.0 * rng.random::<f64>() - 1.0;
            let w = 2.0 * rng.random::<f64>() - 1.0;
            let s = u * u + w * w;
            if s > 0.0 && s < 1.0 {
                let factor = (-2.0 * s.ln() / s).sqrt();
                break (u * factor, w * factor);
            }
        };
        out[i] = u;
        i += 1;
        if i < out.len() {
            out[i] = w;
            i += 1;
        }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result.saturating_mul(n - i) / (i + 1);
    }
    result
}

/// Advances `indices` to the next lexicographic `k`-combination of `0..p`.
fn next_combination(indices: &mut [usize], p: usize) -> bool {
    let k = indices.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if indices[i] < p - (k - i) {
            indices[i] += 1;
            for j in i + 1..k {
                indices[j] = indices[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
