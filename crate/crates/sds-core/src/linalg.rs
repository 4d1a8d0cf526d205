//! Small dense linear algebra used by the direction-set machinery.
//!
//! Everything here operates on `n x n` systems with `n` in the single digits,
//! so plain row-major `Vec<f64>` storage and textbook LU with partial
//! pivoting are all that is needed.

/// LU factorization (partial pivoting) of a square matrix.
pub(crate) struct Lu {
    n: usize,
    /// Combined L (unit diagonal, below) and U (on and above the diagonal).
    lu: Vec<f64>,
    /// Row permutation applied to the right-hand side before solving.
    perm: Vec<usize>,
}

/// Factors the row-major `n x n` matrix `a`. Returns `None` when a pivot
/// falls below `1e-300`, i.e. the matrix is numerically singular.
pub(crate) fn lu_factor(a: &[f64], n: usize) -> Option<Lu> {
    debug_assert_eq!(a.len(), n * n);
    let mut lu = a.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_abs = lu[col * n + col].abs();
        for row in col + 1..n {
            let cand = lu[row * n + col].abs();
            if cand > pivot_abs {
                pivot_abs = cand;
                pivot_row = row;
            }
        }
        if !(pivot_abs > 1e-300) {
            return None;
        }
        if pivot_row != col {
            for j in 0..n {
                lu.swap(col * n + j, pivot_row * n + j);
            }
            perm.swap(col, pivot_row);
        }
        let pivot = lu[col * n + col];
        for row in col + 1..n {
            let factor = lu[row * n + col] / pivot;
            lu[row * n + col] = factor;
            for j in col + 1..n {
                lu[row * n + j] -= factor * lu[col * n + j];
            }
        }
    }
    Some(Lu { n, lu, perm })
}

impl Lu {
    /// Solves `A x = b` using the stored factors.
    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                x[i] -= self.lu[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[i * n + j] * x[j];
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }
}

/// 1-norm condition number estimate: `||A||_1 * ||A^-1||_1`, with the inverse
/// norm computed exactly column by column. Returns `None` for singular input.
pub(crate) fn condition_1(a: &[f64], n: usize) -> Option<f64> {
    let lu = lu_factor(a, n)?;
    let mut norm_a: f64 = 0.0;
    for col in 0..n {
        let mut sum = 0.0;
        for row in 0..n {
            sum += a[row * n + col].abs();
        }
        norm_a = norm_a.max(sum);
    }
    let mut norm_inv: f64 = 0.0;
    let mut unit = vec![0.0; n];
    for col in 0..n {
        unit[col] = 1.0;
        let x = lu.solve(&unit);
        unit[col] = 0.0;
        let sum: f64 = x.iter().map(|v| v.abs()).sum();
        norm_inv = norm_inv.max(sum);
    }
    let cond = norm_a * norm_inv;
    cond.is_finite().then_some(cond)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub(crate) fn axpy(x: &[f64], alpha: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
