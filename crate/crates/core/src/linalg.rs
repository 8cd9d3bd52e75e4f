//! Small dense symmetric linear algebra: Cholesky solves with an explicit
//! ridge policy and a cyclic Jacobi eigensolver.
//!
//! Matrices here are at most a few hundred rows (one row per grid point), so
//! straightforward O(n³) kernels are adequate.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    /// Builds from rows; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("matrix rows must form a square"));
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn scaled(&self, c: f64) -> Matrix {
        Matrix { n: self.n, data: self.data.iter().map(|v| v * c).collect() }
    }

    /// Principal submatrix on `indices` (in the given order).
    pub fn submatrix(&self, indices: &[usize]) -> Matrix {
        Self::from_fn(indices.len(), |a, b| self.get(indices[a], indices[b]))
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    fn max_abs_diag(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i).abs()).fold(0.0, f64::max)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Pivots at or below this fraction of the largest diagonal entry count as a
/// Cholesky failure.
const PIVOT_TOL: f64 = 1e-14;

/// Lower Cholesky factor of `a + ridge·I`, or `None` if a pivot is not
/// safely positive.
fn cholesky(a: &Matrix, ridge: f64) -> Option<Matrix> {
    let n = a.dim();
    let floor = PIVOT_TOL * (a.max_abs_diag() + ridge);
    let mut l = Matrix::zeros(n);
    for j in 0..n {
        let mut d = a.get(j, j) + ridge;
        for k in 0..j {
            d -= l.get(j, k) * l.get(j, k);
        }
        if !(d > floor) || !d.is_finite() {
            return None;
        }
        let ljj = libm::sqrt(d);
        l.set(j, j, ljj);
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / ljj);
        }
    }
    Some(l)
}

fn cholesky_solve(l: &Matrix, rhs: &[f64]) -> Vec<f64> {
    let n = l.dim();
    let mut x = rhs.to_vec();
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= l.get(i, k) * x[k];
        }
        x[i] = s / l.get(i, i);
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s -= l.get(k, i) * x[k];
        }
        x[i] = s / l.get(i, i);
    }
    x
}

/// Regularization used when a plain Cholesky factorization fails.
///
/// The first fallback adds `relative · trace / d` to the diagonal; if that
/// also fails and `escalate` is set, the ridge is multiplied once by
/// `escalation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgePolicy {
    pub relative: f64,
    pub escalation: f64,
    pub escalate: bool,
}

impl Default for RidgePolicy {
    fn default() -> Self {
        RidgePolicy { relative: 1e-8, escalation: 100.0, escalate: true }
    }
}

impl RidgePolicy {
    /// No regularization at all: fail as soon as plain Cholesky fails.
    pub fn none() -> Self {
        RidgePolicy { relative: 0.0, escalation: 1.0, escalate: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpdSolution {
    pub x: Vec<f64>,
    /// Diagonal shift that was actually used (0 when none was needed).
    pub ridge: f64,
}

/// Solves `(matrix + εI) x = rhs` for a symmetric matrix, with ε chosen by
/// `policy` (see [`RidgePolicy`]).
pub fn solve_spd(matrix: &Matrix, rhs: &[f64], policy: RidgePolicy) -> Result<SpdSolution> {
    let d = matrix.dim();
    if rhs.len() != d {
        return Err(Error::invalid("right-hand side length does not match matrix"));
    }
    if d == 0 {
        return Ok(SpdSolution { x: Vec::new(), ridge: 0.0 });
    }
    let scale = 1e-12 * matrix.max_abs_diag().max(f64::MIN_POSITIVE);
    if matrix.max_asymmetry() > scale.max(1e-12) {
        return Err(Error::invalid("matrix is not symmetric"));
    }
    if let Some(l) = cholesky(matrix, 0.0) {
        return Ok(SpdSolution { x: cholesky_solve(&l, rhs), ridge: 0.0 });
    }
    let base = policy.relative * matrix.trace() / d as f64;
    let mut tried = 0.0;
    if base > 0.0 && base.is_finite() {
        let mut ridges = vec![base];
        if policy.escalate {
            ridges.push(base * policy.escalation);
        }
        for ridge in ridges {
            tried = ridge;
            if let Some(l) = cholesky(matrix, ridge) {
                return Ok(SpdSolution { x: cholesky_solve(&l, rhs), ridge });
            }
        }
    }
    Err(Error::SingularMatrix { dim: d, ridge: tried })
}

/// Eigenpairs of a symmetric matrix: values sorted descending, unit
/// Euclidean eigenvectors returned as `vectors[j]` for `values[j]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Cyclic Jacobi rotations until the off-diagonal mass is negligible.
pub fn symmetric_eigen(matrix: &Matrix) -> Result<SymmetricEigen> {
    let n = matrix.dim();
    let mut a = matrix.clone();
    // Symmetrize to absorb rounding in the input.
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (a.get(i, j) + a.get(j, i));
            a.set(i, j, m);
            a.set(j, i, m);
        }
    }
    let mut v = Matrix::identity(n);
    let total: f64 = a.data.iter().map(|x| x * x).sum();
    if total == 0.0 {
        return Ok(SymmetricEigen { values: vec![0.0; n], vectors: (0..n).map(|j| column(&v, j)).collect() });
    }
    const MAX_SWEEPS: usize = 100;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..i {
                off += a.get(i, j) * a.get(i, j);
            }
        }
        if off <= 1e-30 * total {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    if !converged {
        return Err(Error::NumericalFailure("Jacobi eigensolver did not converge".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).total_cmp(&a.get(i, i)).then(i.cmp(&j)));
    Ok(SymmetricEigen {
        values: order.iter().map(|&j| a.get(j, j)).collect(),
        vectors: order.iter().map(|&j| column(&v, j)).collect(),
    })
}

fn column(m: &Matrix, j: usize) -> Vec<f64> {
    (0..m.dim()).map(|i| m.get(i, j)).collect()
}
