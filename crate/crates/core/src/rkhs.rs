//! Finite-expansion RKHS means, the optimal (Bayes) discriminant for two
//! homoscedastic Gaussian processes, its closed-form error and the truncated
//! Karhunen–Loève approximating problems.
//!
//! A mean difference `m(·) = Σ α_i K(·, t_i)` has RKHS norm `‖m‖²_K = αᵀKα`,
//! which equals the Mahalanobis distance `mᵀK⁻¹m` between the class means at
//! the knots `t_i`. The optimal rule then only needs `x(t_1), …, x(t_d)`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernels::{gram, kernel_eval, EigenSystem, KernelSpec};
use crate::linalg::{dot, solve_spd, Matrix, RidgePolicy};
use crate::special::normal_cdf;

/// `m(·) = Σ α_i K(·, t_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteExpansionMean {
    points: Vec<f64>,
    alphas: Vec<f64>,
    kernel: KernelSpec,
}

impl FiniteExpansionMean {
    pub fn new(points: Vec<f64>, alphas: Vec<f64>, kernel: KernelSpec) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("finite expansion needs at least one point"));
        }
        if points.len() != alphas.len() {
            return Err(Error::invalid("one coefficient per expansion point is required"));
        }
        if alphas.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("expansion coefficients must be finite"));
        }
        // Distinctness and domain checks.
        gram(&kernel, &points)?;
        Ok(FiniteExpansionMean { points, alphas, kernel })
    }

    /// Recovers the coefficients from mean values at the knots (`m = K·α`).
    pub fn from_values(points: Vec<f64>, mean_vec: &[f64], kernel: KernelSpec) -> Result<Self> {
        let k = gram(&kernel, &points)?;
        let alphas = alphas_from_mean(mean_vec, &k)?;
        Self::new(points, alphas, kernel)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let mut s = 0.0;
        for (&ti, &a) in self.points.iter().zip(&self.alphas) {
            s += a * kernel_eval(&self.kernel, t, ti)?;
        }
        Ok(s)
    }

    pub fn gram(&self) -> Result<Matrix> {
        gram(&self.kernel, &self.points)
    }

    /// Values of `m` at its own knots, `K·α`.
    pub fn values_at_points(&self) -> Result<Vec<f64>> {
        Ok(self.gram()?.mul_vec(&self.alphas))
    }
}

/// Solves `K·α = m` with the default ridge policy.
pub fn alphas_from_mean(mean_vec: &[f64], gram: &Matrix) -> Result<Vec<f64>> {
    if mean_vec.len() != gram.dim() {
        return Err(Error::invalid("mean vector and Gram matrix dimensions differ"));
    }
    Ok(solve_spd(gram, mean_vec, RidgePolicy::default())?.x)
}

/// `‖m‖²_K = αᵀKα`.
pub fn rkhs_norm_sq(mean: &FiniteExpansionMean) -> Result<f64> {
    let k = mean.gram()?;
    Ok(dot(&mean.alphas, &k.mul_vec(&mean.alphas)).max(0.0))
}

/// Score of the optimal rule,
/// `Σ α_i (x(t_i) − (m₀(t_i) + m₁(t_i))/2) − log((1 − p)/p)`.
///
/// Label 1 is predicted iff the score is strictly positive.
pub fn bayes_discriminant(
    x_at_points: &[f64],
    mean: &FiniteExpansionMean,
    m0_at_points: &[f64],
    m1_at_points: &[f64],
    p: f64,
) -> Result<f64> {
    linear_score(x_at_points, mean.alphas(), m0_at_points, m1_at_points, p)
}

pub(crate) fn linear_score(x: &[f64], alphas: &[f64], m0: &[f64], m1: &[f64], p: f64) -> Result<f64> {
    let d = alphas.len();
    if x.len() != d || m0.len() != d || m1.len() != d {
        return Err(Error::invalid(format!("discriminant inputs must all have length {d}")));
    }
    let offset = log_prior_odds(p)?;
    let s: f64 = (0..d).map(|i| alphas[i] * (x[i] - 0.5 * (m0[i] + m1[i]))).sum();
    Ok(s - offset)
}

/// `log((1 − p)/p)` for `p ∈ (0, 1)`.
pub fn log_prior_odds(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("prior {p} must lie strictly between 0 and 1")));
    }
    Ok(libm::log((1.0 - p) / p))
}

/// Label from a discriminant score; a score of exactly zero maps to 0.
pub fn label_from_score(score: f64) -> u8 {
    u8::from(score > 0.0)
}

/// Closed-form Bayes error for mean-difference norm `norm_k = ‖m‖_K` and
/// prior `p`:
/// `(1−p)·Φ(−‖m‖/2 − c/‖m‖) + p·Φ(−‖m‖/2 + c/‖m‖)` with `c = log((1−p)/p)`.
///
/// As `norm_k → 0` with `p = ½` the error tends to ½; that limit is not
/// returned, `norm_k ≤ 0` is rejected.
pub fn bayes_error(norm_k: f64, p: f64) -> Result<f64> {
    if !(norm_k > 0.0) || !norm_k.is_finite() {
        return Err(Error::invalid("RKHS norm must be positive and finite"));
    }
    let c = log_prior_odds(p)?;
    let half = 0.5 * norm_k;
    Ok((1.0 - p) * normal_cdf(-half - c / norm_k) + p * normal_cdf(-half + c / norm_k))
}

/// One member of the approximating sequence obtained by keeping the first
/// `r` Karhunen–Loève terms of the mean difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedProblem {
    pub r: usize,
    pub norm_sq: f64,
    pub bayes_error: f64,
}

/// For `r = 1..=r_max`: `‖m_r‖² = Σ_{j≤r} μ_j²/θ_j` and the balanced-prior
/// Bayes error of that truncated problem.
pub fn truncation_sequence(mu: &[f64], eigen: &EigenSystem, r_max: usize) -> Result<Vec<TruncatedProblem>> {
    if r_max > mu.len() || r_max > eigen.len() {
        return Err(Error::invalid(format!(
            "r_max = {r_max} exceeds the available coefficients ({}) or eigenpairs ({})",
            mu.len(),
            eigen.len()
        )));
    }
    let mut out = Vec::with_capacity(r_max);
    let mut norm_sq = 0.0;
    for r in 1..=r_max {
        let theta = eigen.eigenvalues[r - 1];
        if !(theta > 0.0) {
            return Err(Error::invalid(format!("eigenvalue {r} is zero")));
        }
        norm_sq += mu[r - 1] * mu[r - 1] / theta;
        let err = bayes_error(libm::sqrt(norm_sq), 0.5)?;
        out.push(TruncatedProblem { r, norm_sq, bayes_error: err });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::make_grid;
    use crate::kernels::{discretized_eigen, mahalanobis_psi};
    use crate::simulate::toy_mean;
    use alloc::vec;

    #[test]
    fn alphas_examples() {
        let k1 = Matrix::from_rows(&[&[0.5]]).unwrap();
        assert!((alphas_from_mean(&[0.5], &k1).unwrap()[0] - 1.0).abs() < 1e-15);
        let k2 = Matrix::from_rows(&[&[0.5, 0.5], &[0.5, 1.0]]).unwrap();
        let a = alphas_from_mean(&[0.5, 1.0], &k2).unwrap();
        assert!(a[0].abs() < 1e-14 && (a[1] - 1.0).abs() < 1e-14);
        let k3 = gram(&KernelSpec::ornstein_uhlenbeck(), &[0.1, 0.7]).unwrap();
        let m = k3.mul_vec(&[2.0, -3.0]);
        let a = alphas_from_mean(&m, &k3).unwrap();
        assert!((a[0] - 2.0).abs() < 1e-12 && (a[1] + 3.0).abs() < 1e-12);
    }

    #[test]
    fn norm_examples() {
        let m = FiniteExpansionMean::new(vec![0.5], vec![1.0], KernelSpec::Brownian).unwrap();
        assert!((rkhs_norm_sq(&m).unwrap() - 0.5).abs() < 1e-15);
        let zero = FiniteExpansionMean::new(vec![0.2, 0.4], vec![0.0, 0.0], KernelSpec::Brownian).unwrap();
        assert_eq!(rkhs_norm_sq(&zero).unwrap(), 0.0);
        let knots = vec![0.25, 0.375, 0.5, 0.75, 1.0];
        let vals: Vec<f64> = knots.iter().map(|&t| toy_mean(t)).collect();
        let toy = FiniteExpansionMean::from_values(knots, &vals, KernelSpec::Brownian).unwrap();
        let n2 = rkhs_norm_sq(&toy).unwrap();
        assert!((n2 - 4.0).abs() < 1e-9);
        let psi = mahalanobis_psi(&toy.values_at_points().unwrap(), &toy.gram().unwrap()).unwrap();
        assert!((psi - n2).abs() < 1e-9);
        // The expansion reproduces the piecewise linear toy mean between knots.
        for t in [0.1, 0.3, 0.6, 0.9] {
            assert!((toy.eval(t).unwrap() - toy_mean(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn discriminant_examples() {
        let m = FiniteExpansionMean::new(vec![0.5], vec![1.0], KernelSpec::Brownian).unwrap();
        let s = bayes_discriminant(&[0.9], &m, &[0.0], &[1.0], 0.5).unwrap();
        assert!((s - 0.4).abs() < 1e-15);
        assert_eq!(label_from_score(s), 1);
        let s = bayes_discriminant(&[0.5], &m, &[0.0], &[1.0], 0.5).unwrap();
        assert_eq!(s, 0.0);
        assert_eq!(label_from_score(s), 0);
        let s = bayes_discriminant(&[0.5], &m, &[0.0], &[1.0], 0.9).unwrap();
        assert!((s - libm::log(9.0)).abs() < 1e-12);
        assert_eq!(label_from_score(s), 1);
        assert!(bayes_discriminant(&[0.5], &m, &[0.0], &[1.0], 1.0).is_err());
        assert!(bayes_discriminant(&[0.5], &m, &[0.0], &[1.0], 0.0).is_err());
    }

    #[test]
    fn bayes_error_examples() {
        assert!((bayes_error(2.0, 0.5).unwrap() - 0.1587).abs() < 1e-4);
        assert!((bayes_error(1.0, 0.5).unwrap() - 0.30854).abs() < 1e-5);
        assert!((bayes_error(2.0, 0.9).unwrap() - 0.0701).abs() < 1e-3);
        assert!(bayes_error(0.0, 0.5).is_err());
        assert!(bayes_error(-1.0, 0.5).is_err());
    }

    #[test]
    fn harmonic_truncation() {
        let grid = make_grid(200, 0.0, 1.0).unwrap();
        let e = discretized_eigen(&KernelSpec::Brownian, &grid).unwrap();
        let mu: Vec<f64> = (0..100).map(|j| libm::sqrt(e.eigenvalues[j] / (j + 1) as f64)).collect();
        let seq = truncation_sequence(&mu, &e, 100).unwrap();
        assert!((seq[0].norm_sq - 1.0).abs() < 1e-12);
        assert!((seq[0].bayes_error - 0.3085).abs() < 1e-3);
        assert!((seq[9].norm_sq - 2.928_968_253_968_254).abs() < 1e-9);
        assert!((seq[9].bayes_error - 0.1961).abs() < 1e-3);
        assert!((seq[99].bayes_error - 0.1274).abs() < 1e-3);
        let zero = vec![0.0; 10];
        assert!(truncation_sequence(&zero, &e, 5).is_err());
        assert!(truncation_sequence(&mu, &e, 101).is_err());
    }
}
