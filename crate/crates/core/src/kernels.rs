//! Covariance kernels, Gram matrices and the discretized Karhunen–Loève
//! eigensystem.

use alloc::format;
use alloc::vec::Vec;

use crate::data::Grid;
use crate::error::{Error, Result};
use crate::linalg::{dot, solve_spd, symmetric_eigen, Matrix, RidgePolicy};

/// A covariance function `K(s, t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// `min(s, t)`.
    Brownian,
    /// `min(s, t) − s·t / t_end`, the bridge pinned at `t_end`.
    BrownianBridge { t_end: f64 },
    /// `sigma2 · exp(−theta·|s − t|)`.
    OrnsteinUhlenbeck { theta: f64, sigma2: f64 },
    /// Tabulated covariance on a grid; only grid points may be queried.
    Empirical { matrix: Matrix, grid: Grid },
}

impl KernelSpec {
    pub fn brownian_bridge() -> Self {
        KernelSpec::BrownianBridge { t_end: 1.0 }
    }

    /// OU kernel with the default parameters θ = 1, σ² = 1.
    pub fn ornstein_uhlenbeck() -> Self {
        KernelSpec::OrnsteinUhlenbeck { theta: 1.0, sigma2: 1.0 }
    }

    pub fn empirical(matrix: Matrix, grid: Grid) -> Result<Self> {
        if matrix.dim() != grid.len() {
            return Err(Error::invalid("empirical kernel matrix does not match its grid"));
        }
        Ok(KernelSpec::Empirical { matrix, grid })
    }

    fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::BrownianBridge { t_end } if !(t_end > 0.0 && t_end.is_finite()) => {
                Err(Error::invalid("bridge end time must be positive"))
            }
            KernelSpec::OrnsteinUhlenbeck { theta, sigma2 }
                if !(theta > 0.0 && sigma2 > 0.0 && theta.is_finite() && sigma2.is_finite()) =>
            {
                Err(Error::invalid("OU parameters must be positive"))
            }
            _ => Ok(()),
        }
    }

    fn empirical_index(grid: &Grid, t: f64) -> Result<usize> {
        grid.index_of(t).ok_or_else(|| Error::invalid(format!("time {t} is not on the empirical kernel grid")))
    }
}

/// Evaluates `K(s, t)`.
pub fn kernel_eval(spec: &KernelSpec, s: f64, t: f64) -> Result<f64> {
    spec.validate()?;
    if !(s.is_finite() && t.is_finite()) || s < 0.0 || t < 0.0 {
        return Err(Error::invalid("kernel arguments must be finite times in [0, T]"));
    }
    Ok(match spec {
        KernelSpec::Brownian => s.min(t),
        KernelSpec::BrownianBridge { t_end } => {
            if s > *t_end || t > *t_end {
                return Err(Error::invalid("bridge kernel evaluated beyond its end time"));
            }
            s.min(t) - s * t / t_end
        }
        KernelSpec::OrnsteinUhlenbeck { theta, sigma2 } => sigma2 * libm::exp(-theta * (s - t).abs()),
        KernelSpec::Empirical { matrix, grid } => {
            let i = KernelSpec::empirical_index(grid, s)?;
            let j = KernelSpec::empirical_index(grid, t)?;
            matrix.get(i, j)
        }
    })
}

/// Gram matrix `K(t_i, t_j)` at distinct points.
pub fn gram(spec: &KernelSpec, points: &[f64]) -> Result<Matrix> {
    for (a, s) in points.iter().enumerate() {
        if points[a + 1..].contains(s) {
            return Err(Error::invalid(format!("duplicate Gram point {s}")));
        }
    }
    let mut m = Matrix::zeros(points.len());
    for i in 0..points.len() {
        for j in 0..=i {
            let v = kernel_eval(spec, points[i], points[j])?;
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    Ok(m)
}

/// `mᵀ K⁻¹ m` with the default ridge policy.
pub fn mahalanobis_psi(mean_vec: &[f64], gram: &Matrix) -> Result<f64> {
    mahalanobis_psi_with(mean_vec, gram, RidgePolicy::default())
}

pub fn mahalanobis_psi_with(mean_vec: &[f64], gram: &Matrix, policy: RidgePolicy) -> Result<f64> {
    if mean_vec.len() != gram.dim() {
        return Err(Error::invalid("mean vector and Gram matrix dimensions differ"));
    }
    let sol = solve_spd(gram, mean_vec, policy)?;
    Ok(dot(mean_vec, &sol.x).max(0.0))
}

/// Discretized Karhunen–Loève system of a kernel on a grid.
///
/// Eigenfunctions are orthonormal under the quadrature `Σ_w f(t_w) g(t_w) Δt`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenfunctions: Vec<Vec<f64>>,
    pub step: f64,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `Σ_{j<r} θ_j φ_j(t_a) φ_j(t_b)`.
    pub fn reconstruct(&self, r: usize, a: usize, b: usize) -> f64 {
        self.eigenvalues.iter().zip(&self.eigenfunctions).take(r).map(|(theta, phi)| theta * phi[a] * phi[b]).sum()
    }

    /// Quadrature inner product `⟨f, φ_j⟩ = Σ f(t_w) φ_j(t_w) Δt`.
    pub fn coefficient(&self, j: usize, f: &[f64]) -> f64 {
        dot(f, &self.eigenfunctions[j]) * self.step
    }
}

/// Eigendecomposition of the Gram matrix scaled by Δt, sorted descending,
/// with each eigenfunction signed positive at its first nonzero entry.
pub fn discretized_eigen(spec: &KernelSpec, grid: &Grid) -> Result<EigenSystem> {
    let step = grid.step();
    let k = gram_on_grid(spec, grid)?;
    let scaled = k.scaled(step);
    let eig = symmetric_eigen(&scaled)?;
    let inv_sqrt = 1.0 / libm::sqrt(step);
    let eigenfunctions = eig
        .vectors
        .into_iter()
        .map(|v| {
            let peak = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            let sign = v.iter().find(|x| x.abs() > 1e-10 * peak).map_or(1.0, |x| x.signum());
            v.into_iter().map(|x| sign * x * inv_sqrt).collect()
        })
        .collect();
    let eigenvalues = eig.values.into_iter().map(|x| x.max(0.0)).collect();
    Ok(EigenSystem { eigenvalues, eigenfunctions, step })
}

/// Full Gram matrix over every grid point.
pub fn gram_on_grid(spec: &KernelSpec, grid: &Grid) -> Result<Matrix> {
    if let KernelSpec::Empirical { matrix, grid: kg } = spec {
        if kg == grid {
            return Ok(matrix.clone());
        }
    }
    spec.validate()?;
    let pts = grid.points();
    let mut m = Matrix::zeros(pts.len());
    for i in 0..pts.len() {
        for j in 0..=i {
            let v = kernel_eval(spec, pts[i], pts[j])?;
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    Ok(m)
}
