//! Greedy RKHS variable selection (RK-VS).
//!
//! Points are added one at a time; each step keeps the previously chosen
//! points and adds the admissible grid point that maximizes the Mahalanobis
//! criterion `ψ̂(t₁, …, t_k) = m̂ᵀ K̂⁻¹ m̂`. The first step reduces to the
//! pointwise signal-to-noise ratio `m̂(t)² / σ̂²_t`.

use alloc::format;
use alloc::vec::Vec;

use crate::data::{Grid, LabeledDataset, SelectionResult};
use crate::error::{Error, Result};
use crate::estimate::{class_moments, pooled_cov_full, ClassMoments};
use crate::kernels::{gram, gram_on_grid, mahalanobis_psi_with, KernelSpec};
use crate::linalg::{Matrix, RidgePolicy};

/// Source of covariance matrices at a set of grid indices.
pub trait CovarianceProvider {
    fn gram_at(&self, indices: &[usize]) -> Result<Matrix>;
}

/// Submatrices of a precomputed full-grid covariance (e.g. the pooled
/// estimate).
#[derive(Debug, Clone)]
pub struct MatrixProvider {
    full: Matrix,
}

impl MatrixProvider {
    pub fn new(full: Matrix) -> Self {
        MatrixProvider { full }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.full
    }
}

impl CovarianceProvider for MatrixProvider {
    fn gram_at(&self, indices: &[usize]) -> Result<Matrix> {
        if indices.iter().any(|&i| i >= self.full.dim()) {
            return Err(Error::invalid("covariance index outside the grid"));
        }
        Ok(self.full.submatrix(indices))
    }
}

/// Analytic kernel evaluated at grid points (the RK_B oracle variant uses
/// the Brownian kernel).
#[derive(Debug, Clone)]
pub struct KernelProvider {
    kernel: KernelSpec,
    grid: Grid,
}

impl KernelProvider {
    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }
}

impl CovarianceProvider for KernelProvider {
    fn gram_at(&self, indices: &[usize]) -> Result<Matrix> {
        if indices.iter().any(|&i| i >= self.grid.len()) {
            return Err(Error::invalid("covariance index outside the grid"));
        }
        let pts: Vec<f64> = indices.iter().map(|&i| self.grid.point(i)).collect();
        gram(&self.kernel, &pts)
    }
}

/// Covariance provider that evaluates a known kernel instead of the pooled
/// estimate.
pub fn oracle_gram_provider(kernel: KernelSpec, grid: Grid) -> KernelProvider {
    KernelProvider { kernel, grid }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CovarianceMode {
    /// Pooled sample covariance of the training data.
    Empirical,
    /// Known kernel.
    Oracle(KernelSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeanMode {
    Estimated,
    /// Known mean difference `m₁ − m₀` on the grid.
    Known(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionConfig {
    pub d_max: usize,
    /// Minimum separation between selected points; `None` means one grid step.
    pub delta: Option<f64>,
    pub ridge: RidgePolicy,
    /// Admissible grid indices; `None` admits every grid point.
    pub candidates: Option<Vec<usize>>,
    pub covariance: CovarianceMode,
    pub mean: MeanMode,
    /// Stop once the best candidate improves ψ̂ by no more than this
    /// fraction of the current value.
    pub rel_tol: f64,
}

impl SelectionConfig {
    pub fn new(d_max: usize) -> Self {
        SelectionConfig {
            d_max,
            delta: None,
            ridge: RidgePolicy::default(),
            candidates: None,
            covariance: CovarianceMode::Empirical,
            mean: MeanMode::Estimated,
            rel_tol: 1e-10,
        }
    }

    pub fn oracle(mut self, kernel: KernelSpec) -> Self {
        self.covariance = CovarianceMode::Oracle(kernel);
        self
    }

    pub fn with_candidates(mut self, candidates: Vec<usize>) -> Self {
        self.candidates = Some(candidates);
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn with_known_mean(mut self, mean_diff: Vec<f64>) -> Self {
        self.mean = MeanMode::Known(mean_diff);
        self
    }

    fn resolved(&self, grid: &Grid) -> Result<(Vec<usize>, f64)> {
        let step = grid.step();
        let delta = self.delta.unwrap_or(step);
        if !(delta >= step * (1.0 - 1e-9)) {
            return Err(Error::invalid(format!("delta {delta} is smaller than one grid step {step}")));
        }
        let mut candidates = match &self.candidates {
            Some(c) => c.clone(),
            None => (0..grid.len()).collect(),
        };
        candidates.sort_unstable();
        candidates.dedup();
        if candidates.iter().any(|&i| i >= grid.len()) {
            return Err(Error::invalid("candidate index outside the grid"));
        }
        if self.d_max == 0 || self.d_max > candidates.len() {
            return Err(Error::invalid(format!("d_max = {} must lie in 1..={}", self.d_max, candidates.len())));
        }
        Ok((candidates, delta))
    }
}

/// `ψ̂ = m̂ᵀ K̂⁻¹ m̂` at grid `indices`, with `cov` already restricted to the
/// same indices.
pub fn psi_hat(indices: &[usize], moments: &ClassMoments, cov: &Matrix) -> Result<f64> {
    mahalanobis_psi_with(&moments.mean_diff_at(indices), cov, RidgePolicy::default())
}

/// Greedy forward selection on `grid` for a mean difference given on every
/// grid point.
///
/// Candidates are scanned in increasing time so that exact ties keep the
/// smallest time. Candidates whose Gram matrix stays singular after the ridge
/// escalation are skipped.
pub fn greedy_select(
    grid: &Grid,
    mean_diff: &[f64],
    provider: &dyn CovarianceProvider,
    config: &SelectionConfig,
) -> Result<SelectionResult> {
    if mean_diff.len() != grid.len() {
        return Err(Error::invalid("mean difference must have one value per grid point"));
    }
    let (candidates, delta) = config.resolved(grid)?;
    let slack = 1e-9 * grid.step();
    let mut chosen: Vec<usize> = Vec::with_capacity(config.d_max);
    let mut trace: Vec<f64> = Vec::with_capacity(config.d_max);
    let mut probe: Vec<usize> = Vec::with_capacity(config.d_max);
    let mut mean: Vec<f64> = Vec::with_capacity(config.d_max);

    for step in 0..config.d_max {
        let mut best: Option<(usize, f64)> = None;
        for &c in &candidates {
            let tc = grid.point(c);
            if chosen.iter().any(|&s| s == c || (grid.point(s) - tc).abs() + slack < delta) {
                continue;
            }
            probe.clear();
            probe.extend_from_slice(&chosen);
            probe.push(c);
            mean.clear();
            mean.extend(probe.iter().map(|&i| mean_diff[i]));
            let k = provider.gram_at(&probe)?;
            let psi = match mahalanobis_psi_with(&mean, &k, config.ridge) {
                Ok(v) => v,
                Err(Error::SingularMatrix { .. }) => continue,
                Err(e) => return Err(e),
            };
            if best.is_none_or(|(_, b)| psi > b) {
                best = Some((c, psi));
            }
        }
        let Some((c, psi)) = best else {
            if step == 0 {
                return Err(Error::invalid("no admissible candidate for the first selection step"));
            }
            break;
        };
        if let Some(&prev) = trace.last() {
            if psi - prev <= config.rel_tol * prev.abs() {
                break;
            }
        }
        chosen.push(c);
        trace.push(psi);
    }
    SelectionResult::new(grid, chosen, trace, delta)
}

/// Runs the selection on a dataset according to the covariance and mean
/// modes of `config`.
pub fn select_from_dataset(dataset: &LabeledDataset, config: &SelectionConfig) -> Result<SelectionResult> {
    let grid = dataset.grid();
    let mean_diff = match &config.mean {
        MeanMode::Known(m) => m.clone(),
        MeanMode::Estimated => class_moments(dataset)?.m_hat,
    };
    match &config.covariance {
        CovarianceMode::Empirical => {
            let provider = MatrixProvider::new(pooled_cov_full(dataset)?);
            greedy_select(grid, &mean_diff, &provider, config)
        }
        CovarianceMode::Oracle(kernel) => {
            // Tabulating once keeps the scan to submatrix copies.
            let provider = MatrixProvider::new(gram_on_grid(kernel, grid)?);
            greedy_select(grid, &mean_diff, &provider, config)
        }
    }
}
