//! Classifiers on discretized curves: RK-C (Fisher's linear rule on selected
//! points), k nearest neighbours and the truncated centroid rule.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::data::{Curve, Grid, Label, LabeledDataset, PriorMode};
use crate::error::{Error, Result};
use crate::estimate::{class_moments, pooled_cov_at, pooled_cov_full, ClassMoments};
use crate::kernels::{discretized_eigen, gram, EigenSystem, KernelSpec};
use crate::linalg::{dot, solve_spd, Matrix, RidgePolicy};
use crate::rkhs::{label_from_score, log_prior_odds};
use crate::select::CovarianceMode;

/// Fisher's linear rule on a few grid points:
/// score `αᵀ(x − midpoint) − log((1 − p)/p)`, label 1 iff score > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RkcModel {
    grid: Grid,
    indices: Vec<usize>,
    alphas: Vec<f64>,
    midpoint: Vec<f64>,
    log_prior_odds: f64,
}

impl RkcModel {
    pub fn new(grid: Grid, indices: Vec<usize>, alphas: Vec<f64>, midpoint: Vec<f64>, p: f64) -> Result<Self> {
        let d = indices.len();
        if d == 0 || alphas.len() != d || midpoint.len() != d {
            return Err(Error::invalid("RK-C needs matching nonempty points, coefficients and midpoint"));
        }
        if indices.iter().any(|&i| i >= grid.len()) {
            return Err(Error::invalid("RK-C point outside the grid"));
        }
        let log_prior_odds = log_prior_odds(p)?;
        Ok(RkcModel { grid, indices, alphas, midpoint, log_prior_odds })
    }

    /// Fits `α = K⁻¹ m̂` at `indices`, where `cov` is the covariance matrix
    /// restricted to those indices.
    pub fn fit(
        grid: &Grid,
        moments: &ClassMoments,
        indices: &[usize],
        cov: &Matrix,
        p: f64,
        ridge: RidgePolicy,
    ) -> Result<Self> {
        let m = moments.mean_diff_at(indices);
        let alphas = match solve_spd(cov, &m, ridge) {
            Ok(s) => s.x,
            Err(Error::SingularMatrix { .. }) => {
                return Err(Error::TrainingFailure("covariance at the selected points is singular".into()))
            }
            Err(e) => return Err(e),
        };
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::TrainingFailure(format!("prior {p} leaves one class empty")));
        }
        Self::new(grid.clone(), indices.to_vec(), alphas, moments.midpoint_at(indices), p)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn points(&self) -> Vec<f64> {
        self.indices.iter().map(|&i| self.grid.point(i)).collect()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn midpoint(&self) -> &[f64] {
        &self.midpoint
    }

    pub fn log_prior_odds(&self) -> f64 {
        self.log_prior_odds
    }

    /// Prior `p` recovered from the stored log-odds.
    pub fn prior(&self) -> f64 {
        1.0 / (1.0 + libm::exp(self.log_prior_odds))
    }

    pub fn score(&self, x: &Curve) -> f64 {
        let s: f64 =
            self.indices.iter().zip(&self.alphas).zip(&self.midpoint).map(|((&i, a), mid)| a * (x[i] - mid)).sum();
        s - self.log_prior_odds
    }
}

/// k nearest neighbours under the quadrature L² distance `√Δt · ‖x − y‖₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    grid: Grid,
    curves: Vec<Vec<f64>>,
    labels: Vec<Label>,
    k: usize,
}

impl KnnModel {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Stored training curves and labels.
    pub fn training(&self) -> (&[Vec<f64>], &[Label]) {
        (&self.curves, &self.labels)
    }

    pub fn with_k(&self, k: usize) -> Result<Self> {
        check_k(k, self.curves.len())?;
        Ok(KnnModel { k, ..self.clone() })
    }

    /// Training indices sorted by distance to `x` (stable on ties).
    fn ranked(&self, x: &[f64]) -> Vec<(f64, usize)> {
        let w = libm::sqrt(self.grid.step());
        let mut d: Vec<(f64, usize)> = self
            .curves
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let ss: f64 = c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                (w * libm::sqrt(ss), i)
            })
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        d
    }

    /// Predictions for several neighbourhood sizes from one distance ranking.
    pub fn predict_for_ks(&self, x: &Curve, ks: &[usize]) -> Result<Vec<Label>> {
        check_len(&self.grid, x)?;
        let ranked = self.ranked(x.values());
        ks.iter()
            .map(|&k| {
                check_k(k, self.curves.len())?;
                let ones = ranked[..k].iter().filter(|(_, i)| self.labels[*i] == 1).count();
                Ok(u8::from(2 * ones > k))
            })
            .collect()
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} must lie in 1..={n}")));
    }
    Ok(())
}

/// Centroid rule on the projection `⟨x, ψ⟩_{L²}` with
/// `ψ = Σ_{j≤r} θ_j⁻¹ μ_j φ_j`: label 1 iff
/// `(⟨x,ψ⟩ − ⟨X̄₁,ψ⟩)² − (⟨x,ψ⟩ − ⟨X̄₀,ψ⟩)² < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidModel {
    grid: Grid,
    psi: Vec<f64>,
    proj0: f64,
    proj1: f64,
    r: usize,
}

impl CentroidModel {
    pub fn new(grid: Grid, psi: Vec<f64>, proj0: f64, proj1: f64, r: usize) -> Result<Self> {
        if psi.len() != grid.len() {
            return Err(Error::invalid("centroid direction must have one value per grid point"));
        }
        Ok(CentroidModel { grid, psi, proj0, proj1, r })
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn projections(&self) -> (f64, f64) {
        (self.proj0, self.proj1)
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn project(&self, x: &[f64]) -> f64 {
        dot(x, &self.psi) * self.grid.step()
    }
}

/// Eigenbasis of the pooled covariance plus the estimated class means,
/// shared by centroid classifiers of every truncation order.
#[derive(Debug, Clone)]
pub struct CentroidBasis {
    grid: Grid,
    eigen: EigenSystem,
    mu: Vec<f64>,
    m0: Vec<f64>,
    m1: Vec<f64>,
    usable: usize,
}

/// Eigenvalues at or below this fraction of the largest are not inverted.
pub const CENTROID_EIGEN_TOL: f64 = 1e-10;

impl CentroidBasis {
    pub fn fit(dataset: &LabeledDataset) -> Result<Self> {
        let moments = class_moments(dataset)?;
        let cov = pooled_cov_full(dataset)?;
        let grid = dataset.grid().clone();
        let eigen = discretized_eigen(&KernelSpec::empirical(cov, grid.clone())?, &grid)?;
        let top = eigen.eigenvalues.first().copied().unwrap_or(0.0);
        let usable = eigen.eigenvalues.iter().take_while(|&&t| t > CENTROID_EIGEN_TOL * top && t > 0.0).count();
        let mu = (0..usable).map(|j| eigen.coefficient(j, &moments.m_hat)).collect();
        Ok(CentroidBasis { grid, eigen, mu, m0: moments.m0_hat, m1: moments.m1_hat, usable })
    }

    pub fn usable(&self) -> usize {
        self.usable
    }

    pub fn eigen(&self) -> &EigenSystem {
        &self.eigen
    }

    pub fn classifier(&self, r: usize) -> Result<CentroidModel> {
        if r == 0 || r > self.usable {
            return Err(Error::invalid(format!(
                "truncation order {r} exceeds the usable spectrum ({} eigenpairs)",
                self.usable
            )));
        }
        let mut psi = vec![0.0; self.grid.len()];
        for j in 0..r {
            let c = self.mu[j] / self.eigen.eigenvalues[j];
            for (p, phi) in psi.iter_mut().zip(&self.eigen.eigenfunctions[j]) {
                *p += c * phi;
            }
        }
        let step = self.grid.step();
        let proj0 = dot(&self.m0, &psi) * step;
        let proj1 = dot(&self.m1, &psi) * step;
        CentroidModel::new(self.grid.clone(), psi, proj0, proj1, r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedClassifier {
    Rkc(RkcModel),
    Knn(KnnModel),
    Centroid(CentroidModel),
}

impl TrainedClassifier {
    pub fn grid(&self) -> &Grid {
        match self {
            TrainedClassifier::Rkc(m) => &m.grid,
            TrainedClassifier::Knn(m) => &m.grid,
            TrainedClassifier::Centroid(m) => &m.grid,
        }
    }

    /// Deterministic label for one curve on the training grid.
    pub fn classify(&self, x: &Curve) -> Result<Label> {
        check_len(self.grid(), x)?;
        Ok(match self {
            TrainedClassifier::Rkc(m) => label_from_score(m.score(x)),
            TrainedClassifier::Knn(m) => m.predict_for_ks(x, &[m.k])?[0],
            TrainedClassifier::Centroid(m) => {
                let p = m.project(x.values());
                let d1 = p - m.proj1;
                let d0 = p - m.proj0;
                u8::from(d1 * d1 - d0 * d0 < 0.0)
            }
        })
    }
}

fn check_len(grid: &Grid, x: &Curve) -> Result<()> {
    if x.len() != grid.len() {
        return Err(Error::invalid(format!("curve has {} values, classifier grid has {}", x.len(), grid.len())));
    }
    Ok(())
}

/// Fisher rule on the given grid indices using the pooled covariance.
pub fn train_rkc(dataset: &LabeledDataset, indices: &[usize], prior_mode: PriorMode) -> Result<TrainedClassifier> {
    train_rkc_with(dataset, indices, prior_mode, &CovarianceMode::Empirical, RidgePolicy::default())
}

/// Fisher rule with an explicit covariance source (pooled estimate or a
/// known kernel, the latter giving RK_B-C).
pub fn train_rkc_with(
    dataset: &LabeledDataset,
    indices: &[usize],
    prior_mode: PriorMode,
    covariance: &CovarianceMode,
    ridge: RidgePolicy,
) -> Result<TrainedClassifier> {
    dataset.require_both_classes(2)?;
    if indices.is_empty() {
        return Err(Error::invalid("RK-C needs at least one point"));
    }
    let moments = class_moments(dataset)?;
    let cov = match covariance {
        CovarianceMode::Empirical => pooled_cov_at(dataset, indices)?,
        CovarianceMode::Oracle(kernel) => {
            let pts: Vec<f64> = indices.iter().map(|&i| dataset.grid().point(i)).collect();
            gram(kernel, &pts)?
        }
    };
    let p = match prior_mode {
        PriorMode::Fixed(p) => p,
        PriorMode::Estimated => dataset.class_counts().1 as f64 / dataset.len() as f64,
    };
    Ok(TrainedClassifier::Rkc(RkcModel::fit(dataset.grid(), &moments, indices, &cov, p, ridge)?))
}

pub fn train_knn(dataset: &LabeledDataset, k: usize) -> Result<TrainedClassifier> {
    check_k(k, dataset.len())?;
    Ok(TrainedClassifier::Knn(KnnModel {
        grid: dataset.grid().clone(),
        curves: dataset.curves().iter().map(|c| c.values().to_vec()).collect(),
        labels: dataset.labels().to_vec(),
        k,
    }))
}

/// Centroid classifier truncated at `r` eigenpairs of the pooled covariance.
pub fn train_centroid(dataset: &LabeledDataset, r: usize) -> Result<TrainedClassifier> {
    dataset.require_both_classes(2)?;
    Ok(TrainedClassifier::Centroid(CentroidBasis::fit(dataset)?.classifier(r)?))
}

/// Fraction of misclassified test curves.
pub fn error_rate(classifier: &TrainedClassifier, test: &LabeledDataset) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::invalid("empty test set"));
    }
    if test.grid() != classifier.grid() {
        return Err(Error::invalid("test grid differs from the training grid"));
    }
    let mut wrong = 0usize;
    for (x, y) in test.iter() {
        if classifier.classify(x)? != y {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / test.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::make_grid;

    fn one_point(values: &[(f64, u8)]) -> LabeledDataset {
        let g = make_grid(2, 0.0, 1.0).unwrap();
        let curves = values.iter().map(|(v, _)| Curve::new(vec![*v, 0.0]).unwrap()).collect();
        LabeledDataset::new(g, curves, values.iter().map(|v| v.1).collect(), PriorMode::Fixed(0.5)).unwrap()
    }

    fn flat(g: &Grid, v: f64) -> Curve {
        Curve::new(vec![v; g.len()]).unwrap()
    }

    #[test]
    fn rkc_manual_model() {
        let g = make_grid(2, 0.0, 1.0).unwrap();
        let m = TrainedClassifier::Rkc(RkcModel::new(g.clone(), vec![0], vec![1.0], vec![0.5], 0.5).unwrap());
        assert_eq!(m.classify(&flat(&g, 0.9)).unwrap(), 1);
        assert_eq!(m.classify(&flat(&g, 0.5)).unwrap(), 0);
        assert!(m.classify(&Curve::new(vec![0.9]).unwrap()).is_err());
    }

    #[test]
    fn rkc_separable_and_swapped() {
        let d = one_point(&[(0.1, 0), (-0.1, 0), (0.0, 0), (10.1, 1), (9.9, 1), (10.0, 1)]);
        let c = train_rkc(&d, &[0], PriorMode::Fixed(0.5)).unwrap();
        let g = d.grid().clone();
        assert_eq!(c.classify(&Curve::new(vec![9.0, 0.0]).unwrap()).unwrap(), 1);
        assert_eq!(c.classify(&Curve::new(vec![1.0, 0.0]).unwrap()).unwrap(), 0);
        let swapped = LabeledDataset::new(
            g.clone(),
            d.curves().to_vec(),
            d.labels().iter().map(|l| 1 - l).collect(),
            PriorMode::Fixed(0.5),
        )
        .unwrap();
        let s = train_rkc(&swapped, &[0], PriorMode::Fixed(0.5)).unwrap();
        for v in [-3.0, 1.0, 4.0, 6.0, 9.0, 20.0] {
            let x = Curve::new(vec![v, 0.0]).unwrap();
            assert_eq!(c.classify(&x).unwrap(), 1 - s.classify(&x).unwrap());
        }
    }

    #[test]
    fn rkc_rejects_degenerate_training() {
        let d = one_point(&[(0.0, 0), (0.0, 0), (1.0, 1), (1.0, 1)]);
        assert!(matches!(train_rkc(&d, &[0], PriorMode::Fixed(0.5)), Err(Error::TrainingFailure(_))));
        let d = one_point(&[(0.0, 0), (0.1, 0), (1.0, 1), (1.1, 1)]);
        assert!(train_rkc(&d, &[0], PriorMode::Fixed(1.0)).is_err());
        let single = one_point(&[(0.0, 1), (0.1, 1)]);
        assert!(train_rkc(&single, &[0], PriorMode::Fixed(0.5)).is_err());
    }

    #[test]
    fn knn_nearest_neighbour() {
        let g = make_grid(3, 0.0, 1.0).unwrap();
        let d = LabeledDataset::new(g.clone(), vec![flat(&g, 0.0), flat(&g, 1.0)], vec![0, 1], PriorMode::Estimated)
            .unwrap();
        let c = train_knn(&d, 1).unwrap();
        assert_eq!(c.classify(&flat(&g, 0.9)).unwrap(), 1);
        assert_eq!(c.classify(&flat(&g, 0.2)).unwrap(), 0);
        assert!(train_knn(&d, 3).is_err());
        assert!(train_knn(&d, 0).is_err());
    }

    #[test]
    fn knn_full_neighbourhood_is_majority() {
        let g = make_grid(3, 0.0, 1.0).unwrap();
        let vals = [0.0, 5.0, 1.0, 7.0, -2.0];
        let labels = vec![1, 0, 1, 1, 0];
        let d =
            LabeledDataset::new(g.clone(), vals.iter().map(|&v| flat(&g, v)).collect(), labels, PriorMode::Estimated)
                .unwrap();
        let c = train_knn(&d, 5).unwrap();
        for v in [-100.0, 0.0, 3.3, 100.0] {
            assert_eq!(c.classify(&flat(&g, v)).unwrap(), 1);
        }
    }

    #[test]
    fn centroid_own_means() {
        let g = make_grid(4, 0.0, 1.0).unwrap();
        let rows = [
            ([0.0, 0.1, -0.2, 0.3], 0u8),
            ([0.2, -0.1, 0.1, 0.0], 0),
            ([-0.1, 0.3, 0.0, -0.2], 0),
            ([1.0, 1.2, 0.9, 1.4], 1),
            ([1.3, 0.8, 1.1, 0.9], 1),
            ([0.9, 1.1, 1.2, 1.0], 1),
        ];
        let d = LabeledDataset::new(
            g.clone(),
            rows.iter().map(|(v, _)| Curve::new(v.to_vec()).unwrap()).collect(),
            rows.iter().map(|r| r.1).collect(),
            PriorMode::Fixed(0.5),
        )
        .unwrap();
        let m = class_moments(&d).unwrap();
        let c = train_centroid(&d, 1).unwrap();
        assert_eq!(c.classify(&Curve::new(m.m1_hat.clone()).unwrap()).unwrap(), 1);
        assert_eq!(c.classify(&Curve::new(m.m0_hat.clone()).unwrap()).unwrap(), 0);
        assert!(train_centroid(&d, 50).is_err());
    }

    #[test]
    fn error_rate_examples() {
        let g = make_grid(2, 0.0, 1.0).unwrap();
        // Always predicts 1: huge positive score regardless of x.
        let always1 = TrainedClassifier::Rkc(RkcModel::new(g.clone(), vec![0], vec![0.0], vec![0.0], 0.999).unwrap());
        let test = |label: u8| {
            LabeledDataset::new(g.clone(), vec![flat(&g, 0.3); 4], vec![label; 4], PriorMode::Estimated).unwrap()
        };
        assert_eq!(error_rate(&always1, &test(1)).unwrap(), 0.0);
        assert_eq!(error_rate(&always1, &test(0)).unwrap(), 1.0);
        let other = make_grid(3, 0.0, 1.0).unwrap();
        let mismatched =
            LabeledDataset::new(other.clone(), vec![flat(&other, 0.0)], vec![0], PriorMode::Estimated).unwrap();
        assert!(error_rate(&always1, &mismatched).is_err());
    }
}
