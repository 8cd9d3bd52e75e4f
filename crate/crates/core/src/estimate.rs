//! Sample moments used by RK-VS and RK-C.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::{Curve, Label, LabeledDataset};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Per-class pointwise means and their difference `m̂ = m̂₁ − m̂₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMoments {
    pub m0_hat: Vec<f64>,
    pub m1_hat: Vec<f64>,
    pub m_hat: Vec<f64>,
    pub n0: usize,
    pub n1: usize,
}

impl ClassMoments {
    pub fn mean_diff_at(&self, indices: &[usize]) -> Vec<f64> {
        indices.iter().map(|&i| self.m_hat[i]).collect()
    }

    /// `(m̂₀ + m̂₁)/2` at the given indices.
    pub fn midpoint_at(&self, indices: &[usize]) -> Vec<f64> {
        indices.iter().map(|&i| 0.5 * (self.m0_hat[i] + self.m1_hat[i])).collect()
    }
}

fn class_mean(dataset: &LabeledDataset, label: Label) -> (Vec<f64>, usize) {
    let mut sum = vec![0.0; dataset.grid().len()];
    let mut n = 0;
    for c in dataset.class_curves(label) {
        for (s, v) in sum.iter_mut().zip(c.values()) {
            *s += v;
        }
        n += 1;
    }
    if n > 0 {
        for s in &mut sum {
            *s /= n as f64;
        }
    }
    (sum, n)
}

pub fn class_moments(dataset: &LabeledDataset) -> Result<ClassMoments> {
    dataset.require_both_classes(1)?;
    let (m0_hat, n0) = class_mean(dataset, 0);
    let (m1_hat, n1) = class_mean(dataset, 1);
    let m_hat = m1_hat.iter().zip(&m0_hat).map(|(a, b)| a - b).collect();
    Ok(ClassMoments { m0_hat, m1_hat, m_hat, n0, n1 })
}

/// Pooled covariance at grid times `points`, see [`pooled_cov_at`].
pub fn pooled_cov(dataset: &LabeledDataset, points: &[f64]) -> Result<Matrix> {
    let idx = dataset.grid().indices_of(points)?;
    pooled_cov_at(dataset, &idx)
}

/// `K̂(i, j) = Σ_{r∈{0,1}} (1/n_r) Σ_ℓ (X_{r,ℓ}(t_i) − X̄_r(t_i))(X_{r,ℓ}(t_j) − X̄_r(t_j))`.
///
/// This is the sum of the two per-class covariance estimates (divisor `n_r`),
/// not their average.
pub fn pooled_cov_at(dataset: &LabeledDataset, indices: &[usize]) -> Result<Matrix> {
    dataset.require_both_classes(2)?;
    if indices.iter().any(|&i| i >= dataset.grid().len()) {
        return Err(Error::invalid("covariance index outside the grid"));
    }
    let d = indices.len();
    let mut k = Matrix::zeros(d);
    let mut centered = vec![0.0; d];
    for label in [0, 1] {
        let curves: Vec<&Curve> = dataset.class_curves(label).collect();
        let n = curves.len() as f64;
        let mut mean = vec![0.0; d];
        for c in &curves {
            for (a, &i) in indices.iter().enumerate() {
                mean[a] += c[i];
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut acc = Matrix::zeros(d);
        for c in &curves {
            for (a, &i) in indices.iter().enumerate() {
                centered[a] = c[i] - mean[a];
            }
            for a in 0..d {
                for b in 0..=a {
                    acc.set(a, b, acc.get(a, b) + centered[a] * centered[b]);
                }
            }
        }
        for a in 0..d {
            for b in 0..=a {
                let v = k.get(a, b) + acc.get(a, b) / n;
                k.set(a, b, v);
                k.set(b, a, v);
            }
        }
    }
    Ok(k)
}

/// Pooled covariance over every grid point.
pub fn pooled_cov_full(dataset: &LabeledDataset) -> Result<Matrix> {
    let all: Vec<usize> = (0..dataset.grid().len()).collect();
    pooled_cov_at(dataset, &all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{make_grid, PriorMode};

    fn ds(rows: &[(&[f64], u8)]) -> LabeledDataset {
        let g = make_grid(rows[0].0.len().max(2), 0.0, 1.0).unwrap();
        let curves = rows.iter().map(|(v, _)| Curve::new(v.to_vec()).unwrap()).collect();
        let labels = rows.iter().map(|(_, l)| *l).collect();
        LabeledDataset::new(g, curves, labels, PriorMode::Fixed(0.5)).unwrap()
    }

    #[test]
    fn moments_examples() {
        let m = class_moments(&ds(&[(&[0.0, 0.0], 0), (&[2.0, 4.0], 1)])).unwrap();
        assert_eq!(m.m_hat, vec![2.0, 4.0]);
        let m = class_moments(&ds(&[(&[1.0, 1.0], 1), (&[3.0, 3.0], 1), (&[0.0, 0.0], 0), (&[0.0, 0.0], 0)])).unwrap();
        assert_eq!(m.m_hat, vec![2.0, 2.0]);
        let m = class_moments(&ds(&[(&[1.0, 5.0], 1), (&[1.0, 5.0], 0)])).unwrap();
        assert_eq!(m.m_hat, vec![0.0, 0.0]);
        assert!(class_moments(&ds(&[(&[1.0, 5.0], 1), (&[1.0, 5.0], 1)])).is_err());
    }

    #[test]
    fn pooled_cov_examples() {
        let d = ds(&[(&[0.0, 0.0], 0), (&[2.0, 0.0], 0), (&[0.0, 0.0], 1), (&[2.0, 0.0], 1)]);
        assert_eq!(pooled_cov(&d, &[0.0]).unwrap().get(0, 0), 2.0);
        let d = ds(&[(&[0.0, 0.0], 0), (&[0.0, 0.0], 0), (&[0.0, 0.0], 1), (&[2.0, 0.0], 1)]);
        assert_eq!(pooled_cov(&d, &[0.0]).unwrap().get(0, 0), 1.0);
        let d = ds(&[(&[0.0, 0.0], 0), (&[0.0, 0.0], 1), (&[2.0, 0.0], 1)]);
        assert!(pooled_cov(&d, &[0.0]).is_err());
    }
}
