//! Grids, curves and labeled samples.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Relative tolerance for the equispacing invariant of a [`Grid`].
pub const GRID_SPACING_TOL: f64 = 1e-9;

/// Common equispaced sampling times shared by every curve of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    /// Validates an explicit list of times: at least two, finite, nonnegative,
    /// strictly increasing and equispaced within [`GRID_SPACING_TOL`].
    pub fn new(points: Vec<f64>) -> Result<Self> {
        Self::check(&points, GRID_SPACING_TOL)?;
        Ok(Grid { points })
    }

    /// Accepts times that are equispaced up to `rel_tol` (e.g. values that went
    /// through a decimal text format) and snaps them onto the exact grid
    /// spanned by the first and last point.
    pub fn snapped(points: &[f64], rel_tol: f64) -> Result<Self> {
        Self::check(points, rel_tol)?;
        make_grid(points.len(), points[0], points[points.len() - 1])
    }

    fn check(points: &[f64], rel_tol: f64) -> Result<()> {
        if points.len() < 2 {
            return Err(Error::invalid("grid needs at least two points"));
        }
        if points.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("grid points must be finite"));
        }
        if points[0] < 0.0 {
            return Err(Error::invalid("grid points must lie in [0, T]"));
        }
        let step = points[1] - points[0];
        for (i, w) in points.windows(2).enumerate() {
            let d = w[1] - w[0];
            if d <= 0.0 {
                return Err(Error::invalid(format!("grid not strictly increasing at index {}", i + 1)));
            }
            if (d - step).abs() > rel_tol * step {
                return Err(Error::invalid(format!("grid not equispaced at index {}", i + 1)));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> f64 {
        self.points[index]
    }

    /// Spacing Δt, also the quadrature weight used for L² inner products.
    pub fn step(&self) -> f64 {
        (self.points[self.points.len() - 1] - self.points[0]) / (self.points.len() - 1) as f64
    }

    pub fn t_min(&self) -> f64 {
        self.points[0]
    }

    pub fn t_max(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Index of the grid point equal to `t` up to a tiny fraction of the step.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let i = self.nearest_index(t);
        ((self.points[i] - t).abs() <= 1e-9 * self.step()).then_some(i)
    }

    pub fn nearest_index(&self, t: f64) -> usize {
        let raw = libm::round((t - self.t_min()) / self.step());
        if raw <= 0.0 || raw.is_nan() {
            0
        } else {
            (raw as usize).min(self.points.len() - 1)
        }
    }

    /// Maps a list of times to grid indices, failing on any off-grid time.
    pub fn indices_of(&self, times: &[f64]) -> Result<Vec<usize>> {
        times
            .iter()
            .map(|&t| self.index_of(t).ok_or_else(|| Error::invalid(format!("time {t} is not a grid point"))))
            .collect()
    }
}

/// Equispaced grid with `count` points from `t_min` to `t_max` inclusive.
pub fn make_grid(count: usize, t_min: f64, t_max: f64) -> Result<Grid> {
    if !t_min.is_finite() || !t_max.is_finite() {
        return Err(Error::invalid("grid bounds must be finite"));
    }
    if count < 2 {
        return Err(Error::invalid("grid needs at least two points"));
    }
    if t_min >= t_max {
        return Err(Error::invalid("grid requires t_min < t_max"));
    }
    if t_min < 0.0 {
        return Err(Error::invalid("grid points must lie in [0, T]"));
    }
    let step = (t_max - t_min) / (count - 1) as f64;
    let mut points: Vec<f64> = (0..count).map(|i| t_min + step * i as f64).collect();
    points[count - 1] = t_max;
    Ok(Grid { points })
}

/// One discretized trajectory: a value per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve(Vec<f64>);

impl Curve {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("curve value at index {i} is not finite")));
        }
        Ok(Curve(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Values at the given grid indices.
    pub fn at(&self, indices: &[usize]) -> Vec<f64> {
        indices.iter().map(|&i| self.0[i]).collect()
    }
}

impl core::ops::Index<usize> for Curve {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Class label, always 0 or 1.
pub type Label = u8;

/// How the prior `p = P(Y = 1)` is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorMode {
    Fixed(f64),
    Estimated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    grid: Grid,
    curves: Vec<Curve>,
    labels: Vec<Label>,
    prior_mode: PriorMode,
}

impl LabeledDataset {
    pub fn new(grid: Grid, curves: Vec<Curve>, labels: Vec<Label>, prior_mode: PriorMode) -> Result<Self> {
        if curves.len() != labels.len() {
            return Err(Error::invalid(format!("{} curves but {} labels", curves.len(), labels.len())));
        }
        if let Some(i) = curves.iter().position(|c| c.len() != grid.len()) {
            return Err(Error::invalid(format!("curve {i} has {} values, grid has {}", curves[i].len(), grid.len())));
        }
        if let Some(i) = labels.iter().position(|&l| l > 1) {
            return Err(Error::invalid(format!("label {} at row {i} is not 0 or 1", labels[i])));
        }
        if let PriorMode::Fixed(p) = prior_mode {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid("fixed prior must lie in [0, 1]"));
            }
        }
        Ok(LabeledDataset { grid, curves, labels, prior_mode })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn prior_mode(&self) -> PriorMode {
        self.prior_mode
    }

    pub fn with_prior_mode(mut self, prior_mode: PriorMode) -> Self {
        self.prior_mode = prior_mode;
        self
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    /// `(n0, n1)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let n1 = self.labels.iter().filter(|&&l| l == 1).count();
        (self.labels.len() - n1, n1)
    }

    /// Curves of one class, in dataset order.
    pub fn class_curves(&self, label: Label) -> impl Iterator<Item = &Curve> {
        self.curves.iter().zip(&self.labels).filter(move |(_, &l)| l == label).map(|(c, _)| c)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Curve, Label)> {
        self.curves.iter().zip(self.labels.iter().copied())
    }

    /// Fails unless each class has at least `min_per_class` members.
    pub fn require_both_classes(&self, min_per_class: usize) -> Result<(usize, usize)> {
        let (n0, n1) = self.class_counts();
        if n0 < min_per_class || n1 < min_per_class {
            return Err(Error::invalid(format!(
                "need at least {min_per_class} curves per class, have n0 = {n0}, n1 = {n1}"
            )));
        }
        Ok((n0, n1))
    }
}

/// `p = P(Y = 1)`: the configured value in fixed mode, `n1 / n` otherwise.
pub fn class_prior(dataset: &LabeledDataset) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::invalid("class prior of an empty dataset"));
    }
    Ok(match dataset.prior_mode {
        PriorMode::Fixed(p) => p,
        PriorMode::Estimated => dataset.class_counts().1 as f64 / dataset.len() as f64,
    })
}

/// Ordered output of the greedy selection.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    indices: Vec<usize>,
    points: Vec<f64>,
    psi_trace: Vec<f64>,
}

impl SelectionResult {
    /// Checks distinctness, `delta` separation and a nonnegative,
    /// nondecreasing trace (up to `1e-9` relative rounding).
    pub fn new(grid: &Grid, indices: Vec<usize>, psi_trace: Vec<f64>, delta: f64) -> Result<Self> {
        if indices.len() != psi_trace.len() {
            return Err(Error::invalid("one psi value per selected point is required"));
        }
        if indices.iter().any(|&i| i >= grid.len()) {
            return Err(Error::invalid("selected index outside the grid"));
        }
        let points: Vec<f64> = indices.iter().map(|&i| grid.point(i)).collect();
        let slack = 1e-9 * grid.step();
        for (a, &s) in points.iter().enumerate() {
            for &t in &points[a + 1..] {
                if (s - t).abs() + slack < delta || s == t {
                    return Err(Error::invalid(format!("selected points {s} and {t} closer than delta")));
                }
            }
        }
        let mut prev = 0.0_f64;
        for &psi in &psi_trace {
            if !(psi >= -1e-12) || psi + 1e-9 * prev.abs().max(1e-300) < prev {
                return Err(Error::NumericalFailure(format!("psi trace not nondecreasing ({prev} then {psi})")));
            }
            prev = prev.max(psi);
        }
        Ok(SelectionResult { indices, points, psi_trace })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn psi_trace(&self) -> &[f64] {
        &self.psi_trace
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// The first `d` selected indices (greedy prefix).
    pub fn prefix(&self, d: usize) -> &[usize] {
        &self.indices[..d.min(self.indices.len())]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn make_grid_examples() {
        let g = make_grid(3, 0.0, 1.0).unwrap();
        assert_eq!(g.points(), &[0.0, 0.5, 1.0]);
        let g = make_grid(100, 0.0, 1.0).unwrap();
        assert_eq!(g.len(), 100);
        assert!((g.step() - 1.0 / 99.0).abs() < 1e-15);
        let g = make_grid(2, 0.0, 2.0).unwrap();
        assert_eq!(g.points(), &[0.0, 2.0]);
    }

    #[test]
    fn make_grid_rejects_bad_input() {
        assert!(make_grid(1, 0.0, 1.0).is_err());
        assert!(make_grid(5, 1.0, 1.0).is_err());
        assert!(make_grid(5, 0.0, f64::NAN).is_err());
        assert!(make_grid(5, f64::NEG_INFINITY, 1.0).is_err());
    }

    #[test]
    fn grid_spacing_uniform() {
        let g = make_grid(1000, 0.0, 3.7).unwrap();
        let d1 = g.point(1) - g.point(0);
        for w in g.points().windows(2) {
            assert!(((w[1] - w[0]) - d1).abs() <= 1e-9 * d1);
        }
    }

    #[test]
    fn grid_validation_and_snapping() {
        assert!(Grid::new(vec![0.0, 0.5, 0.4]).is_err());
        assert!(Grid::new(vec![0.0, 0.1, 0.3]).is_err());
        let g = Grid::snapped(&[0.0, 0.333333, 0.666667, 1.0], 1e-5).unwrap();
        assert_eq!(g, make_grid(4, 0.0, 1.0).unwrap());
        assert_eq!(g.index_of(1.0 / 3.0), Some(1));
        assert_eq!(g.index_of(0.5), None);
        assert_eq!(g.nearest_index(0.5), 2);
    }

    fn dataset(labels: Vec<u8>, prior: PriorMode) -> LabeledDataset {
        let grid = make_grid(2, 0.0, 1.0).unwrap();
        let curves = labels.iter().map(|_| Curve::new(vec![0.0, 1.0]).unwrap()).collect();
        LabeledDataset::new(grid, curves, labels, prior).unwrap()
    }

    #[test]
    fn class_prior_examples() {
        assert_eq!(class_prior(&dataset(vec![0, 1, 1, 1], PriorMode::Estimated)).unwrap(), 0.75);
        assert_eq!(class_prior(&dataset(vec![0, 1, 1], PriorMode::Fixed(0.5))).unwrap(), 0.5);
        assert_eq!(class_prior(&dataset(vec![0, 0], PriorMode::Estimated)).unwrap(), 0.0);
        assert!(class_prior(&dataset(vec![], PriorMode::Estimated)).is_err());
    }

    #[test]
    fn dataset_rejects_bad_labels_and_arity() {
        let grid = make_grid(2, 0.0, 1.0).unwrap();
        let c = Curve::new(vec![0.0, 1.0]).unwrap();
        assert!(LabeledDataset::new(grid.clone(), vec![c.clone()], vec![2], PriorMode::Estimated).is_err());
        assert!(LabeledDataset::new(grid.clone(), vec![c.clone()], vec![], PriorMode::Estimated).is_err());
        let short = Curve::new(vec![0.0]).unwrap();
        assert!(LabeledDataset::new(grid, vec![short], vec![0], PriorMode::Estimated).is_err());
        assert!(Curve::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn selection_result_checks() {
        let g = make_grid(5, 0.0, 1.0).unwrap();
        assert!(SelectionResult::new(&g, vec![4, 2], vec![1.0, 2.0], 0.25).is_ok());
        assert!(SelectionResult::new(&g, vec![4, 3], vec![1.0, 2.0], 0.5).is_err());
        assert!(SelectionResult::new(&g, vec![4, 4], vec![1.0, 2.0], 0.0).is_err());
        assert!(SelectionResult::new(&g, vec![4, 2], vec![2.0, 1.0], 0.25).is_err());
    }
}
