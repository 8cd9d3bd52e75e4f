//! Exact samplers for the Gaussian processes of the benchmark, the trend
//! families used to build class means, and the model types of the
//! simulation catalog.
//!
//! Every curve is drawn from its own ChaCha stream keyed by
//! `(seed, experiment, run, role, index)`, so a dataset does not depend on
//! how generation is scheduled.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::{Curve, Grid, Label, LabeledDataset, PriorMode};
use crate::error::{Error, Result};

/// Integrated Haar wavelet ("peak" function)
/// `Φ_{m,k}(t) = ∫₀ᵗ √(2^{m−1}) [𝕀((2k−2)/2^m, (2k−1)/2^m) − 𝕀((2k−1)/2^m, 2k/2^m)]`.
///
/// `k` may be fractional (shifted peaks), as long as `1 ≤ k ≤ 2^{m−1}`.
pub fn peak(m: u32, k: f64, t: f64) -> f64 {
    let width = 1.0 / libm::pow(2.0, m as f64);
    let amp = libm::sqrt(libm::pow(2.0, m as f64 - 1.0));
    let a = (2.0 * k - 2.0) * width;
    let b = a + width;
    let c = b + width;
    amp * ((t.clamp(a, b) - a) - (t.clamp(b, c) - b))
}

/// Mean difference of the illustrative Brownian example:
/// `Φ_{1,1} − Φ_{2,1} + Φ_{2,2} − Φ_{3,2}`, with RKHS norm 2.
pub fn toy_mean(t: f64) -> f64 {
    peak(1, 1.0, t) - peak(2, 1.0, t) + peak(2, 2.0, t) - peak(3, 2.0, t)
}

/// Kinks of [`toy_mean`] other than the origin.
pub const TOY_KNOTS: [f64; 5] = [0.25, 0.375, 0.5, 0.75, 1.0];

/// Deterministic or random mean function.
#[derive(Debug, Clone, PartialEq)]
pub enum TrendSpec {
    Zero,
    /// `c·t`.
    Linear(f64),
    /// `θ·t` with `θ ~ N(0, sd²)` drawn once per curve.
    RandomSlope {
        sd: f64,
    },
    /// `coef · Φ_{m,k}(t)`.
    Peak {
        m: u32,
        k: f64,
        coef: f64,
    },
    /// `b·(t − t0)` for `t ≥ t0`, else 0.
    Hillside {
        t0: f64,
        b: f64,
    },
    Sum(Vec<TrendSpec>),
}

impl TrendSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            TrendSpec::Peak { m, k, coef } => {
                let max_k = libm::pow(2.0, (*m as f64) - 1.0);
                if *m < 1 || !(*k >= 1.0 && *k <= max_k) || !coef.is_finite() {
                    return Err(Error::invalid(format!("invalid peak function (m = {m}, k = {k})")));
                }
            }
            TrendSpec::RandomSlope { sd } if !(*sd >= 0.0 && sd.is_finite()) => {
                return Err(Error::invalid("random slope needs a finite nonnegative sd"));
            }
            TrendSpec::Linear(c) if !c.is_finite() => return Err(Error::invalid("linear trend must be finite")),
            TrendSpec::Hillside { t0, b } if !(t0.is_finite() && b.is_finite()) => {
                return Err(Error::invalid("hillside parameters must be finite"));
            }
            TrendSpec::Sum(parts) => {
                for p in parts {
                    p.validate()?;
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn is_random(&self) -> bool {
        match self {
            TrendSpec::RandomSlope { .. } => true,
            TrendSpec::Sum(parts) => parts.iter().any(TrendSpec::is_random),
            _ => false,
        }
    }

    /// Replaces every random slope by a drawn linear trend.
    pub fn realize<R: Rng + ?Sized>(&self, rng: &mut R) -> TrendSpec {
        match self {
            TrendSpec::RandomSlope { sd } => {
                let z: f64 = rng.sample(StandardNormal);
                TrendSpec::Linear(sd * z)
            }
            TrendSpec::Sum(parts) => TrendSpec::Sum(parts.iter().map(|p| p.realize(rng)).collect()),
            other => other.clone(),
        }
    }
}

/// Evaluates a deterministic trend; random slopes must be realized first.
pub fn trend_eval(spec: &TrendSpec, t: f64) -> Result<f64> {
    spec.validate()?;
    eval_unchecked(spec, t)
}

fn eval_unchecked(spec: &TrendSpec, t: f64) -> Result<f64> {
    Ok(match spec {
        TrendSpec::Zero => 0.0,
        TrendSpec::Linear(c) => c * t,
        TrendSpec::RandomSlope { .. } => {
            return Err(Error::invalid("random slope trend must be realized before evaluation"))
        }
        TrendSpec::Peak { m, k, coef } => coef * peak(*m, *k, t),
        TrendSpec::Hillside { t0, b } => {
            if t >= *t0 {
                b * (t - t0)
            } else {
                0.0
            }
        }
        TrendSpec::Sum(parts) => {
            let mut s = 0.0;
            for p in parts {
                s += eval_unchecked(p, t)?;
            }
            s
        }
    })
}

/// Zero-mean Gaussian process families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProcessKind {
    Brownian,
    /// `B(t) − (t/T)·B(T)` with `T` the last grid time.
    Bridge,
    OrnsteinUhlenbeck {
        theta: f64,
        sigma2: f64,
    },
    /// Brownian path convolved with a Gaussian weight of the given bandwidth,
    /// weights renormalized near the boundary.
    SmoothedBrownian {
        bandwidth: f64,
    },
}

impl ProcessKind {
    /// Bandwidth used for the "sB" smoothing level.
    pub const SB_BANDWIDTH: f64 = 0.05;
    /// Bandwidth used for the smoother "ssB" level.
    pub const SSB_BANDWIDTH: f64 = 0.10;

    pub fn validate(&self) -> Result<()> {
        match *self {
            ProcessKind::OrnsteinUhlenbeck { theta, sigma2 } if !(theta > 0.0 && sigma2 > 0.0) => {
                Err(Error::invalid("OU parameters must be positive"))
            }
            ProcessKind::SmoothedBrownian { bandwidth } if !(bandwidth > 0.0 && bandwidth.is_finite()) => {
                Err(Error::invalid("smoothing bandwidth must be positive"))
            }
            _ => Ok(()),
        }
    }
}

fn brownian_path<R: Rng + ?Sized>(grid: &Grid, rng: &mut R) -> Vec<f64> {
    let pts = grid.points();
    let mut out = Vec::with_capacity(pts.len());
    let mut prev_t = 0.0;
    let mut b = 0.0;
    for &t in pts {
        let dt = t - prev_t;
        if dt > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            b += libm::sqrt(dt) * z;
        }
        out.push(b);
        prev_t = t;
    }
    out
}

/// One exact draw of the process on the grid.
pub fn gen_process<R: Rng + ?Sized>(kind: ProcessKind, grid: &Grid, rng: &mut R) -> Result<Curve> {
    kind.validate()?;
    let pts = grid.points();
    let values = match kind {
        ProcessKind::Brownian => brownian_path(grid, rng),
        ProcessKind::Bridge => {
            let b = brownian_path(grid, rng);
            let t_end = grid.t_max();
            let b_end = b[b.len() - 1];
            pts.iter().zip(&b).map(|(&t, &x)| x - (t / t_end) * b_end).collect()
        }
        ProcessKind::OrnsteinUhlenbeck { theta, sigma2 } => {
            let sd = libm::sqrt(sigma2);
            let mut out = Vec::with_capacity(pts.len());
            let z: f64 = rng.sample(StandardNormal);
            let mut x = sd * z;
            out.push(x);
            for w in pts.windows(2) {
                let a = libm::exp(-theta * (w[1] - w[0]));
                let z: f64 = rng.sample(StandardNormal);
                x = a * x + libm::sqrt(sigma2 * (1.0 - a * a)) * z;
                out.push(x);
            }
            out
        }
        ProcessKind::SmoothedBrownian { bandwidth } => {
            let b = brownian_path(grid, rng);
            let inv = 1.0 / (2.0 * bandwidth * bandwidth);
            pts.iter()
                .map(|&ti| {
                    let (mut num, mut den) = (0.0, 0.0);
                    for (&tj, &bj) in pts.iter().zip(&b) {
                        let w = libm::exp(-(ti - tj) * (ti - tj) * inv);
                        num += w * bj;
                        den += w;
                    }
                    num / den
                })
                .collect()
        }
    };
    Curve::new(values)
}

/// One mixture component: a zero-mean process plus a trend.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub process: ProcessKind,
    pub trend: TrendSpec,
}

/// Distribution of one class (or of the marginal `X`): a finite mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassLaw {
    pub components: Vec<Component>,
}

impl ClassLaw {
    pub fn single(process: ProcessKind, trend: TrendSpec) -> Self {
        ClassLaw { components: vec![Component { weight: 1.0, process, trend }] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::invalid("class law needs at least one component"));
        }
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        if self.components.iter().any(|c| !(c.weight > 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("mixture weights must be positive and sum to 1"));
        }
        for c in &self.components {
            c.process.validate()?;
            c.trend.validate()?;
        }
        Ok(())
    }

    /// Draws a component index, then a curve from it.
    pub fn sample<R: Rng + ?Sized>(&self, grid: &Grid, rng: &mut R) -> Result<(usize, Curve)> {
        let which = if self.components.len() == 1 {
            0
        } else {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut pick = self.components.len() - 1;
            for (i, c) in self.components.iter().enumerate() {
                acc += c.weight;
                if u < acc {
                    pick = i;
                    break;
                }
            }
            pick
        };
        let comp = &self.components[which];
        let trend = comp.trend.realize(rng);
        let noise = gen_process(comp.process, grid, rng)?;
        let mut values = noise.into_inner();
        for (v, &t) in values.iter_mut().zip(grid.points()) {
            *v += eval_unchecked(&trend, t)?;
        }
        Ok((which, Curve::new(values)?))
    }
}

/// Elementwise transform applied to one catalog variable inside a link term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    Identity,
    Pow(i32),
    Abs,
    Recip,
    Log,
}

impl Transform {
    fn apply(self, x: f64) -> f64 {
        match self {
            Transform::Identity => x,
            Transform::Pow(k) => libm::pow(x, k as f64),
            Transform::Abs => x.abs(),
            Transform::Recip => 1.0 / x,
            Transform::Log => libm::log(x),
        }
    }
}

/// `coef · Π f(X_j)` over the listed factors (catalog variable numbers).
#[derive(Debug, Clone, PartialEq)]
pub struct LinkTerm {
    pub coef: f64,
    pub factors: Vec<(usize, Transform)>,
}

/// Logistic link argument `Ψ(x) = Σ terms`; `η(x) = 1/(1 + e^{−Ψ(x)})`.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub terms: Vec<LinkTerm>,
}

impl Link {
    pub fn eval(&self, x: &Curve, grid: &Grid) -> Result<f64> {
        let mut s = 0.0;
        for term in &self.terms {
            let mut v = term.coef;
            for &(j, f) in &term.factors {
                v *= f.apply(x[variable_index(j, grid)?]);
            }
            s += v;
        }
        if s.is_nan() {
            return Err(Error::NumericalFailure("logistic link evaluated to NaN".into()));
        }
        Ok(s)
    }

    pub fn variables(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.terms.iter().flat_map(|t| t.factors.iter().map(|f| f.0)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

pub fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-z))
}

/// Number of points of the reference grid on which catalog variables
/// `X_1, …, X_100` are defined.
pub const CATALOG_GRID_COUNT: usize = 100;

/// Time of catalog variable `X_j`: the j-th of 100 equispaced points on
/// [0, 1], i.e. `(j − 1)/99`.
pub fn variable_time(j: usize) -> Result<f64> {
    if j == 0 || j > CATALOG_GRID_COUNT {
        return Err(Error::invalid(format!("catalog variable X{j} outside X1..X100")));
    }
    Ok((j - 1) as f64 / (CATALOG_GRID_COUNT - 1) as f64)
}

/// Grid index closest to catalog variable `X_j` (exact on the reference grid).
pub fn variable_index(j: usize, grid: &Grid) -> Result<usize> {
    let t = variable_time(j)? * grid.t_max();
    Ok(grid.nearest_index(t))
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    /// Class-conditional laws with `P(Y = 1) = prior`.
    TwoClass { class0: ClassLaw, class1: ClassLaw },
    /// Marginal law of `X` and `Y | X ~ Bernoulli(logistic(Ψ(X)))`.
    Logistic { marginal: ClassLaw, link: Link },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub id: String,
    pub kind: ModelKind,
    pub prior: f64,
    /// Times on which the optimal rule depends (used to score selections).
    pub relevant: Vec<f64>,
    /// Times excluded from variable selection (degenerate variances).
    pub exclude: Vec<f64>,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.prior > 0.0 && self.prior < 1.0) {
            return Err(Error::invalid(format!("model {}: prior must lie in (0, 1)", self.id)));
        }
        match &self.kind {
            ModelKind::TwoClass { class0, class1 } => {
                class0.validate()?;
                class1.validate()?;
            }
            ModelKind::Logistic { marginal, link } => {
                marginal.validate()?;
                for j in link.variables() {
                    variable_time(j)?;
                }
            }
        }
        Ok(())
    }

    /// Grid indices admissible for selection (all but the excluded times).
    pub fn candidate_indices(&self, grid: &Grid) -> Vec<usize> {
        let excluded: Vec<usize> = self.exclude.iter().map(|&t| grid.nearest_index(t)).collect();
        (0..grid.len()).filter(|i| !excluded.contains(i)).collect()
    }

    /// Mean difference `m₁ − m₀` on the grid for two-class models without
    /// random trends.
    pub fn mean_difference(&self, grid: &Grid) -> Option<Vec<f64>> {
        let ModelKind::TwoClass { class0, class1 } = &self.kind else { return None };
        let mean = |law: &ClassLaw| -> Option<Vec<f64>> {
            let mut out = vec![0.0; grid.len()];
            for c in &law.components {
                if c.trend.is_random() {
                    // Zero-mean slope: contributes nothing to the mean.
                    continue;
                }
                for (o, &t) in out.iter_mut().zip(grid.points()) {
                    *o += c.weight * eval_unchecked(&c.trend, t).ok()?;
                }
            }
            Some(out)
        };
        let m0 = mean(class0)?;
        let m1 = mean(class1)?;
        Some(m1.iter().zip(&m0).map(|(a, b)| a - b).collect())
    }
}

/// The illustrative model: `P₀ = B`, `P₁ = B + toy_mean`, `p = ½`.
pub fn toy_model() -> ModelSpec {
    let trend = TrendSpec::Sum(vec![
        TrendSpec::Peak { m: 1, k: 1.0, coef: 1.0 },
        TrendSpec::Peak { m: 2, k: 1.0, coef: -1.0 },
        TrendSpec::Peak { m: 2, k: 2.0, coef: 1.0 },
        TrendSpec::Peak { m: 3, k: 2.0, coef: -1.0 },
    ]);
    ModelSpec {
        id: "TOY".into(),
        kind: ModelKind::TwoClass {
            class0: ClassLaw::single(ProcessKind::Brownian, TrendSpec::Zero),
            class1: ClassLaw::single(ProcessKind::Brownian, trend),
        },
        prior: 0.5,
        relevant: TOY_KNOTS.to_vec(),
        exclude: vec![0.0],
    }
}

/// Identifies an independent random stream per generated curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    /// Distinguishes experiments (model, sample size) sharing one seed.
    pub experiment: u64,
    pub run: u64,
    /// Distinguishes train / validation / test samples of one run.
    pub role: u32,
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        StreamKey { seed, experiment: 0, run: 0, role: 0 }
    }

    pub fn rng(&self, index: u32) -> ChaCha8Rng {
        let mut bytes = [0u8; 32];
        bytes[..8].copy_from_slice(&self.seed.to_le_bytes());
        bytes[8..16].copy_from_slice(&self.experiment.to_le_bytes());
        bytes[16..24].copy_from_slice(&self.run.to_le_bytes());
        bytes[24..28].copy_from_slice(&self.role.to_le_bytes());
        bytes[28..].copy_from_slice(&index.to_le_bytes());
        ChaCha8Rng::from_seed(bytes)
    }
}

/// One generated observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub curve: Curve,
    pub label: Label,
    /// Mixture component the curve was drawn from.
    pub component: usize,
}

pub fn sample_one<R: Rng + ?Sized>(model: &ModelSpec, grid: &Grid, rng: &mut R) -> Result<Sample> {
    match &model.kind {
        ModelKind::TwoClass { class0, class1 } => {
            let u: f64 = rng.random();
            let label = u8::from(u < model.prior);
            let law = if label == 1 { class1 } else { class0 };
            let (component, curve) = law.sample(grid, rng)?;
            Ok(Sample { curve, label, component })
        }
        ModelKind::Logistic { marginal, link } => {
            let (component, curve) = marginal.sample(grid, rng)?;
            let eta = logistic(link.eval(&curve, grid)?);
            let u: f64 = rng.random();
            Ok(Sample { curve, label: u8::from(u < eta), component })
        }
    }
}

/// `n` independent observations, curve `i` drawn from `key.rng(i)`.
pub fn gen_samples(model: &ModelSpec, n: usize, grid: &Grid, key: StreamKey) -> Result<Vec<Sample>> {
    model.validate()?;
    (0..n)
        .map(|i| {
            let index = u32::try_from(i).map_err(|_| Error::invalid("sample size too large"))?;
            sample_one(model, grid, &mut key.rng(index))
        })
        .collect()
}

pub fn gen_model_dataset(model: &ModelSpec, n: usize, grid: &Grid, key: StreamKey) -> Result<LabeledDataset> {
    let samples = gen_samples(model, n, grid, key)?;
    let (curves, labels) = samples.into_iter().map(|s| (s.curve, s.label)).unzip();
    LabeledDataset::new(grid.clone(), curves, labels, PriorMode::Fixed(model.prior))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::make_grid;

    #[test]
    fn peak_examples() {
        assert!((peak(1, 1.0, 0.5) - 0.5).abs() < 1e-15);
        assert!(peak(1, 1.0, 1.0).abs() < 1e-15);
        assert!((peak(2, 1.0, 0.25) - libm::sqrt(2.0) / 4.0).abs() < 1e-15);
        assert!((peak(2, 1.0, 0.25) - 0.35355).abs() < 1e-5);
        let h = TrendSpec::Hillside { t0: 0.5, b: 4.0 };
        assert_eq!(trend_eval(&h, 0.75).unwrap(), 1.0);
        assert_eq!(trend_eval(&h, 0.4).unwrap(), 0.0);
    }

    #[test]
    fn invalid_peaks() {
        assert!(trend_eval(&TrendSpec::Peak { m: 0, k: 1.0, coef: 1.0 }, 0.5).is_err());
        assert!(trend_eval(&TrendSpec::Peak { m: 2, k: 3.0, coef: 1.0 }, 0.5).is_err());
        assert!(trend_eval(&TrendSpec::Peak { m: 2, k: 1.25, coef: 1.0 }, 0.5).is_ok());
        assert!(trend_eval(&TrendSpec::RandomSlope { sd: 5.0 }, 0.5).is_err());
    }

    #[test]
    fn toy_mean_knot_values() {
        let s2 = libm::sqrt(2.0);
        assert!((toy_mean(0.25) - (0.25 - s2 / 4.0)).abs() < 1e-15);
        assert!((toy_mean(0.375) - (0.375 - s2 / 8.0 - 0.25)).abs() < 1e-15);
        assert!((toy_mean(0.5) - 0.5).abs() < 1e-15);
        assert!((toy_mean(0.75) - (0.25 + s2 / 4.0)).abs() < 1e-15);
        assert!(toy_mean(1.0).abs() < 1e-15);
    }

    #[test]
    fn bridge_pinned_at_end() {
        let g = make_grid(50, 0.0, 1.0).unwrap();
        for i in 0..20 {
            let c = gen_process(ProcessKind::Bridge, &g, &mut StreamKey::new(3).rng(i)).unwrap();
            assert_eq!(c[49], 0.0);
            assert_eq!(c[0], 0.0);
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let g = make_grid(10, 0.0, 1.0).unwrap();
        let k = StreamKey { seed: 9, experiment: 1, run: 2, role: 0 };
        let a = gen_process(ProcessKind::Brownian, &g, &mut k.rng(0)).unwrap();
        let b = gen_process(ProcessKind::Brownian, &g, &mut k.rng(0)).unwrap();
        let c = gen_process(ProcessKind::Brownian, &g, &mut k.rng(1)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn model_validation() {
        let mut m = toy_model();
        assert!(m.validate().is_ok());
        m.prior = 1.0;
        assert!(m.validate().is_err());
        let bad = ClassLaw {
            components: vec![
                Component { weight: 0.4, process: ProcessKind::Brownian, trend: TrendSpec::Zero },
                Component { weight: 0.4, process: ProcessKind::Brownian, trend: TrendSpec::Zero },
            ],
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn variable_mapping() {
        let g = make_grid(100, 0.0, 1.0).unwrap();
        assert_eq!(variable_index(1, &g).unwrap(), 0);
        assert_eq!(variable_index(100, &g).unwrap(), 99);
        assert_eq!(variable_index(65, &g).unwrap(), 64);
        assert!(variable_time(0).is_err());
        assert!(variable_time(101).is_err());
        let coarse = make_grid(12, 0.0, 1.0).unwrap();
        assert_eq!(variable_index(100, &coarse).unwrap(), 11);
    }

    #[test]
    fn toy_mean_difference() {
        let g = make_grid(9, 0.0, 1.0).unwrap();
        let m = toy_model().mean_difference(&g).unwrap();
        for (v, &t) in m.iter().zip(g.points()) {
            assert!((v - toy_mean(t)).abs() < 1e-15);
        }
    }
}
