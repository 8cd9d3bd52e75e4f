//! Repeated train / validation / test experiments.
//!
//! Run `r` of the experiment (model, n) draws its three samples from the
//! streams `(seed, key(model, n), r, role)` with roles 0 (train), 1
//! (validation) and 2 (test). Runs are executed on a worker pool and
//! aggregated in run order, so reports do not depend on the worker count.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use rkfda_core::classify::{CentroidBasis, TrainedClassifier};
use rkfda_core::kernels::KernelSpec;
use rkfda_core::linalg::RidgePolicy;
use rkfda_core::select::CovarianceMode;
use rkfda_core::simulate::{gen_model_dataset, ModelSpec, StreamKey};
use rkfda_core::{
    error_rate, make_grid, select_from_dataset, train_knn, Grid, LabeledDataset, PriorMode, SelectionConfig,
};

use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::io::{Histogram, ReportRow};
use crate::plan::{ExperimentPlan, Method};

pub const THREADS_ENV: &str = "RKFDA_THREADS";

/// Worker count: `requested` (or the machine's parallelism), capped by
/// `RKFDA_THREADS` when set.
pub fn worker_count(requested: Option<usize>) -> usize {
    let base = requested.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let cap = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&c| c > 0);
    cap.map_or(base, |c| base.min(c)).max(1)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))
}

/// Stable 64-bit key of an experiment (FNV-1a over the model id and `n`).
pub fn experiment_key(model: &str, n: usize) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in model.bytes().chain((n as u64).to_le_bytes()) {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Result of one method on one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodOutcome {
    pub accuracy: f64,
    /// Chosen d, k or r.
    pub param: f64,
}

#[derive(Debug, Clone)]
struct RunOutcome {
    methods: Vec<(Option<MethodOutcome>, Duration)>,
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub rows: Vec<ReportRow>,
    /// Accumulated training and evaluation time of each row's method.
    pub wall_times: Vec<Duration>,
    pub histograms: Vec<Histogram>,
}

pub struct Samples {
    pub train: LabeledDataset,
    pub validation: LabeledDataset,
    pub test: LabeledDataset,
}

pub fn run_samples(
    model: &ModelSpec,
    plan: &ExperimentPlan,
    grid: &Grid,
    n: usize,
    run: usize,
) -> rkfda_core::Result<Samples> {
    let key = |role| StreamKey { seed: plan.seed, experiment: experiment_key(&model.id, n), run: run as u64, role };
    let fixed = |d: LabeledDataset| d.with_prior_mode(PriorMode::Fixed(0.5));
    Ok(Samples {
        train: fixed(gen_model_dataset(model, n, grid, key(0))?),
        validation: fixed(gen_model_dataset(model, plan.validation_size, grid, key(1))?),
        test: fixed(gen_model_dataset(model, plan.test_size, grid, key(2))?),
    })
}

/// Smallest argmin (first index on ties).
fn first_min(errors: &[f64]) -> usize {
    let mut best = 0;
    for (i, &e) in errors.iter().enumerate() {
        if e < errors[best] {
            best = i;
        }
    }
    best
}

fn rk_method(s: &Samples, model: &ModelSpec, plan: &ExperimentPlan, oracle: bool) -> rkfda_core::Result<MethodOutcome> {
    let grid = s.train.grid();
    let candidates = model.candidate_indices(grid);
    let d_max = plan.d_max.min(candidates.len());
    let mut cfg = SelectionConfig::new(d_max).with_candidates(candidates);
    let covariance = if oracle { CovarianceMode::Oracle(KernelSpec::Brownian) } else { CovarianceMode::Empirical };
    cfg.covariance = covariance.clone();
    let sel = select_from_dataset(&s.train, &cfg)?;
    let fits = (1..=sel.len())
        .map(|d| {
            rkfda_core::classify::train_rkc_with(
                &s.train,
                sel.prefix(d),
                PriorMode::Fixed(0.5),
                &covariance,
                RidgePolicy::default(),
            )
        })
        .collect::<rkfda_core::Result<Vec<_>>>()?;
    let val = fits.iter().map(|c| error_rate(c, &s.validation)).collect::<rkfda_core::Result<Vec<_>>>()?;
    let best = first_min(&val);
    Ok(MethodOutcome { accuracy: 1.0 - error_rate(&fits[best], &s.test)?, param: (best + 1) as f64 })
}

fn knn_method(s: &Samples, plan: &ExperimentPlan) -> rkfda_core::Result<MethodOutcome> {
    let n = s.train.len();
    let ks: Vec<usize> = plan.knn_ks.iter().copied().filter(|&k| k <= n).collect();
    if ks.is_empty() {
        return Err(rkfda_core::Error::InvalidArgument("no neighbourhood size fits the sample".into()));
    }
    let TrainedClassifier::Knn(model) = train_knn(&s.train, ks[0])? else { unreachable!() };
    let mut wrong = vec![0usize; ks.len()];
    for (x, y) in s.validation.iter() {
        for (w, l) in wrong.iter_mut().zip(model.predict_for_ks(x, &ks)?) {
            *w += usize::from(l != y);
        }
    }
    let val: Vec<f64> = wrong.iter().map(|&w| w as f64).collect();
    let k = ks[first_min(&val)];
    let clf = TrainedClassifier::Knn(model.with_k(k)?);
    Ok(MethodOutcome { accuracy: 1.0 - error_rate(&clf, &s.test)?, param: k as f64 })
}

fn centroid_method(s: &Samples, plan: &ExperimentPlan) -> rkfda_core::Result<MethodOutcome> {
    s.train.require_both_classes(2)?;
    let basis = CentroidBasis::fit(&s.train)?;
    let r_max = plan.r_max.min(basis.usable());
    if r_max == 0 {
        return Err(rkfda_core::Error::TrainingFailure("pooled covariance has no usable eigenpairs".into()));
    }
    let fits = (1..=r_max)
        .map(|r| basis.classifier(r).map(TrainedClassifier::Centroid))
        .collect::<rkfda_core::Result<Vec<_>>>()?;
    let val = fits.iter().map(|c| error_rate(c, &s.validation)).collect::<rkfda_core::Result<Vec<_>>>()?;
    let best = first_min(&val);
    Ok(MethodOutcome { accuracy: 1.0 - error_rate(&fits[best], &s.test)?, param: (best + 1) as f64 })
}

pub fn run_method(
    method: Method,
    s: &Samples,
    model: &ModelSpec,
    plan: &ExperimentPlan,
) -> rkfda_core::Result<MethodOutcome> {
    match method {
        Method::RkC => rk_method(s, model, plan, false),
        Method::RkBC => rk_method(s, model, plan, true),
        Method::Knn => knn_method(s, plan),
        Method::Centroid => centroid_method(s, plan),
    }
}

fn one_run(model: &ModelSpec, plan: &ExperimentPlan, grid: &Grid, n: usize, run: usize) -> RunOutcome {
    let samples = run_samples(model, plan, grid, n, run);
    let methods = plan
        .methods
        .iter()
        .map(|&m| {
            let start = Instant::now();
            let out = samples.as_ref().ok().and_then(|s| run_method(m, s, model, plan).ok());
            (out, start.elapsed())
        })
        .collect();
    RunOutcome { methods }
}

fn summarize(model: &str, n: usize, method: Method, outcomes: &[Option<MethodOutcome>]) -> ReportRow {
    let ok: Vec<MethodOutcome> = outcomes.iter().flatten().copied().collect();
    let runs = ok.len();
    let (mean, sd, mean_d) = if runs == 0 {
        (f64::NAN, f64::NAN, None)
    } else {
        let mean = ok.iter().map(|o| o.accuracy).sum::<f64>() / runs as f64;
        let sd = if runs > 1 {
            (ok.iter().map(|o| (o.accuracy - mean).powi(2)).sum::<f64>() / (runs - 1) as f64).sqrt()
        } else {
            0.0
        };
        let mean_d = ok.iter().map(|o| o.param).sum::<f64>() / runs as f64;
        (mean, sd, Some(mean_d))
    };
    ReportRow {
        model: model.to_string(),
        n,
        method: method.name().to_string(),
        runs,
        mean_accuracy: mean,
        sd_accuracy: sd,
        mean_d,
        failed_runs: outcomes.len() - runs,
    }
}

/// Runs every (model, n) of the plan with `workers` threads.
pub fn run_experiment(plan: &ExperimentPlan, catalog: &Catalog, workers: usize) -> Result<RunReport> {
    plan.validate()?;
    let models = plan.models.iter().map(|id| catalog.get(id).cloned()).collect::<Result<Vec<_>>>()?;
    let grid = make_grid(plan.grid_count, 0.0, 1.0)?;
    let pool = pool(workers)?;
    let mut report = RunReport::default();
    for model in &models {
        for &n in &plan.sample_sizes {
            let outcomes: Vec<RunOutcome> =
                pool.install(|| (0..plan.runs).into_par_iter().map(|r| one_run(model, plan, &grid, n, r)).collect());
            for (j, &method) in plan.methods.iter().enumerate() {
                let per_run: Vec<Option<MethodOutcome>> = outcomes.iter().map(|o| o.methods[j].0).collect();
                report.rows.push(summarize(&model.id, n, method, &per_run));
                report.wall_times.push(outcomes.iter().map(|o| o.methods[j].1).sum());
            }
            if let Some(d) = plan.histogram_d {
                report.histograms.push(histogram_with(model, plan, &grid, n, d, &pool)?);
            }
        }
    }
    Ok(report)
}

/// Number of `relevant` times having a selected point within `tol_steps`
/// grid steps.
pub fn match_score(grid: &Grid, selected: &[usize], relevant: &[f64], tol_steps: f64) -> usize {
    let tol = tol_steps * grid.step() * (1.0 + 1e-9);
    relevant.iter().filter(|&&tau| selected.iter().any(|&i| (grid.point(i) - tau).abs() <= tol)).count()
}

/// Matching tolerance used by the recovery histograms, in grid steps.
pub const MATCH_STEPS: f64 = 2.0;

fn histogram_with(
    model: &ModelSpec,
    plan: &ExperimentPlan,
    grid: &Grid,
    n: usize,
    d: usize,
    pool: &rayon::ThreadPool,
) -> Result<Histogram> {
    let candidates = model.candidate_indices(grid);
    if d > candidates.len() {
        return Err(Error::Usage(format!("histogram d = {d} exceeds the {} candidate points", candidates.len())));
    }
    let cfg = SelectionConfig::new(d).with_candidates(candidates);
    let selections: Vec<Option<Vec<usize>>> = pool.install(|| {
        (0..plan.runs)
            .into_par_iter()
            .map(|r| {
                let key =
                    StreamKey { seed: plan.seed, experiment: experiment_key(&model.id, n), run: r as u64, role: 0 };
                let train = gen_model_dataset(model, n, grid, key).ok()?;
                select_from_dataset(&train, &cfg).ok().map(|s| s.indices().to_vec())
            })
            .collect()
    });
    let mut counts = vec![vec![0usize; grid.len()]; d];
    let mut match_counts = Vec::with_capacity(plan.runs);
    for sel in selections.iter().flatten() {
        for (rank, &i) in sel.iter().enumerate() {
            counts[rank][i] += 1;
        }
        match_counts.push(match_score(grid, sel, &model.relevant, MATCH_STEPS));
    }
    Ok(Histogram {
        model: model.id.clone(),
        n,
        runs: match_counts.len(),
        times: grid.points().to_vec(),
        counts,
        match_counts,
        relevant: model.relevant.len(),
    })
}

/// Selection frequencies of RK-VS over `plan.runs` training samples of size
/// `n` on the plan's grid (the same training streams as [`run_experiment`]).
pub fn variable_recovery_histogram(
    catalog: &Catalog,
    model_id: &str,
    n: usize,
    d: usize,
    plan: &ExperimentPlan,
    workers: usize,
) -> Result<Histogram> {
    let model = catalog.get(model_id)?;
    plan.validate()?;
    let grid = make_grid(plan.grid_count, 0.0, 1.0)?;
    histogram_with(model, plan, &grid, n, d, &pool(workers)?)
}
