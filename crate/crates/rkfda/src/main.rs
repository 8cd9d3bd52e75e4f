use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rkfda::bench::{run_experiment, worker_count};
use rkfda::catalog::Catalog;
use rkfda::error::{Error, Result};
use rkfda::io::{format_dataset, format_histogram, format_report, format_selection, read_dataset};
use rkfda::model_file::{load_model, save_model};
use rkfda::plan::ExperimentPlan;
use rkfda_core::classify::train_rkc_with;
use rkfda_core::kernels::{discretized_eigen, KernelSpec};
use rkfda_core::linalg::RidgePolicy;
use rkfda_core::rkhs::{rkhs_norm_sq, FiniteExpansionMean};
use rkfda_core::select::CovarianceMode;
use rkfda_core::simulate::{gen_model_dataset, StreamKey};
use rkfda_core::{bayes_error, make_grid, select_from_dataset, train_centroid, train_knn, PriorMode, SelectionConfig};

#[derive(Parser)]
#[command(name = "rkfda", version, about = "Variable selection and classification for functional data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a labeled sample from a catalog model and write it as CSV.
    Simulate {
        #[arg(long)]
        model: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        grid: usize,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Catalog file replacing the built-in one.
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
    /// Greedy variable selection; prints `rank,t,psi`.
    Select {
        #[arg(long)]
        data: PathBuf,
        #[arg(long = "d-max")]
        d_max: usize,
        /// Minimum separation between selected times (default one grid step).
        #[arg(long)]
        delta: Option<f64>,
        /// `empirical`, `brownian`, `bridge` or `ou[:theta:sigma2]`.
        #[arg(long, default_value = "empirical")]
        kernel: String,
    },
    /// Train a classifier and save it as a model file.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// `rkc`, `knn` or `centroid`.
        #[arg(long, default_value = "rkc")]
        method: String,
        /// Comma-separated grid times for RK-C (selected with --d when omitted).
        #[arg(long, value_delimiter = ',')]
        points: Vec<f64>,
        /// Number of points selected for RK-C when --points is omitted.
        #[arg(long, default_value_t = 5)]
        d: usize,
        /// Covariance used by RK-C: `empirical` or an analytic kernel.
        #[arg(long, default_value = "empirical")]
        kernel: String,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 5)]
        r: usize,
        /// Prior P(Y = 1); estimated from the class counts when omitted.
        #[arg(long)]
        prior: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify every curve of a dataset; prints `row,label`.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Bayes error of a Gaussian mean-difference problem.
    Bayes {
        /// RKHS norm of the mean difference.
        #[arg(long, conflicts_with = "expansion")]
        norm: Option<f64>,
        /// Finite expansion `t1:a1,t2:a2,…` of the mean difference.
        #[arg(long)]
        expansion: Option<String>,
        #[arg(long, default_value = "brownian")]
        kernel: String,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
    },
    /// Discretized Karhunen–Loève system; prints `j,theta,<phi at each time>`.
    Eigen {
        #[arg(long, default_value = "brownian")]
        kernel: String,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long, default_value_t = 5)]
        count: usize,
    },
    /// Run an experiment plan and write the report (and histograms).
    Bench {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Directory receiving one histogram CSV per (model, n).
        #[arg(long = "hist-dir")]
        hist_dir: Option<PathBuf>,
        /// Worker threads (capped by RKFDA_THREADS).
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
}

fn parse_kernel(s: &str) -> Result<Option<KernelSpec>> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |x: &str| x.parse::<f64>().map_err(|_| Error::Usage(format!("bad kernel parameter {x:?}")));
    Ok(Some(match parts.as_slice() {
        ["empirical"] => return Ok(None),
        ["brownian"] => KernelSpec::Brownian,
        ["bridge"] => KernelSpec::brownian_bridge(),
        ["ou"] => KernelSpec::ornstein_uhlenbeck(),
        ["ou", a, b] => KernelSpec::OrnsteinUhlenbeck { theta: num(a)?, sigma2: num(b)? },
        _ => return Err(Error::Usage(format!("unknown kernel {s:?}"))),
    }))
}

fn load_catalog(path: &Option<PathBuf>) -> Result<Catalog> {
    path.as_deref().map_or_else(|| Ok(Catalog::builtin()), Catalog::load)
}

fn write_to(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

fn run(cmd: Command, out: &mut impl Write) -> Result<()> {
    match cmd {
        Command::Simulate { model, n, seed, grid, out: path, catalog } => {
            let catalog = load_catalog(&catalog)?;
            let spec = catalog.get(&model)?;
            let grid = make_grid(grid, 0.0, 1.0)?;
            let ds = gen_model_dataset(spec, n, &grid, StreamKey::new(seed))?;
            match path {
                Some(p) => write_to(&p, |b| format_dataset(b, &ds))?,
                None => format_dataset(&mut *out, &ds)?,
            }
        }
        Command::Select { data, d_max, delta, kernel } => {
            let ds = read_dataset(&data)?;
            let mut cfg = SelectionConfig::new(d_max);
            cfg.delta = delta;
            if let Some(k) = parse_kernel(&kernel)? {
                cfg = cfg.oracle(k);
            }
            let sel = select_from_dataset(&ds, &cfg)?;
            format_selection(&mut *out, &sel)?;
        }
        Command::Train { data, method, points, d, kernel, k, r, prior, out: path } => {
            let ds = read_dataset(&data)?;
            let prior_mode = prior.map_or(PriorMode::Estimated, PriorMode::Fixed);
            let clf = match method.as_str() {
                "rkc" => {
                    let cov = parse_kernel(&kernel)?.map_or(CovarianceMode::Empirical, CovarianceMode::Oracle);
                    let idx = if points.is_empty() {
                        let mut cfg = SelectionConfig::new(d);
                        cfg.covariance = cov.clone();
                        select_from_dataset(&ds, &cfg)?.indices().to_vec()
                    } else {
                        ds.grid().indices_of(&points)?
                    };
                    train_rkc_with(&ds, &idx, prior_mode, &cov, RidgePolicy::default())?
                }
                "knn" => train_knn(&ds, k)?,
                "centroid" => train_centroid(&ds, r)?,
                other => return Err(Error::Usage(format!("unknown method {other:?}"))),
            };
            save_model(&path, &clf)?;
            writeln!(out, "saved {method} model to {}", path.display())?;
        }
        Command::Predict { model, data } => {
            let clf = load_model(&model)?;
            let ds = read_dataset(&data)?;
            if ds.grid() != clf.grid() {
                return Err(Error::Usage("dataset grid differs from the model grid".into()));
            }
            writeln!(out, "row,label")?;
            for (i, (x, _)) in ds.iter().enumerate() {
                writeln!(out, "{},{}", i + 1, clf.classify(x)?)?;
            }
        }
        Command::Bayes { norm, expansion, kernel, p } => {
            let norm = match (norm, expansion) {
                (Some(v), None) => v,
                (None, Some(e)) => {
                    let kernel =
                        parse_kernel(&kernel)?.ok_or_else(|| Error::Usage("bayes needs an analytic kernel".into()))?;
                    let mut pts = Vec::new();
                    let mut alphas = Vec::new();
                    for item in e.split(',') {
                        let (t, a) =
                            item.split_once(':').ok_or_else(|| Error::Usage(format!("bad expansion term {item:?}")))?;
                        let num =
                            |x: &str| x.trim().parse::<f64>().map_err(|_| Error::Usage(format!("bad number {x:?}")));
                        pts.push(num(t)?);
                        alphas.push(num(a)?);
                    }
                    rkhs_norm_sq(&FiniteExpansionMean::new(pts, alphas, kernel)?)?.sqrt()
                }
                _ => return Err(Error::Usage("give exactly one of --norm or --expansion".into())),
            };
            writeln!(out, "{:.6}", bayes_error(norm, p)?)?;
        }
        Command::Eigen { kernel, grid, count } => {
            let kernel = parse_kernel(&kernel)?.ok_or_else(|| Error::Usage("eigen needs an analytic kernel".into()))?;
            let grid = make_grid(grid, 0.0, 1.0)?;
            let e = discretized_eigen(&kernel, &grid)?;
            let mut header = vec!["j".to_string(), "theta".to_string()];
            header.extend(grid.points().iter().map(|t| format!("t_{t}")));
            writeln!(out, "{}", header.join(","))?;
            for j in 0..count.min(e.len()) {
                let phi: Vec<String> = e.eigenfunctions[j].iter().map(f64::to_string).collect();
                writeln!(out, "{},{},{}", j + 1, e.eigenvalues[j], phi.join(","))?;
            }
        }
        Command::Bench { plan, out: path, hist_dir, workers, catalog } => {
            let plan = ExperimentPlan::load(&plan)?;
            let catalog = load_catalog(&catalog)?;
            let report = run_experiment(&plan, &catalog, worker_count(workers))?;
            write_to(&path, |b| format_report(b, &report.rows))?;
            if let Some(dir) = hist_dir {
                std::fs::create_dir_all(&dir)?;
                for h in &report.histograms {
                    write_to(&dir.join(format!("hist_{}_n{}.csv", h.model, h.n)), |b| format_histogram(b, h))?;
                }
            }
            for (row, t) in report.rows.iter().zip(&report.wall_times) {
                writeln!(
                    out,
                    "{} n={} {}: accuracy {:.4} (sd {:.4}, {} runs, {} failed, {:.2}s)",
                    row.model,
                    row.n,
                    row.method,
                    row.mean_accuracy,
                    row.sd_accuracy,
                    row.runs,
                    row.failed_runs,
                    t.as_secs_f64()
                )?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            if !usage {
                return ExitCode::SUCCESS;
            }
            println!("ERROR usage 2");
            return ExitCode::from(2);
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli.command, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("rkfda: {e}");
            let code = e.exit_code();
            let _ = writeln!(out, "ERROR {} {code}", e.code_name());
            ExitCode::from(code as u8)
        }
    }
}
