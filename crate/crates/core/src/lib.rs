//! Variable selection and classification for functional data observed on a
//! common grid, built on the reproducing kernel Hilbert space view of
//! Gaussian discrimination.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! file system, threads or the command line lives in the `rkfda` crate.
//!
//! Module map:
//!
//! * [`data`]: grids, curves, labeled datasets, selection results.
//! * [`linalg`]: dense symmetric matrices, ridged Cholesky solves, Jacobi
//!   eigendecomposition.
//! * [`kernels`]: covariance functions, Gram matrices, Mahalanobis scores and
//!   discretized Karhunen–Loève systems.
//! * [`rkhs`]: finite-expansion means, the optimal discriminant, the closed
//!   form Bayes error and truncated approximating problems.
//! * [`estimate`]: class means and the pooled covariance estimator.
//! * [`select`]: greedy maximization of the Mahalanobis criterion (RK-VS).
//! * [`classify`]: RK-C, kNN and centroid classifiers.
//! * [`simulate`]: trends, Gaussian process samplers and the model catalog
//!   types.
#![no_std]

extern crate alloc;

#[cfg(any(feature = "std", test))]
extern crate std;

pub mod classify;
pub mod data;
pub mod error;
pub mod estimate;
pub mod kernels;
pub mod linalg;
pub mod rkhs;
pub mod select;
pub mod simulate;
pub mod special;

pub use classify::{error_rate, train_centroid, train_knn, train_rkc, TrainedClassifier};
pub use data::{class_prior, make_grid, Curve, Grid, Label, LabeledDataset, PriorMode, SelectionResult};
pub use error::{Error, Result};
pub use kernels::{discretized_eigen, gram, kernel_eval, mahalanobis_psi, EigenSystem, KernelSpec};
pub use linalg::{solve_spd, Matrix, RidgePolicy, SpdSolution};
pub use rkhs::{
    alphas_from_mean, bayes_discriminant, bayes_error, rkhs_norm_sq, truncation_sequence, FiniteExpansionMean,
    TruncatedProblem,
};
pub use select::{greedy_select, oracle_gram_provider, psi_hat, select_from_dataset, SelectionConfig};
