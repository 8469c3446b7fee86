//! Single- and multi-fidelity Kriging surrogate models.
//!
//! The crate fits Gaussian-process (ordinary Kriging) surrogates to sparse,
//! expensive measurements, and recursive multi-fidelity stacks that fuse those
//! measurements with cheap physics-based approximations: each level above the
//! cheapest models the measured data as `rho * (level below) + discrepancy`,
//! with `rho` estimated by generalized least squares inside the concentrated
//! likelihood. PLS-projected kernel variants reduce the number of kernel
//! lengthscales in higher dimensions.
//!
//! Modules:
//!
//! * [`kernels`] — stationary correlation functions and the projected theta
//!   parameterization,
//! * [`pls`] — single-response partial least squares (NIPALS),
//! * [`gp`] — ordinary Kriging: concentrated likelihood, fitting, prediction,
//! * [`mfk`] — the recursive multi-fidelity stack and nesting checks,
//! * [`data`] — datasets, CSV ingestion, deterministic splits, low-fidelity
//!   generators and benchmarks,
//! * [`eval`] — RMSD, interval coverage, ranked model comparisons,
//! * [`serialize`] — self-describing JSON model documents.
//!
//! Fitting is deterministic: restarts start from a seeded low-discrepancy
//! sequence and the winner never depends on thread scheduling, so identical
//! data, configuration, and seed reproduce identical models bit-for-bit.

pub mod data;
pub mod error;
pub mod eval;
pub mod gp;
pub mod kernels;
pub mod mfk;
mod optimize;
pub mod pls;
pub mod serialize;

pub use data::{
    forrester, generate_lf, load_dataset, load_datasets_by_fidelity, range_grid, split_dataset,
    u3si2_analogue, white_lambda, write_dataset, write_datasets, Dataset, ForresterLevel,
    LfFormula, LfKind, RangePolicy, SplitSpec,
};
pub use error::{Error, Result};
pub use eval::{compare_models, interval_coverage, rmsd, EvalReport, ModelScore, Surrogate};
pub use gp::{
    fit_kriging, log_marginal_likelihood, optimize_hyperparameters, predict, Hyperparameters,
    KrigingModel, Prediction, SearchConfig,
};
pub use kernels::{kernel_eval, kernel_matrix, project_theta, KernelConfig, KernelFamily};
pub use mfk::{
    check_nesting, fit_mfk, predict_mfk, MfkModel, MfkVariant, NestingPolicy, NestingReport,
};
pub use pls::{pls_fit, PlsProjection};
pub use serialize::{
    load_model, model_from_json, model_to_json, save_kriging, save_mfk, save_model, AnyModel,
};
