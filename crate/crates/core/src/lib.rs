//! Prequential comparison of Gaussian AR(1) forecasters under the
//! log-score and the Hyvärinen score.
//!
//! The library simulates stationary Gaussian AR(1) series, scores two
//! competing models observation by observation against their one-step
//! predictives, accumulates the per-step score differences, and decides
//! between the models by thresholding the cumulative delta at a cutoff
//! (0 picks the model with the lower prequential score; positive deltas
//! favor model `P`).
//!
//! On top of the scoring core sit:
//!
//! * closed-form affine relations between the two delta scores for the
//!   equal-variance and equal-mean model pairs ([`linearity`]);
//! * a seeded, parallel Monte Carlo engine for outlier-sensitivity
//!   experiments with additive contamination ([`experiment`]);
//! * CSV/JSON/SVG export of results and figures ([`export`]);
//! * a CLI wrapping all of the above ([`cli`]).

#![forbid(unsafe_code)]

pub mod cli;
pub mod error;
pub mod experiment;
pub mod export;
pub mod linearity;
pub mod model;
pub mod scoring;

pub use error::{Error, Result};
pub use experiment::{
    run_experiment, summarize, ClassificationSummary, Contamination, ExperimentConfig,
    ModelLabel, ReplicationResult,
};
pub use linearity::{affine_relation, empirical_affine_residual, AffineCase, AffineRelation};
pub use model::{GaussianPredictive, ProcessModel, Series};
pub use scoring::{
    classify, cumulative_delta, delta_hyv_step, delta_log_step, hyvarinen_fd_oracle,
    hyvarinen_score, log_score, Decision, DeltaPath,
};
