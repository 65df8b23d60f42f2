//! Univariate Gaussian log-score and Hyvärinen score, per-step delta
//! scores, cumulative prequential delta paths and the cutoff decision rule.
//!
//! Score orientation: smaller is better. Deltas are `S(x, Q) - S(x, P)`,
//! so a positive delta favors model `P`. Keep this in mind when reading
//! decisions: `Delta > cutoff` selects `P`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GaussianPredictive, ProcessModel, Series};

/// Log-score of observing `x` under the predictive:
/// `(1/2) [ln(2 pi s^2) + (x - m)^2 / s^2]`, the negative Gaussian
/// log-density.
pub fn log_score(x: f64, pred: &GaussianPredictive) -> f64 {
    let d = x - pred.mean;
    0.5 * ((2.0 * std::f64::consts::PI * pred.variance).ln() + d * d / pred.variance)
}

/// Hyvärinen score of observing `x` under the predictive:
/// `-2 / s^2 + (x - m)^2 / s^4`.
///
/// Equals `2 * (log-density)'' + ((log-density)')^2`, so it depends on the
/// predictive density only through its derivatives and is computable
/// without the normalizing constant.
pub fn hyvarinen_score(x: f64, pred: &GaussianPredictive) -> f64 {
    let d = x - pred.mean;
    -2.0 / pred.variance + d * d / (pred.variance * pred.variance)
}

/// Finite-difference evaluation of the Hyvärinen score from a log-density
/// alone: `2 * central second difference + (central first difference)^2`
/// with step `h`.
///
/// Serves as an implementation-independent cross-check of
/// [`hyvarinen_score`]; for Gaussian (quadratic) log-densities the central
/// differences are exact up to floating-point cancellation.
pub fn hyvarinen_fd_oracle<F: Fn(f64) -> f64>(x: f64, log_density: F, h: f64) -> f64 {
    // Work with the actually representable offsets around x and the exact
    // three-point formulas for (possibly) unequal steps; otherwise the
    // step asymmetry leaks first-derivative error into the second
    // difference.
    let x_plus = x + h;
    let x_minus = x - h;
    let h_plus = x_plus - x;
    let h_minus = x - x_minus;
    let f_plus = log_density(x_plus);
    let f_center = log_density(x);
    let f_minus = log_density(x_minus);
    let first = (f_plus - f_minus) / (h_plus + h_minus);
    let second = 2.0 * (h_minus * f_plus - (h_plus + h_minus) * f_center + h_plus * f_minus)
        / (h_plus * h_minus * (h_plus + h_minus));
    2.0 * second + first * first
}

/// Per-step delta log-score
/// `(1/2) [ln s_Q^2 - ln s_P^2 + (x - m_Q)^2 / s_Q^2 - (x - m_P)^2 / s_P^2]`.
///
/// Agrees with `log_score(x, q) - log_score(x, p)` up to rounding; the two
/// routes are kept separate so each can check the other.
pub fn delta_log_step(x: f64, pred_p: &GaussianPredictive, pred_q: &GaussianPredictive) -> f64 {
    let dp = x - pred_p.mean;
    let dq = x - pred_q.mean;
    0.5 * (pred_q.variance.ln() - pred_p.variance.ln() + dq * dq / pred_q.variance
        - dp * dp / pred_p.variance)
}

/// Per-step delta Hyvärinen score
/// `2 / s_P^2 - 2 / s_Q^2 + (x - m_Q)^2 / s_Q^4 - (x - m_P)^2 / s_P^4`.
pub fn delta_hyv_step(x: f64, pred_p: &GaussianPredictive, pred_q: &GaussianPredictive) -> f64 {
    let dp = x - pred_p.mean;
    let dq = x - pred_q.mean;
    2.0 / pred_p.variance - 2.0 / pred_q.variance
        + dq * dq / (pred_q.variance * pred_q.variance)
        - dp * dp / (pred_p.variance * pred_p.variance)
}

/// Per-step and cumulative delta scores for one series under both rules.
///
/// Scoring is prequential: observation `i` is scored against each model's
/// one-step predictive given observation `i - 1`, for `i = 2..n`. Both
/// per-step lists have length `n - 1` and are aligned to observation
/// indices `2..n` (1-based).
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaPath {
    pub per_step_log: Vec<f64>,
    pub per_step_hyv: Vec<f64>,
    pub cumulative_log: f64,
    pub cumulative_hyv: f64,
}

/// Cumulative prequential delta scores of `model_q` against `model_p` over
/// a series, under both rules.
///
/// The first observation is never scored: it has no predecessor to
/// condition on, so scoring starts at the second observation.
pub fn cumulative_delta(
    series: &Series,
    model_p: &ProcessModel,
    model_q: &ProcessModel,
) -> Result<DeltaPath> {
    model_p.validate()?;
    model_q.validate()?;
    let x = series.values();
    if x.len() < 2 {
        return Err(Error::SeriesTooShort { len: x.len() });
    }
    let mut per_step_log = Vec::with_capacity(x.len() - 1);
    let mut per_step_hyv = Vec::with_capacity(x.len() - 1);
    for i in 1..x.len() {
        let pred_p = model_p.conditional_predictive(x[i - 1]);
        let pred_q = model_q.conditional_predictive(x[i - 1]);
        per_step_log.push(delta_log_step(x[i], &pred_p, &pred_q));
        per_step_hyv.push(delta_hyv_step(x[i], &pred_p, &pred_q));
    }
    let cumulative_log = per_step_log.iter().sum();
    let cumulative_hyv = per_step_hyv.iter().sum();
    Ok(DeltaPath {
        per_step_log,
        per_step_hyv,
        cumulative_log,
        cumulative_hyv,
    })
}

/// Outcome of comparing a cumulative delta score against a cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    /// Delta above the cutoff: the reference model P has the lower score.
    #[serde(rename = "P")]
    SelectP,
    /// Delta below the cutoff: the alternative model Q has the lower score.
    #[serde(rename = "Q")]
    SelectQ,
    /// Delta exactly at the cutoff.
    #[serde(rename = "TIE")]
    Tie,
}

impl std::fmt::Display for Decision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Decision::SelectP => write!(f, "P"),
            Decision::SelectQ => write!(f, "Q"),
            Decision::Tie => write!(f, "TIE"),
        }
    }
}

/// Selects the model with the lower cumulative score. A cutoff of 0 is the
/// plain sign rule; nonzero cutoffs shift the decision boundary.
pub fn classify(cumulative: f64, cutoff: f64) -> Decision {
    if cumulative > cutoff {
        Decision::SelectP
    } else if cumulative < cutoff {
        Decision::SelectQ
    } else {
        Decision::Tie
    }
}
