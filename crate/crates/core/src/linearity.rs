//! Exact affine relationships between the per-step delta Hyvärinen score
//! and the per-step delta log-score, where they exist, and an empirical
//! measure of departure from affinity where they do not.
//!
//! For covariance-stationary Gaussian AR(1) models the conditional
//! variances are constant in time, so two closed-form cases arise:
//!
//! * equal conditional variances (any means): `dH = (2 / tau^2) * dL`;
//! * equal conditional means with different variances:
//!   `dH = a + b * dL` with `b = 2 (1/tau_Q^2 + 1/tau_P^2)` and
//!   `a = 2 (1/tau_P^2 - 1/tau_Q^2) - (1/tau_Q^2 + 1/tau_P^2) ln(tau_Q^2 / tau_P^2)`.
//!
//! The relation is per step; summing over a series of length `n` keeps the
//! slope and turns the intercept into `(n - 1) * a`.

use crate::error::{Error, Result};
use crate::model::ProcessModel;

/// Which structural case produced an affine relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AffineCase {
    /// Both models share the innovation variance; means may differ.
    EqualVariances,
    /// Both models share mean and AR coefficient; variances differ.
    EqualMeans,
    /// Identical models: both deltas are identically zero, the relation is
    /// vacuous and reported with the equal-variance coefficients.
    Degenerate,
}

impl std::fmt::Display for AffineCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AffineCase::EqualVariances => write!(f, "EqualVariances"),
            AffineCase::EqualMeans => write!(f, "EqualMeans"),
            AffineCase::Degenerate => write!(f, "Degenerate"),
        }
    }
}

/// Per-step relation `delta_hyv = intercept + slope * delta_log`.
///
/// The slope is positive in every derivable case, so thresholding the
/// delta log-score at a cutoff `c` is the same decision as thresholding
/// the delta Hyvärinen score at `intercept + slope * c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineRelation {
    pub intercept: f64,
    pub slope: f64,
    pub case: AffineCase,
}

/// Derives the exact per-step affine relation between the two delta scores
/// for a model pair, when one exists for every observation and history.
///
/// Model equality is parameter equality; the decision is made on the AR(1)
/// family where conditional means agree for all histories exactly when
/// mean and AR coefficient agree. Returns `None` when no exact relation is
/// claimed (means and variances both differ).
pub fn affine_relation(model_p: &ProcessModel, model_q: &ProcessModel) -> Option<AffineRelation> {
    let tau2_p = model_p.innovation_variance;
    let tau2_q = model_q.innovation_variance;
    if model_p == model_q {
        return Some(AffineRelation {
            intercept: 0.0,
            slope: 2.0 / tau2_p,
            case: AffineCase::Degenerate,
        });
    }
    if tau2_p == tau2_q {
        return Some(AffineRelation {
            intercept: 0.0,
            slope: 2.0 / tau2_p,
            case: AffineCase::EqualVariances,
        });
    }
    if model_p.mean == model_q.mean && model_p.phi == model_q.phi {
        let inv_p = 1.0 / tau2_p;
        let inv_q = 1.0 / tau2_q;
        let slope = 2.0 * (inv_q + inv_p);
        let intercept = 2.0 * (inv_p - inv_q) - (inv_q + inv_p) * (tau2_q / tau2_p).ln();
        return Some(AffineRelation {
            intercept,
            slope,
            case: AffineCase::EqualMeans,
        });
    }
    None
}

/// Least-squares affine fit of `delta_hyv` on `delta_log`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineFit {
    pub intercept: f64,
    pub slope: f64,
    pub max_abs_residual: f64,
}

/// Fits `y = intercept + slope * x` by least squares over
/// `(delta_log, delta_hyv)` pairs and reports the worst residual.
///
/// Needs at least 3 pairs and a spread in `delta_log`; all-equal abscissas
/// leave the slope undetermined.
pub fn least_squares_affine(pairs: &[(f64, f64)]) -> Result<AffineFit> {
    if pairs.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "affine fit needs at least 3 pairs, got {}",
            pairs.len()
        )));
    }
    if pairs.iter().all(|p| p.0 == pairs[0].0) {
        return Err(Error::DegenerateInput(
            "all delta_log values coincide; slope is undetermined".to_string(),
        ));
    }
    let n = pairs.len() as f64;
    let mean_x = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in pairs {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let max_abs_residual = pairs
        .iter()
        .map(|&(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(AffineFit {
        intercept,
        slope,
        max_abs_residual,
    })
}

/// Maximum absolute residual of the least-squares affine fit of
/// `delta_hyv` on `delta_log`: zero (up to rounding) exactly when the
/// pairs lie on one line.
pub fn empirical_affine_residual(pairs: &[(f64, f64)]) -> Result<f64> {
    Ok(least_squares_affine(pairs)?.max_abs_residual)
}
