//! Stationary Gaussian AR(1) process models, their one-step conditional
//! predictives, series simulation and additive-outlier contamination.
//!
//! A process is `x_i = mean + phi * (x_{i-1} - mean) + eps_i` with iid
//! Gaussian innovations `eps_i ~ N(0, innovation_variance)`. `phi = 0`
//! recovers iid sequences with arbitrary mean.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A Gaussian AR(1) process with optional nonzero mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessModel {
    /// Process mean (data units).
    pub mean: f64,
    /// Autoregressive coefficient.
    pub phi: f64,
    /// Innovation variance (squared data units); must be positive.
    pub innovation_variance: f64,
}

impl ProcessModel {
    /// Builds a model, rejecting non-finite fields and non-positive
    /// innovation variance. Stationarity is not required here; it is
    /// checked separately by the operations that need it.
    pub fn new(mean: f64, phi: f64, innovation_variance: f64) -> Result<Self> {
        let model = Self {
            mean,
            phi,
            innovation_variance,
        };
        model.validate()?;
        Ok(model)
    }

    /// iid Gaussian sequence: AR(1) with `phi = 0`.
    pub fn iid(mean: f64, variance: f64) -> Result<Self> {
        Self::new(mean, 0.0, variance)
    }

    /// Checks the invariants every operation relies on: finite fields and
    /// `innovation_variance > 0`.
    pub fn validate(&self) -> Result<()> {
        if !self.mean.is_finite() {
            return Err(Error::InvalidModel(format!(
                "mean must be finite, got {}",
                self.mean
            )));
        }
        if !self.phi.is_finite() {
            return Err(Error::InvalidModel(format!(
                "phi must be finite, got {}",
                self.phi
            )));
        }
        let variance_ok =
            self.innovation_variance.is_finite() && self.innovation_variance > 0.0;
        if !variance_ok {
            return Err(Error::InvalidModel(format!(
                "innovation variance must be positive and finite, got {}",
                self.innovation_variance
            )));
        }
        Ok(())
    }

    /// Additionally requires `|phi| < 1`, the covariance-stationarity bound.
    pub fn validate_stationary(&self) -> Result<()> {
        self.validate()?;
        if self.phi.abs() >= 1.0 {
            return Err(Error::NonStationary { phi: self.phi });
        }
        Ok(())
    }

    /// One-step conditional predictive of the next observation given the
    /// previous one: `N(mean + phi * (previous - mean), innovation_variance)`.
    ///
    /// The conditional variance equals the innovation variance exactly, for
    /// every history. Assumes a validated model (positive variance).
    pub fn conditional_predictive(&self, previous_value: f64) -> GaussianPredictive {
        GaussianPredictive {
            mean: self.mean + self.phi * (previous_value - self.mean),
            variance: self.innovation_variance,
        }
    }

    /// Marginal (stationary) distribution of a single observation:
    /// `N(mean, innovation_variance / (1 - phi^2))`. Requires `|phi| < 1`.
    pub fn stationary_distribution(&self) -> Result<GaussianPredictive> {
        self.validate_stationary()?;
        Ok(GaussianPredictive {
            mean: self.mean,
            variance: self.innovation_variance / (1.0 - self.phi * self.phi),
        })
    }

    /// Simulates a series of length `n`: the first observation is drawn from
    /// the stationary distribution, each subsequent one from the conditional
    /// predictive given its predecessor, so the process is covariance
    /// stationary from the first step.
    ///
    /// The random stream is an explicit parameter; consuming the same seeded
    /// stream reproduces the series bit for bit.
    pub fn simulate_series<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Series> {
        if n < 2 {
            return Err(Error::SeriesTooShort { len: n });
        }
        let marginal = self.stationary_distribution()?;
        let mut values = Vec::with_capacity(n);
        values.push(marginal.sample(rng));
        for i in 1..n {
            let predictive = self.conditional_predictive(values[i - 1]);
            values.push(predictive.sample(rng));
        }
        Ok(Series::new(values))
    }
}

/// A one-step Gaussian predictive distribution `N(mean, variance)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianPredictive {
    pub mean: f64,
    /// Predictive variance (squared data units); must be positive.
    pub variance: f64,
}

impl GaussianPredictive {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        let ok = mean.is_finite() && variance.is_finite() && variance > 0.0;
        if !ok {
            return Err(Error::InvalidModel(format!(
                "predictive must have finite mean and positive variance, got N({mean}, {variance})"
            )));
        }
        Ok(Self { mean, variance })
    }

    pub fn standard_deviation(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Draws one value from the distribution.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.mean + self.standard_deviation() * z
    }

    /// Log-density at `x`.
    pub fn log_density(&self, x: f64) -> f64 {
        let d = x - self.mean;
        -0.5 * ((2.0 * std::f64::consts::PI * self.variance).ln() + d * d / self.variance)
    }
}

/// An observed (or simulated) univariate time series.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    values: Vec<f64>,
}

impl Series {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Returns a copy with `shift` added to the observation at `index`
    /// (1-based, matching the usual "k-th observation" phrasing); every
    /// other entry is unchanged. This models an additive outlier: the shift
    /// does not propagate through the process dynamics.
    pub fn contaminate(&self, index: usize, shift: f64) -> Result<Series> {
        if index == 0 || index > self.values.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.values.len(),
            });
        }
        let mut values = self.values.clone();
        values[index - 1] += shift;
        Ok(Series::new(values))
    }
}

impl From<Vec<f64>> for Series {
    fn from(values: Vec<f64>) -> Self {
        Series::new(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn conditional_predictive_follows_previous_value() {
        let m = ProcessModel::new(0.0, 0.5, 1.0).unwrap();
        let p = m.conditional_predictive(2.0);
        assert_eq!(p.mean, 1.0);
        assert_eq!(p.variance, 1.0);
    }

    #[test]
    fn conditional_predictive_iid_ignores_history() {
        let m = ProcessModel::new(0.0, 0.0, 4.0).unwrap();
        let p = m.conditional_predictive(-17.0);
        assert_eq!(p.mean, 0.0);
        assert_eq!(p.variance, 4.0);
    }

    #[test]
    fn conditional_predictive_with_nonzero_mean() {
        let m = ProcessModel::new(1.0, 0.1, 4.0).unwrap();
        let p = m.conditional_predictive(-3.0);
        assert!((p.mean - 0.6).abs() < 1e-15);
        assert_eq!(p.variance, 4.0);
    }

    #[test]
    fn conditional_variance_is_constant_in_the_history() {
        let mut r = rng(7);
        for _ in 0..1000 {
            let phi = r.random_range(-0.99..0.99);
            let var = r.random_range(0.01..100.0);
            let mean = r.random_range(-10.0..10.0);
            let m = ProcessModel::new(mean, phi, var).unwrap();
            let prev = r.random_range(-1e6..1e6);
            assert_eq!(m.conditional_predictive(prev).variance, var);
        }
    }

    #[test]
    fn stationary_distribution_iid_case() {
        let m = ProcessModel::new(0.0, 0.0, 1.0).unwrap();
        let s = m.stationary_distribution().unwrap();
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.variance, 1.0);
    }

    #[test]
    fn stationary_variance_matches_long_run_sample_variance() {
        // Oracle: sample variance of a long simulated path.
        let m = ProcessModel::new(0.0, 0.5, 1.0).unwrap();
        let s = m.stationary_distribution().unwrap();
        assert!((s.variance - 4.0 / 3.0).abs() < 1e-12);

        let series = m.simulate_series(1_000_000, &mut rng(11)).unwrap();
        let n = series.len() as f64;
        let mean = series.values().iter().sum::<f64>() / n;
        let var = series
            .values()
            .iter()
            .map(|x| (x - mean) * (x - mean))
            .sum::<f64>()
            / n;
        assert!(
            (var - s.variance).abs() / s.variance < 0.01,
            "sample variance {var} vs stationary {}",
            s.variance
        );
    }

    #[test]
    fn stationary_distribution_rejects_unit_root() {
        let m = ProcessModel {
            mean: 0.0,
            phi: 1.0,
            innovation_variance: 1.0,
        };
        assert!(matches!(
            m.stationary_distribution(),
            Err(Error::NonStationary { .. })
        ));
    }

    #[test]
    fn simulation_is_deterministic_for_a_fixed_seed() {
        let m = ProcessModel::new(0.0, 0.5, 1.0).unwrap();
        let a = m.simulate_series(101, &mut rng(42)).unwrap();
        let b = m.simulate_series(101, &mut rng(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn simulation_matches_iid_moments() {
        let m = ProcessModel::new(0.0, 0.0, 1.0).unwrap();
        let series = m.simulate_series(100_000, &mut rng(3)).unwrap();
        let n = series.len() as f64;
        let mean = series.values().iter().sum::<f64>() / n;
        let var = series
            .values()
            .iter()
            .map(|x| (x - mean) * (x - mean))
            .sum::<f64>()
            / n;
        assert!(mean.abs() < 0.02, "sample mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "sample variance {var}");
    }

    fn lag1_autocorrelation(values: &[f64]) -> f64 {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        let cov = values
            .windows(2)
            .map(|w| (w[0] - mean) * (w[1] - mean))
            .sum::<f64>()
            / n;
        cov / var
    }

    #[test]
    fn simulation_matches_ar1_autocorrelation() {
        let m = ProcessModel::new(0.0, 0.5, 1.0).unwrap();
        let series = m.simulate_series(100_000, &mut rng(5)).unwrap();
        let rho = lag1_autocorrelation(series.values());
        assert!((rho - 0.5).abs() < 0.01, "lag-1 autocorrelation {rho}");
    }

    #[test]
    fn iid_simulation_has_no_serial_correlation() {
        let m = ProcessModel::new(0.0, 0.0, 1.0).unwrap();
        let series = m.simulate_series(100_000, &mut rng(9)).unwrap();
        let rho = lag1_autocorrelation(series.values());
        assert!(rho.abs() < 0.01, "lag-1 autocorrelation {rho}");
    }

    #[test]
    fn simulation_rejects_nonstationary_models_and_short_lengths() {
        let m = ProcessModel {
            mean: 0.0,
            phi: 1.2,
            innovation_variance: 1.0,
        };
        assert!(matches!(
            m.simulate_series(10, &mut rng(1)),
            Err(Error::NonStationary { .. })
        ));
        let ok = ProcessModel::new(0.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            ok.simulate_series(1, &mut rng(1)),
            Err(Error::SeriesTooShort { len: 1 })
        ));
    }

    #[test]
    fn model_validation_rejects_bad_parameters() {
        assert!(ProcessModel::new(0.0, 0.5, 0.0).is_err());
        assert!(ProcessModel::new(0.0, 0.5, -1.0).is_err());
        assert!(ProcessModel::new(f64::NAN, 0.5, 1.0).is_err());
        assert!(ProcessModel::new(0.0, f64::INFINITY, 1.0).is_err());
        assert!(ProcessModel::new(0.0, 0.5, f64::NAN).is_err());
    }

    #[test]
    fn contaminate_shifts_exactly_one_entry() {
        let s = Series::new(vec![1.0, 2.0, 3.0]);
        let c = s.contaminate(2, 7.0).unwrap();
        assert_eq!(c.values(), &[1.0, 9.0, 3.0]);
        // original untouched
        assert_eq!(s.values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn contaminate_with_zero_shift_is_identity() {
        let s = Series::new(vec![0.25, -1.5, 3.75]);
        assert_eq!(s.contaminate(1, 0.0).unwrap(), s);
    }

    #[test]
    fn contaminate_rejects_out_of_range_indices() {
        let s = Series::new(vec![1.0, 2.0]);
        assert!(matches!(
            s.contaminate(0, 1.0),
            Err(Error::IndexOutOfRange { index: 0, len: 2 })
        ));
        assert!(matches!(
            s.contaminate(3, 1.0),
            Err(Error::IndexOutOfRange { index: 3, len: 2 })
        ));
    }

    #[test]
    fn contaminate_at_the_reference_position() {
        let m = ProcessModel::new(0.0, 0.5, 1.0).unwrap();
        let s = m.simulate_series(101, &mut rng(2)).unwrap();
        let c = s.contaminate(50, 7.0).unwrap();
        assert_eq!(c.values()[49], s.values()[49] + 7.0);
        for i in 0..101 {
            if i != 49 {
                assert_eq!(c.values()[i], s.values()[i]);
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        // Dyadic grid values keep every addition exact, so the round trip
        // must restore the series bit for bit.
        fn dyadic() -> impl Strategy<Value = f64> {
            (-(1i64 << 20)..(1i64 << 20)).prop_map(|k| k as f64 / 1024.0)
        }

        proptest! {
            #[test]
            fn contaminate_inverts_under_negated_shift(
                values in proptest::collection::vec(dyadic(), 1..50),
                shift in dyadic(),
                idx in 0usize..49,
            ) {
                let s = Series::new(values);
                let index = idx % s.len() + 1;
                let round_trip = s
                    .contaminate(index, shift)
                    .unwrap()
                    .contaminate(index, -shift)
                    .unwrap();
                prop_assert_eq!(round_trip, s);
            }

            #[test]
            fn contaminate_never_touches_other_entries(
                values in proptest::collection::vec(-1e12f64..1e12, 2..40),
                shift in -1e12f64..1e12,
                idx in 0usize..39,
            ) {
                let s = Series::new(values);
                let index = idx % s.len() + 1;
                let c = s.contaminate(index, shift).unwrap();
                for (i, (a, b)) in s.values().iter().zip(c.values()).enumerate() {
                    if i + 1 != index {
                        prop_assert_eq!(a.to_bits(), b.to_bits());
                    }
                }
            }
        }
    }
}
