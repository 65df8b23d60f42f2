//! Seeded, reproducible Monte Carlo engine: simulate replications from a
//! generating model, optionally contaminate one observation, score both
//! candidate models prequentially and cross-tabulate the decisions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ProcessModel, Series};
use crate::scoring::{classify, cumulative_delta, Decision};

/// Seed used by [`ExperimentConfig::paper_defaults`] when the caller does
/// not override it.
pub const DEFAULT_SEED: u64 = 1;

/// Labels the two competing models; also names the data-generating truth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelLabel {
    P,
    Q,
}

impl std::fmt::Display for ModelLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelLabel::P => write!(f, "P"),
            ModelLabel::Q => write!(f, "Q"),
        }
    }
}

/// Additive-outlier contamination of a single observation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Contamination {
    /// 1-based position of the contaminated observation.
    pub index: usize,
    /// Amount added to that observation.
    pub shift: f64,
}

/// Full specification of one Monte Carlo comparison run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub replications: usize,
    pub series_length: usize,
    pub model_p: ProcessModel,
    pub model_q: ProcessModel,
    /// Which model generates the data.
    pub generator: ModelLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contamination: Option<Contamination>,
    pub seed: u64,
    /// Decision cutoff for both rules; 0 is the plain lower-score rule.
    pub cutoff: f64,
}

impl ExperimentConfig {
    /// The reference comparison setup: 100 replications of length-101
    /// series generated from `P = AR(1)(mean 0, phi 0.5, variance 1)`,
    /// scored against `Q = AR(1)(mean 0, phi 0.1, variance 4)`, no
    /// contamination, cutoff 0 and seed [`DEFAULT_SEED`].
    pub fn paper_defaults() -> Self {
        Self {
            replications: 100,
            series_length: 101,
            model_p: ProcessModel {
                mean: 0.0,
                phi: 0.5,
                innovation_variance: 1.0,
            },
            model_q: ProcessModel {
                mean: 0.0,
                phi: 0.1,
                innovation_variance: 4.0,
            },
            generator: ModelLabel::P,
            contamination: None,
            seed: DEFAULT_SEED,
            cutoff: 0.0,
        }
    }

    pub fn generator_model(&self) -> &ProcessModel {
        match self.generator {
            ModelLabel::P => &self.model_p,
            ModelLabel::Q => &self.model_q,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidConfig(
                "replications must be at least 1".to_string(),
            ));
        }
        if self.series_length < 2 {
            return Err(Error::InvalidConfig(format!(
                "series_length must be at least 2, got {}",
                self.series_length
            )));
        }
        self.model_p
            .validate()
            .map_err(|e| Error::InvalidConfig(format!("model_p: {e}")))?;
        self.model_q
            .validate()
            .map_err(|e| Error::InvalidConfig(format!("model_q: {e}")))?;
        self.generator_model()
            .validate_stationary()
            .map_err(|e| Error::InvalidConfig(format!("generator: {e}")))?;
        if !self.cutoff.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "cutoff must be finite, got {}",
                self.cutoff
            )));
        }
        if let Some(c) = &self.contamination {
            if c.index == 0 || c.index > self.series_length {
                return Err(Error::InvalidConfig(format!(
                    "contamination index {} out of range (valid: 1..={}, 1-based)",
                    c.index, self.series_length
                )));
            }
            if !c.shift.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "contamination shift must be finite, got {}",
                    c.shift
                )));
            }
        }
        Ok(())
    }
}

/// Scores and decisions for one replication.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationResult {
    pub rep_id: usize,
    pub cumulative_log: f64,
    pub cumulative_hyv: f64,
    pub decision_log: Decision,
    pub decision_hyv: Decision,
}

/// A fresh seeded random stream (stream id 0).
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Counter-style stream derivation: every replication owns an independent
/// random stream keyed by (seed, rep_id), so the schedule of parallel
/// execution cannot affect any draw.
fn replication_rng(seed: u64, rep_id: usize) -> ChaCha8Rng {
    let mut rng = seeded_rng(seed);
    rng.set_stream(rep_id as u64);
    rng
}

/// The (possibly contaminated) series scored by replication `rep_id`.
///
/// Contamination is applied after simulation, so a contaminated experiment
/// shares its clean series with the uncontaminated experiment on the same
/// seed.
pub fn replication_series(config: &ExperimentConfig, rep_id: usize) -> Result<Series> {
    let mut rng = replication_rng(config.seed, rep_id);
    let clean = config
        .generator_model()
        .simulate_series(config.series_length, &mut rng)?;
    match &config.contamination {
        Some(c) => clean.contaminate(c.index, c.shift),
        None => Ok(clean),
    }
}

fn run_replication(config: &ExperimentConfig, rep_id: usize) -> Result<ReplicationResult> {
    let series = replication_series(config, rep_id)?;
    let path = cumulative_delta(&series, &config.model_p, &config.model_q)?;
    Ok(ReplicationResult {
        rep_id,
        cumulative_log: path.cumulative_log,
        cumulative_hyv: path.cumulative_hyv,
        decision_log: classify(path.cumulative_log, config.cutoff),
        decision_hyv: classify(path.cumulative_hyv, config.cutoff),
    })
}

/// Runs every replication and returns the results ordered by `rep_id`.
///
/// Replications execute in parallel on the ambient rayon pool; identical
/// configs produce identical results regardless of the degree of
/// parallelism.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ReplicationResult>> {
    config.validate()?;
    (0..config.replications)
        .into_par_iter()
        .map(|rep_id| {
            run_replication(config, rep_id).map_err(|e| Error::Replication {
                rep_id,
                source: Box::new(e),
            })
        })
        .collect()
}

/// How one replication's pair of decisions relates to the truth.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReplicationOutcome {
    BothCorrect,
    BothWrong,
    OnlyHyvWrong,
    OnlyLogWrong,
    AnyTie,
}

/// Classifies one replication against the data-generating truth. A tie
/// under either rule routes the replication to [`ReplicationOutcome::AnyTie`].
pub fn outcome(result: &ReplicationResult, truth: ModelLabel) -> ReplicationOutcome {
    let correct = match truth {
        ModelLabel::P => Decision::SelectP,
        ModelLabel::Q => Decision::SelectQ,
    };
    if result.decision_log == Decision::Tie || result.decision_hyv == Decision::Tie {
        return ReplicationOutcome::AnyTie;
    }
    match (result.decision_log == correct, result.decision_hyv == correct) {
        (true, true) => ReplicationOutcome::BothCorrect,
        (false, false) => ReplicationOutcome::BothWrong,
        (true, false) => ReplicationOutcome::OnlyHyvWrong,
        (false, true) => ReplicationOutcome::OnlyLogWrong,
    }
}

/// Cross-tabulation of both rules' decisions against the truth.
///
/// The five counts partition the replications, so they always sum to the
/// number of results.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationSummary {
    pub both_correct: usize,
    pub both_wrong: usize,
    pub only_hyv_wrong: usize,
    pub only_log_wrong: usize,
    pub any_tie: usize,
}

impl ClassificationSummary {
    pub fn total(&self) -> usize {
        self.both_correct + self.both_wrong + self.only_hyv_wrong + self.only_log_wrong
            + self.any_tie
    }
}

/// Tabulates decisions against the declared data-generating truth.
pub fn summarize(results: &[ReplicationResult], truth: ModelLabel) -> Result<ClassificationSummary> {
    if results.is_empty() {
        return Err(Error::EmptyResults);
    }
    let mut summary = ClassificationSummary::default();
    for r in results {
        match outcome(r, truth) {
            ReplicationOutcome::BothCorrect => summary.both_correct += 1,
            ReplicationOutcome::BothWrong => summary.both_wrong += 1,
            ReplicationOutcome::OnlyHyvWrong => summary.only_hyv_wrong += 1,
            ReplicationOutcome::OnlyLogWrong => summary.only_log_wrong += 1,
            ReplicationOutcome::AnyTie => summary.any_tie += 1,
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearity::{affine_relation, AffineCase};
    use rand::Rng;

    #[test]
    fn paper_defaults_match_the_reference_setup() {
        let c = ExperimentConfig::paper_defaults();
        assert_eq!(c.replications, 100);
        assert_eq!(c.series_length, 101);
        assert_eq!(c.model_p.phi, 0.5);
        assert_eq!(c.model_p.innovation_variance, 1.0);
        assert_eq!(c.model_q.phi, 0.1);
        assert_eq!(c.model_q.innovation_variance, 4.0);
        assert_eq!(c.generator, ModelLabel::P);
        assert!(c.contamination.is_none());
        assert_eq!(c.cutoff, 0.0);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn clean_runs_select_the_generating_model_everywhere() {
        let config = ExperimentConfig::paper_defaults();
        let results = run_experiment(&config).unwrap();
        assert_eq!(results.len(), 100);
        for r in &results {
            assert_eq!(r.decision_log, Decision::SelectP);
            assert_eq!(r.decision_hyv, Decision::SelectP);
        }
        let summary = summarize(&results, ModelLabel::P).unwrap();
        assert_eq!(summary.both_correct, 100);
        assert_eq!(summary.total(), 100);
    }

    #[test]
    fn contamination_makes_the_hyvarinen_rule_fail_more_often() {
        let mut config = ExperimentConfig::paper_defaults();
        config.contamination = Some(Contamination {
            index: 50,
            shift: 7.0,
        });
        let results = run_experiment(&config).unwrap();
        let summary = summarize(&results, ModelLabel::P).unwrap();
        assert_eq!(summary.total(), 100);
        assert!(
            summary.only_hyv_wrong > summary.only_log_wrong,
            "summary: {summary:?}"
        );
    }

    #[test]
    fn identical_models_tie_everywhere() {
        let mut config = ExperimentConfig::paper_defaults();
        config.model_q = config.model_p;
        config.replications = 1;
        let results = run_experiment(&config).unwrap();
        assert_eq!(results[0].cumulative_log, 0.0);
        assert_eq!(results[0].cumulative_hyv, 0.0);
        assert_eq!(results[0].decision_log, Decision::Tie);
        assert_eq!(results[0].decision_hyv, Decision::Tie);
        let summary = summarize(&results, ModelLabel::P).unwrap();
        assert_eq!(summary.any_tie, 1);
        assert_eq!(summary.total(), 1);
    }

    #[test]
    fn reruns_are_identical_and_scheduling_independent() {
        let mut config = ExperimentConfig::paper_defaults();
        config.contamination = Some(Contamination {
            index: 50,
            shift: 7.0,
        });
        let a = run_experiment(&config).unwrap();
        let b = run_experiment(&config).unwrap();
        assert_eq!(a, b);

        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = single.install(|| run_experiment(&config)).unwrap();
        assert_eq!(a, c);

        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .unwrap();
        let d = many.install(|| run_experiment(&config)).unwrap();
        assert_eq!(a, d);
    }

    #[test]
    fn zero_shift_contamination_equals_the_clean_experiment() {
        let clean = ExperimentConfig::paper_defaults();
        let mut zero = clean.clone();
        zero.contamination = Some(Contamination {
            index: 50,
            shift: 0.0,
        });
        assert_eq!(run_experiment(&clean).unwrap(), run_experiment(&zero).unwrap());
    }

    #[test]
    fn contaminated_run_shares_the_clean_series() {
        let mut config = ExperimentConfig::paper_defaults();
        let clean = replication_series(&config, 3).unwrap();
        config.contamination = Some(Contamination {
            index: 50,
            shift: 7.0,
        });
        let dirty = replication_series(&config, 3).unwrap();
        assert_eq!(dirty.values()[49], clean.values()[49] + 7.0);
        for i in 0..clean.len() {
            if i != 49 {
                assert_eq!(dirty.values()[i], clean.values()[i]);
            }
        }
    }

    #[test]
    fn summary_counts_partition_the_replications() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let mut config = ExperimentConfig::paper_defaults();
            config.replications = rng.random_range(1..40);
            config.series_length = rng.random_range(2..30);
            config.seed = rng.random();
            config.cutoff = rng.random_range(-5.0..5.0);
            if rng.random::<bool>() {
                config.contamination = Some(Contamination {
                    index: rng.random_range(1..=config.series_length),
                    shift: rng.random_range(-8.0..8.0),
                });
            }
            if rng.random::<bool>() {
                config.generator = ModelLabel::Q;
            }
            let results = run_experiment(&config).unwrap();
            let truth = config.generator;
            let summary = summarize(&results, truth).unwrap();
            assert_eq!(summary.total(), config.replications);
        }
    }

    #[test]
    fn summarize_cross_tabulates_decision_pairs() {
        let result = |dl: Decision, dh: Decision| ReplicationResult {
            rep_id: 0,
            cumulative_log: 0.0,
            cumulative_hyv: 0.0,
            decision_log: dl,
            decision_hyv: dh,
        };
        let mut results = Vec::new();
        results.extend(std::iter::repeat_n(
            result(Decision::SelectP, Decision::SelectP),
            50,
        ));
        results.extend(std::iter::repeat_n(
            result(Decision::SelectQ, Decision::SelectQ),
            10,
        ));
        results.extend(std::iter::repeat_n(
            result(Decision::SelectP, Decision::SelectQ),
            40,
        ));
        let summary = summarize(&results, ModelLabel::P).unwrap();
        assert_eq!(summary.both_correct, 50);
        assert_eq!(summary.both_wrong, 10);
        assert_eq!(summary.only_hyv_wrong, 40);
        assert_eq!(summary.only_log_wrong, 0);
        assert_eq!(summary.any_tie, 0);

        results.push(result(Decision::SelectP, Decision::Tie));
        let summary = summarize(&results, ModelLabel::P).unwrap();
        assert_eq!(summary.any_tie, 1);
        assert_eq!(summary.total(), 101);

        // same decisions judged against the other truth
        let summary = summarize(&results[..100], ModelLabel::Q).unwrap();
        assert_eq!(summary.both_correct, 10);
        assert_eq!(summary.both_wrong, 50);
        assert_eq!(summary.only_log_wrong, 40);
    }

    #[test]
    fn summarize_rejects_empty_results() {
        assert!(matches!(
            summarize(&[], ModelLabel::P),
            Err(Error::EmptyResults)
        ));
    }

    #[test]
    fn decisions_are_consistent_with_classify() {
        let mut config = ExperimentConfig::paper_defaults();
        config.contamination = Some(Contamination {
            index: 50,
            shift: 7.0,
        });
        config.cutoff = 2.5;
        for r in run_experiment(&config).unwrap() {
            assert_eq!(r.decision_log, classify(r.cumulative_log, config.cutoff));
            assert_eq!(r.decision_hyv, classify(r.cumulative_hyv, config.cutoff));
        }
    }

    #[test]
    fn iid_collapse_puts_cumulative_pairs_on_the_equal_means_line() {
        // Removing the serial correlation (phi = 0 in both models) makes
        // the two delta scores exactly affine even under contamination.
        let mut config = ExperimentConfig::paper_defaults();
        config.model_p.phi = 0.0;
        config.model_q.phi = 0.0;
        config.contamination = Some(Contamination {
            index: 50,
            shift: 7.0,
        });
        let rel = affine_relation(&config.model_p, &config.model_q).unwrap();
        assert_eq!(rel.case, AffineCase::EqualMeans);
        let steps = (config.series_length - 1) as f64;
        for r in run_experiment(&config).unwrap() {
            let predicted = steps * rel.intercept + rel.slope * r.cumulative_log;
            assert!(
                (r.cumulative_hyv - predicted).abs() < 1e-9,
                "rep {}: {} vs {}",
                r.rep_id,
                r.cumulative_hyv,
                predicted
            );
        }
    }

    #[test]
    fn config_validation_names_the_offending_field() {
        let mut config = ExperimentConfig::paper_defaults();
        config.replications = 0;
        assert!(config.validate().unwrap_err().to_string().contains("replications"));

        let mut config = ExperimentConfig::paper_defaults();
        config.series_length = 1;
        assert!(config.validate().unwrap_err().to_string().contains("series_length"));

        let mut config = ExperimentConfig::paper_defaults();
        config.contamination = Some(Contamination {
            index: 200,
            shift: 7.0,
        });
        let msg = config.validate().unwrap_err().to_string();
        assert!(msg.contains("contamination index 200"), "{msg}");

        let mut config = ExperimentConfig::paper_defaults();
        config.model_p.phi = 1.0; // generator must be stationary
        let msg = config.validate().unwrap_err().to_string();
        assert!(msg.contains("|phi| < 1"), "{msg}");

        let mut config = ExperimentConfig::paper_defaults();
        config.model_q.innovation_variance = -1.0;
        assert!(config.validate().unwrap_err().to_string().contains("model_q"));
    }

    #[test]
    fn nonstationary_scored_model_is_allowed() {
        // Only the generator needs |phi| < 1; scoring needs positive
        // variance only.
        let mut config = ExperimentConfig::paper_defaults();
        config.model_q.phi = 1.5;
        config.replications = 3;
        assert!(run_experiment(&config).is_ok());
    }
}
