//! Batch experiments and estimators.
//!
//! Every experiment draws only from
//! `RngStreamKey::for_experiment(master_seed, hypothesis, index)`, and the
//! aggregate is built from integer counts, so a summary does not depend on
//! how experiments are spread over worker threads.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};
use crate::receivers::{
    lrt_decide, statistic_model, Fidelity, ModeLevelSampler, ReceiverKind, StatisticSampler,
    ThresholdMode, TrialSource,
};
use crate::rng::RngStreamKey;
use crate::scenario::{Hypothesis, ScenarioParams};
use crate::sprt::{run_sprt, SprtConfig, SprtDecision};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectionMode {
    /// One transmission, threshold test.
    Lrt,
    /// Wald sequential test.
    Sprt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchConfig {
    pub scenario: ScenarioParams,
    pub receiver: ReceiverKind,
    pub fidelity: Fidelity,
    pub mode: DetectionMode,
    pub sprt: Option<SprtConfig>,
    /// Threshold for LRT mode. `Adaptive` needs mode-level fidelity.
    pub lrt_threshold: ThresholdMode,
    pub experiments_per_hypothesis: u64,
    pub master_seed: u64,
    pub worker_count: usize,
}

impl BatchConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.experiments_per_hypothesis == 0 {
            return Err(domain("experiments_per_hypothesis must be at least 1"));
        }
        if self.worker_count == 0 {
            return Err(domain("worker_count must be at least 1"));
        }
        match (self.mode, &self.sprt) {
            (DetectionMode::Sprt, None) => return Err(config("SPRT mode needs an SPRT configuration")),
            (DetectionMode::Sprt, Some(sprt)) => sprt.validate()?,
            (DetectionMode::Lrt, _) => {}
        }
        if self.fidelity == Fidelity::ModeLevel && self.receiver != ReceiverKind::QiHeteroHomodyne {
            return Err(config(format!(
                "mode-level sampling exists only for qi-hh, not {}",
                self.receiver
            )));
        }
        if self.mode == DetectionMode::Lrt
            && self.lrt_threshold == ThresholdMode::Adaptive
            && self.fidelity != Fidelity::ModeLevel
        {
            return Err(config("adaptive threshold needs mode-level fidelity"));
        }
        Ok(())
    }

    fn source(&self) -> Result<Box<dyn TrialSource>> {
        Ok(match self.fidelity {
            Fidelity::ModeLevel => Box::new(ModeLevelSampler::new(self.scenario)?),
            fidelity => Box::new(StatisticSampler {
                model: statistic_model(self.receiver, fidelity, &self.scenario)?,
            }),
        })
    }
}

/// Point estimate and 95% interval for an error probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub pr_e_hat: f64,
    /// `None` when no errors were observed.
    pub log10_pr_e: Option<f64>,
    pub ci95_log10_halfwidth: Option<f64>,
    /// Rule-of-three bound `3 / total`, reported only for zero errors.
    pub upper_bound_95: Option<f64>,
}

impl ErrorEstimate {
    /// Interval endpoints on the probability scale. With zero errors the
    /// interval is `[0, 3 / total]`.
    pub fn interval(&self) -> (f64, f64) {
        match (self.log10_pr_e, self.ci95_log10_halfwidth, self.upper_bound_95) {
            (Some(l), Some(h), _) => (10f64.powf(l - h), 10f64.powf(l + h)),
            (_, _, Some(upper)) => (0.0, upper),
            _ => (self.pr_e_hat, self.pr_e_hat),
        }
    }
}

/// Binomial error-rate estimate with a delta-method interval on `log10`:
/// half-width `1.96 log10(e) sqrt((1 - p) / (n p))`.
pub fn estimate_error_prob(errors: u64, total: u64) -> Result<ErrorEstimate> {
    if total == 0 {
        return Err(domain("total must be at least 1"));
    }
    if errors > total {
        return Err(domain(format!("{errors} errors out of {total} trials")));
    }
    let n = total as f64;
    if errors == 0 {
        return Ok(ErrorEstimate {
            pr_e_hat: 0.0,
            log10_pr_e: None,
            ci95_log10_halfwidth: None,
            upper_bound_95: Some(3.0 / n),
        });
    }
    let p = errors as f64 / n;
    Ok(ErrorEstimate {
        pr_e_hat: p,
        log10_pr_e: Some(p.log10()),
        ci95_log10_halfwidth: Some(1.96 * std::f64::consts::LOG10_E * ((1.0 - p) / (n * p)).sqrt()),
        upper_bound_95: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub mode: DetectionMode,
    pub experiments_per_hypothesis: u64,
    /// False alarms.
    pub errors_h0: u64,
    /// Misses.
    pub errors_h1: u64,
    pub pr_e_hat: f64,
    pub log10_pr_e: Option<f64>,
    pub ci95_log10_halfwidth: Option<f64>,
    pub pr_e_upper_bound: Option<f64>,
    pub mean_trials_h0: f64,
    pub mean_trials_h1: f64,
    /// trials used -> (H0 count, H1 count).
    pub trial_histogram: BTreeMap<u64, (u64, u64)>,
    pub truncated_count: u64,
    pub inconclusive_count: u64,
}

impl ExperimentSummary {
    pub fn error_estimate(&self) -> ErrorEstimate {
        ErrorEstimate {
            pr_e_hat: self.pr_e_hat,
            log10_pr_e: self.log10_pr_e,
            ci95_log10_halfwidth: self.ci95_log10_halfwidth,
            upper_bound_95: self.pr_e_upper_bound,
        }
    }

    /// Mean trials over both hypotheses.
    pub fn mean_trials(&self) -> f64 {
        0.5 * (self.mean_trials_h0 + self.mean_trials_h1)
    }
}

/// Result of one experiment.
#[derive(Debug, Clone, Copy)]
struct Run {
    error: bool,
    trials: u64,
    truncated: bool,
    inconclusive: bool,
}

/// Integer-only accumulator; merging is commutative and associative.
#[derive(Debug, Default, Clone)]
struct Tally {
    completed: u64,
    errors: u64,
    trials: u64,
    truncated: u64,
    inconclusive: u64,
    histogram: BTreeMap<u64, u64>,
    /// Lowest failing experiment index and its error.
    failure: Option<(u64, Error)>,
}

impl Tally {
    fn push(mut self, index: u64, run: Result<Run>) -> Self {
        match run {
            Ok(run) => {
                self.completed += 1;
                self.errors += run.error as u64;
                self.trials += run.trials;
                self.truncated += run.truncated as u64;
                self.inconclusive += run.inconclusive as u64;
                *self.histogram.entry(run.trials).or_default() += 1;
            }
            Err(e) => {
                if self.failure.as_ref().is_none_or(|(i, _)| index < *i) {
                    self.failure = Some((index, e));
                }
            }
        }
        self
    }

    fn merge(mut self, other: Self) -> Self {
        self.completed += other.completed;
        self.errors += other.errors;
        self.trials += other.trials;
        self.truncated += other.truncated;
        self.inconclusive += other.inconclusive;
        for (k, v) in other.histogram {
            *self.histogram.entry(k).or_default() += v;
        }
        self.failure = match (self.failure, other.failure) {
            (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
        self
    }
}

fn run_one(
    config: &BatchConfig,
    source: &dyn TrialSource,
    h: Hypothesis,
    index: u64,
) -> Result<Run> {
    let stream = RngStreamKey::for_experiment(config.master_seed, h, index);
    match config.mode {
        DetectionMode::Lrt => {
            let observation = source.draw(h, &mut stream.clone())?;
            let decided = lrt_decide(observation, &config.scenario, config.lrt_threshold)?;
            Ok(Run {
                error: decided != h,
                trials: 1,
                truncated: false,
                inconclusive: false,
            })
        }
        DetectionMode::Sprt => {
            let sprt = config
                .sprt
                .as_ref()
                .ok_or_else(config_missing_sprt)?;
            let out = run_sprt(source, h, sprt, stream)?;
            let inconclusive = out.decision == SprtDecision::Inconclusive;
            Ok(Run {
                // an undecided run counts against the detector
                error: out.decision != SprtDecision::from(h),
                trials: out.trials_used,
                truncated: out.truncated,
                inconclusive,
            })
        }
    }
}

fn config_missing_sprt() -> Error {
    config("SPRT mode needs an SPRT configuration")
}

fn tally_hypothesis(config: &BatchConfig, source: &dyn TrialSource, h: Hypothesis) -> Tally {
    (0..config.experiments_per_hypothesis)
        .into_par_iter()
        .fold(Tally::default, |tally, i| tally.push(i, run_one(config, source, h, i)))
        .reduce(Tally::default, Tally::merge)
}

/// Runs `experiments_per_hypothesis` experiments under each hypothesis.
pub fn run_batch(config: &BatchConfig) -> Result<ExperimentSummary> {
    config.validate()?;
    let source = config.source()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.worker_count)
        .build()
        .map_err(|e| Error::Partial {
            completed_h0: 0,
            completed_h1: 0,
            reason: format!("could not start worker pool: {e}"),
        })?;
    let (h0, h1) = pool.install(|| {
        (
            tally_hypothesis(config, source.as_ref(), Hypothesis::H0),
            tally_hypothesis(config, source.as_ref(), Hypothesis::H1),
        )
    });

    if let Some((index, err)) = h0.failure.clone().or_else(|| h1.failure.clone()) {
        return Err(Error::Partial {
            completed_h0: h0.completed,
            completed_h1: h1.completed,
            reason: format!("experiment {index}: {err}"),
        });
    }

    let n = config.experiments_per_hypothesis;
    let estimate = estimate_error_prob(h0.errors + h1.errors, 2 * n)?;
    let mut trial_histogram: BTreeMap<u64, (u64, u64)> = BTreeMap::new();
    for (&k, &c) in &h0.histogram {
        trial_histogram.entry(k).or_default().0 = c;
    }
    for (&k, &c) in &h1.histogram {
        trial_histogram.entry(k).or_default().1 = c;
    }
    Ok(ExperimentSummary {
        mode: config.mode,
        experiments_per_hypothesis: n,
        errors_h0: h0.errors,
        errors_h1: h1.errors,
        pr_e_hat: estimate.pr_e_hat,
        log10_pr_e: estimate.log10_pr_e,
        ci95_log10_halfwidth: estimate.ci95_log10_halfwidth,
        pr_e_upper_bound: estimate.upper_bound_95,
        mean_trials_h0: h0.trials as f64 / n as f64,
        mean_trials_h1: h1.trials as f64 / n as f64,
        trial_histogram,
        truncated_count: h0.truncated + h1.truncated,
        inconclusive_count: h0.inconclusive + h1.inconclusive,
    })
}

/// One row of the trial-count distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub trials: u64,
    pub prob_h0: f64,
    pub prob_h1: f64,
    pub count_h0: u64,
    pub count_h1: u64,
}

pub fn export_trial_histogram(summary: &ExperimentSummary) -> Result<Vec<HistogramRow>> {
    if summary.mode != DetectionMode::Sprt {
        return Err(config("trial-count distribution exists only for SPRT batches"));
    }
    let n = summary.experiments_per_hypothesis as f64;
    Ok(summary
        .trial_histogram
        .iter()
        .map(|(&trials, &(count_h0, count_h1))| HistogramRow {
            trials,
            prob_h0: count_h0 as f64 / n,
            prob_h1: count_h1 as f64 / n,
            count_h0,
            count_h1,
        })
        .collect())
}
