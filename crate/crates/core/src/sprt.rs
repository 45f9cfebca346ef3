//! Wald sequential probability-ratio test.
//!
//! The test accumulates the log-likelihood ratio of successive
//! transmissions and stops as soon as it leaves `(ln B, ln A)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::receivers::{ConditionalGaussianModel, TrialSource};
use crate::rng::RngStreamKey;
use crate::scenario::Hypothesis;

/// What to do when the trial cap is reached without a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruncationRule {
    /// Decide H1 iff the accumulated log-likelihood ratio is non-negative.
    ForceByLlrSign,
    /// Report no decision.
    ReportInconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SprtConfig {
    pub alpha: f64,
    pub beta: f64,
    /// Upper threshold on the likelihood ratio (declare H1).
    pub threshold_a: f64,
    /// Lower threshold on the likelihood ratio (declare H0).
    pub threshold_b: f64,
    pub max_trials: u64,
    pub truncation_rule: TruncationRule,
}

/// Wald's thresholds `A = (1 - beta) / alpha` and `B = beta / (1 - alpha)`.
pub fn wald_thresholds(alpha: f64, beta: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0) {
        return Err(domain(format!(
            "alpha and beta must lie in (0, 1), got ({alpha}, {beta})"
        )));
    }
    if alpha + beta >= 1.0 {
        return Err(domain(format!(
            "alpha + beta must be below 1, got {}",
            alpha + beta
        )));
    }
    Ok(((1.0 - beta) / alpha, beta / (1.0 - alpha)))
}

/// Trial cap used when none is given: `max(1000, 100 <K>)`, or 1000 when the
/// predicted average is not finite.
pub fn default_max_trials(predicted_trials: f64) -> u64 {
    if predicted_trials.is_finite() {
        (100.0 * predicted_trials).ceil().max(1000.0) as u64
    } else {
        1000
    }
}

impl SprtConfig {
    pub fn new(alpha: f64, beta: f64, max_trials: u64, truncation_rule: TruncationRule) -> Result<Self> {
        let (threshold_a, threshold_b) = wald_thresholds(alpha, beta)?;
        let config = Self {
            alpha,
            beta,
            threshold_a,
            threshold_b,
            max_trials,
            truncation_rule,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0 && self.beta > 0.0 && self.beta < 1.0) {
            return Err(domain("alpha and beta must lie in (0, 1)"));
        }
        if !(self.threshold_b < 1.0 && 1.0 < self.threshold_a) {
            return Err(domain(format!(
                "thresholds must satisfy B < 1 < A, got B = {}, A = {}",
                self.threshold_b, self.threshold_a
            )));
        }
        if self.max_trials == 0 {
            return Err(domain("max_trials must be at least 1"));
        }
        Ok(())
    }

    pub fn log_a(&self) -> f64 {
        self.threshold_a.ln()
    }

    pub fn log_b(&self) -> f64 {
        self.threshold_b.ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SprtDecision {
    H0,
    H1,
    Inconclusive,
}

impl From<Hypothesis> for SprtDecision {
    fn from(h: Hypothesis) -> Self {
        match h {
            Hypothesis::H0 => SprtDecision::H0,
            Hypothesis::H1 => SprtDecision::H1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SprtOutcome {
    pub decision: SprtDecision,
    pub trials_used: u64,
    pub final_log_lr: f64,
    pub truncated: bool,
}

/// Log-likelihood ratio `ln p(x|H1) - ln p(x|H0)` of one statistic.
#[inline]
pub fn llr_increment(model: &ConditionalGaussianModel, statistic: f64) -> f64 {
    let ConditionalGaussianModel {
        mean_h0,
        mean_h1,
        var_h0,
        var_h1,
    } = *model;
    if var_h0 == var_h1 {
        (mean_h1 - mean_h0) * (statistic - 0.5 * (mean_h0 + mean_h1)) / var_h0
    } else {
        let d0 = statistic - mean_h0;
        let d1 = statistic - mean_h1;
        0.5 * (var_h0 / var_h1).ln() + d0 * d0 / (2.0 * var_h0) - d1 * d1 / (2.0 * var_h1)
    }
}

/// Runs one sequential test. Trial `n` (zero-based) draws from
/// `stream.at_trial(n)`, so the outcome is a pure function of the inputs.
pub fn run_sprt<S: TrialSource + ?Sized>(
    source: &S,
    h_true: Hypothesis,
    config: &SprtConfig,
    stream: RngStreamKey,
) -> Result<SprtOutcome> {
    let log_a = config.log_a();
    let log_b = config.log_b();
    let model = *source.scoring_model();
    let mut llr = 0.0;
    for n in 0..config.max_trials {
        let mut key = stream.at_trial(n);
        let x = source.draw(h_true, &mut key)?.statistic();
        llr += llr_increment(&model, x);
        let decision = if llr >= log_a {
            Some(SprtDecision::H1)
        } else if llr <= log_b {
            Some(SprtDecision::H0)
        } else {
            None
        };
        if let Some(decision) = decision {
            return Ok(SprtOutcome {
                decision,
                trials_used: n + 1,
                final_log_lr: llr,
                truncated: false,
            });
        }
    }
    let decision = match config.truncation_rule {
        TruncationRule::ForceByLlrSign if llr >= 0.0 => SprtDecision::H1,
        TruncationRule::ForceByLlrSign => SprtDecision::H0,
        TruncationRule::ReportInconclusive => SprtDecision::Inconclusive,
    };
    Ok(SprtOutcome {
        decision,
        trials_used: config.max_trials,
        final_log_lr: llr,
        truncated: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::receivers::{statistic_model, Fidelity, ReceiverKind, StatisticSampler};
    use crate::scenario::ScenarioParams;

    fn sampler(kind: ReceiverKind, params: &ScenarioParams) -> StatisticSampler {
        StatisticSampler {
            model: statistic_model(kind, Fidelity::Asymptotic, params).unwrap(),
        }
    }

    #[test]
    fn thresholds() {
        let (a, b) = wald_thresholds(1e-4, 1e-4).unwrap();
        assert!((a - 9999.0).abs() < 1e-9);
        assert!((b - 1.00010001e-4).abs() < 1e-15);
        assert_eq!(a * b, 1.0);
        let (a, b) = wald_thresholds(1e-2, 1e-3).unwrap();
        assert!((a - 99.9).abs() < 1e-12);
        assert!((b - 1.010101e-3).abs() < 1e-9);
        assert!(wald_thresholds(0.6, 0.4).is_err());
        assert!(wald_thresholds(0.0, 0.1).is_err());
    }

    #[test]
    fn config_rejects_bad_caps() {
        assert!(SprtConfig::new(0.01, 0.01, 0, TruncationRule::ForceByLlrSign).is_err());
        assert!(SprtConfig::new(0.01, 0.01, 10, TruncationRule::ForceByLlrSign).is_ok());
        assert_eq!(default_max_trials(92.08), 9208);
        assert_eq!(default_max_trials(3.0), 1000);
        assert_eq!(default_max_trials(f64::INFINITY), 1000);
    }

    #[test]
    fn llr_examples() {
        let p = ScenarioParams::reference();
        let ci = statistic_model(ReceiverKind::CiHomodyne, Fidelity::Asymptotic, &p).unwrap();
        let hh = statistic_model(ReceiverKind::QiHeteroHomodyne, Fidelity::Asymptotic, &p).unwrap();
        assert_eq!(llr_increment(&ci, 500.0), 0.0);
        assert!((llr_increment(&ci, 1000.0) - 0.1).abs() < 1e-15);
        assert!((llr_increment(&hh, 1000.0) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn unequal_variance_llr_matches_density_ratio() {
        let model = ConditionalGaussianModel::new(0.0, 2.0, 1.0, 3.0).unwrap();
        let density = |x: f64, m: f64, v: f64| {
            (-(x - m) * (x - m) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt()
        };
        for x in [-2.0, 0.0, 0.7, 1.0, 4.5] {
            let want = (density(x, 2.0, 3.0) / density(x, 0.0, 1.0)).ln();
            assert!((llr_increment(&model, x) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn null_scenario_runs_to_the_cap() {
        let p = ScenarioParams::reference().with_kappa(0.0);
        let s = sampler(ReceiverKind::CiHomodyne, &p);
        for rule in [TruncationRule::ForceByLlrSign, TruncationRule::ReportInconclusive] {
            let config = SprtConfig::new(1e-4, 1e-4, 250, rule).unwrap();
            let out = run_sprt(&s, Hypothesis::H1, &config, RngStreamKey::new(1, 0, 0)).unwrap();
            assert!(out.truncated);
            assert_eq!(out.trials_used, 250);
            assert_eq!(out.final_log_lr, 0.0);
            match rule {
                TruncationRule::ForceByLlrSign => assert_eq!(out.decision, SprtDecision::H1),
                TruncationRule::ReportInconclusive => assert_eq!(out.decision, SprtDecision::Inconclusive),
            }
        }
    }

    #[test]
    fn stops_exactly_at_first_crossing() {
        let p = ScenarioParams::reference();
        let s = sampler(ReceiverKind::CiHomodyne, &p);
        let config = SprtConfig::new(1e-3, 1e-3, 10_000, TruncationRule::ForceByLlrSign).unwrap();
        for i in 0..200u64 {
            let h = if i % 2 == 0 { Hypothesis::H0 } else { Hypothesis::H1 };
            let stream = RngStreamKey::for_experiment(3, h, i);
            let out = run_sprt(&s, h, &config, stream).unwrap();
            // Replay the walk independently.
            let mut llr = 0.0;
            for n in 0..out.trials_used {
                let x = s.draw(h, &mut stream.at_trial(n)).unwrap().statistic();
                llr += llr_increment(&s.model, x);
                if n + 1 < out.trials_used {
                    assert!(llr > config.log_b() && llr < config.log_a());
                }
            }
            assert_eq!(llr, out.final_log_lr);
            match out.decision {
                SprtDecision::H1 => assert!(llr >= config.log_a()),
                SprtDecision::H0 => assert!(llr <= config.log_b()),
                SprtDecision::Inconclusive => unreachable!(),
            }
        }
    }

    #[test]
    fn replay_is_bit_identical() {
        let p = ScenarioParams::reference();
        let s = sampler(ReceiverKind::QiHeteroHomodyne, &p);
        let config = SprtConfig::new(1e-4, 1e-4, 5000, TruncationRule::ForceByLlrSign).unwrap();
        let key = RngStreamKey::for_experiment(42, Hypothesis::H1, 0);
        let a = run_sprt(&s, Hypothesis::H1, &config, key).unwrap();
        let b = run_sprt(&s, Hypothesis::H1, &config, key).unwrap();
        assert_eq!(a.trials_used, b.trials_used);
        assert_eq!(a.final_log_lr.to_bits(), b.final_log_lr.to_bits());
    }
}
