//! Regression values for a fixed seed. A change here means the random
//! streams, the Gaussian transform or the test statistic changed.

use qillum::receivers::StatisticSampler;
use qillum::{
    run_sprt, sample_trial, sample_trial_mode_level, statistic_model, Fidelity, Hypothesis,
    ReceiverKind, RngStreamKey, ScenarioParams, SprtConfig, SprtDecision, TruncationRule,
};

fn ci_sampler() -> StatisticSampler {
    let p = ScenarioParams::reference();
    StatisticSampler {
        model: statistic_model(ReceiverKind::CiHomodyne, Fidelity::Asymptotic, &p).unwrap(),
    }
}

#[test]
fn sprt_experiment_zero_seed_42() {
    let source = ci_sampler();
    let cfg = SprtConfig::new(1e-4, 1e-4, 10_000, TruncationRule::ForceByLlrSign).unwrap();
    let expected = [
        (Hypothesis::H0, SprtDecision::H0, 98, 13844932506154037885u64),
        (Hypothesis::H1, SprtDecision::H1, 37, 4621532654843495924u64),
    ];
    for (h, decision, trials, llr_bits) in expected {
        let out = run_sprt(&source, h, &cfg, RngStreamKey::for_experiment(42, h, 0)).unwrap();
        assert_eq!(out.decision, decision);
        assert_eq!(out.trials_used, trials);
        assert_eq!(out.final_log_lr.to_bits(), llr_bits, "llr {}", out.final_log_lr);
        assert!(!out.truncated);
    }
}

#[test]
fn first_statistic_draw() {
    let mut key = RngStreamKey::new(42, 0, 0);
    let x = sample_trial(&ci_sampler().model, Hypothesis::H1, &mut key).unwrap();
    assert_eq!(x.to_bits(), 4645482514071087076, "{x}");
}

#[test]
fn first_mode_level_draw() {
    let mut key = RngStreamKey::new(42, 0, 0);
    let t = sample_trial_mode_level(&ScenarioParams::reference(), Hypothesis::H1, &mut key).unwrap();
    assert_eq!(t.statistic.to_bits(), 13875810850461233542, "{}", t.statistic);
    assert_eq!(t.return_energy.to_bits(), 4711689542292992376, "{}", t.return_energy);
}
