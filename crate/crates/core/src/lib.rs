//! Target detection with classical and quantum illumination.
//!
//! Receiver models for homodyne classical illumination and for the
//! hetero-homodyne, phase-conjugate and idler-heterodyne quantum receivers,
//! single-shot and Wald sequential decision rules, closed-form performance
//! predictions, and a Monte Carlo harness whose results are reproducible
//! under any thread count.

pub mod error;
pub mod montecarlo;
pub mod receivers;
pub mod rng;
pub mod scenario;
pub mod sprt;
pub mod stats;
pub mod theory;

pub use error::{Error, Result};
pub use montecarlo::{
    estimate_error_prob, export_trial_histogram, run_batch, BatchConfig, DetectionMode,
    ErrorEstimate, ExperimentSummary, HistogramRow,
};
pub use receivers::{
    lrt_decide, sample_trial, sample_trial_mode_level, statistic_model, ConditionalGaussianModel,
    Fidelity, ModeLevelTrial, Observation, ReceiverKind, ThresholdMode,
};
pub use rng::RngStreamKey;
pub use scenario::{Hypothesis, ScenarioParams};
pub use sprt::{run_sprt, wald_thresholds, SprtConfig, SprtDecision, SprtOutcome, TruncationRule};
pub use stats::q_function;
pub use theory::{
    bandwidth_requirements, error_probability, expected_trials, photon_budget_curve, BudgetCurve,
    TheoryReport,
};
