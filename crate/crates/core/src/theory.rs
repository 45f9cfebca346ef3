//! Closed-form performance predictions.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::receivers::{statistic_model, Fidelity, ReceiverKind};
use crate::scenario::ScenarioParams;
use crate::stats::q_function;

/// Single-transmission error probability for equally likely hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    /// Gaussian (Q-function) approximation.
    pub pr_e_gaussian: f64,
    /// Chernoff-type upper bound `exp(-error_exponent) / 2`.
    pub pr_e_chernoff: f64,
    /// Exponent of the bound for this scenario, e.g. `kappa M N_S / 4 N_B`
    /// for homodyne CI.
    pub error_exponent: f64,
}

impl TheoryReport {
    fn from_exponent(error_exponent: f64) -> Result<Self> {
        Ok(Self {
            pr_e_gaussian: q_function((2.0 * error_exponent).sqrt())?,
            pr_e_chernoff: (-error_exponent).exp() / 2.0,
            error_exponent,
        })
    }
}

/// Error exponent per transmission: `SNR / 4` for CI and idler heterodyning,
/// `SNR / 2` for hetero-homodyne and phase-conjugate QI.
pub fn error_exponent(kind: ReceiverKind, params: &ScenarioParams) -> f64 {
    let snr = params.single_trial_snr();
    match kind {
        ReceiverKind::CiHomodyne | ReceiverKind::QiIdlerHeterodyne => snr / 4.0,
        ReceiverKind::QiHeteroHomodyne | ReceiverKind::QiPhaseConjugate => snr / 2.0,
    }
}

/// Exponent of the optimum joint QI measurement, `kappa M N_S / N_B`.
/// Reference line only: no receiver in this crate attains it.
pub fn optimum_qi_exponent(params: &ScenarioParams) -> f64 {
    params.single_trial_snr()
}

pub fn optimum_qi_chernoff(params: &ScenarioParams) -> f64 {
    (-optimum_qi_exponent(params)).exp() / 2.0
}

/// Non-sequential error probability. With `kappa = 0` both forms are 1/2.
pub fn error_probability(kind: ReceiverKind, params: &ScenarioParams) -> Result<TheoryReport> {
    params.validate()?;
    TheoryReport::from_exponent(error_exponent(kind, params))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(domain(format!("alpha must lie in (0, 1/2), got {alpha}")));
    }
    Ok(())
}

/// Wald's average sample number for a symmetric (`alpha = beta`) test,
/// `ln[(1-a)/a] (1-2a) / D`, with `D` the per-transmission separation
/// exponent of the receiver's asymptotic model. Infinite when `kappa = 0`.
pub fn expected_trials(kind: ReceiverKind, params: &ScenarioParams, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let model = statistic_model(kind, Fidelity::Asymptotic, params)?;
    let drift = model.separation_exponent();
    Ok(((1.0 - alpha) / alpha).ln() * (1.0 - 2.0 * alpha) / drift)
}

/// Which transmitted-photon curve to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BudgetCurve {
    CiSprt,
    QiSprt,
    CiLrt,
    QiLrt,
}

impl BudgetCurve {
    pub const ALL: [BudgetCurve; 4] = [
        BudgetCurve::CiSprt,
        BudgetCurve::QiSprt,
        BudgetCurve::CiLrt,
        BudgetCurve::QiLrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BudgetCurve::CiSprt => "ci_sprt",
            BudgetCurve::QiSprt => "qi_sprt",
            BudgetCurve::CiLrt => "ci_lrt",
            BudgetCurve::QiLrt => "qi_lrt",
        }
    }
}

/// Average transmitted signal photons `N_T` needed to reach `pr_e`.
pub fn photon_budget_curve(curve: BudgetCurve, pr_e: f64, params: &ScenarioParams) -> Result<f64> {
    if !(pr_e > 0.0 && pr_e < 0.5) {
        return Err(domain(format!("pr_e must lie in (0, 1/2), got {pr_e}")));
    }
    params.validate()?;
    if params.kappa == 0.0 {
        return Err(domain("photon budget needs kappa > 0"));
    }
    let n_b = params.n_b;
    let kappa = params.kappa;
    let sequential = n_b * ((1.0 - pr_e) / pr_e).ln() * (1.0 - 2.0 * pr_e);
    Ok(match curve {
        BudgetCurve::CiSprt => sequential / kappa,
        BudgetCurve::QiSprt => sequential / (2.0 * kappa),
        BudgetCurve::CiLrt => -4.0 * n_b * pr_e.ln() / kappa,
        BudgetCurve::QiLrt => -2.0 * n_b * pr_e.ln() / kappa,
    })
}

/// Detector bandwidth in Hz needed by single-shot and sequential QI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bandwidths {
    pub b_lrt: f64,
    pub b_sprt: f64,
}

/// `b_lrt = -2 N_B ln(Pr) / (kappa N_S T)`, `b_sprt = b_lrt / (4 <K>)`.
pub fn bandwidth_requirements(params: &ScenarioParams, pr_e: f64, k_avg: f64) -> Result<Bandwidths> {
    if !(pr_e > 0.0 && pr_e < 1.0) {
        return Err(domain(format!("pr_e must lie in (0, 1), got {pr_e}")));
    }
    if !(k_avg > 0.0 && k_avg.is_finite()) {
        return Err(domain(format!("k_avg must be positive, got {k_avg}")));
    }
    params.validate()?;
    if params.kappa == 0.0 {
        return Err(domain("bandwidth needs kappa > 0"));
    }
    let ScenarioParams {
        n_s,
        kappa,
        n_b,
        t_pulse,
        ..
    } = *params;
    let log_pr = pr_e.ln();
    Ok(Bandwidths {
        b_lrt: -2.0 * n_b * log_pr / (kappa * n_s * t_pulse),
        b_sprt: -n_b * log_pr / (2.0 * kappa * n_s * t_pulse * k_avg),
    })
}
