mod common;

use common::{ks_critical, ks_statistic, mean_var};
use qillum::receivers::{mode_coefficients, sample_trial_mode_level_per_mode};
use qillum::{
    sample_trial, sample_trial_mode_level, statistic_model, Fidelity, Hypothesis, ReceiverKind,
    RngStreamKey, ScenarioParams,
};

#[test]
fn null_scenario_hypotheses_are_indistinguishable() {
    let p = ScenarioParams::reference().with_kappa(0.0);
    let n = 100_000;
    for kind in ReceiverKind::ALL {
        let model = statistic_model(kind, Fidelity::Asymptotic, &p).unwrap();
        let draw = |h: Hypothesis| -> Vec<f64> {
            (0..n)
                .map(|i| sample_trial(&model, h, &mut RngStreamKey::for_experiment(5, h, i)).unwrap())
                .collect()
        };
        let d = ks_statistic(&draw(Hypothesis::H0), &draw(Hypothesis::H1));
        assert!(d < ks_critical(n as usize, n as usize), "{kind}: D = {d}");
    }
}

#[test]
fn collapsed_mode_level_matches_per_mode_construction() {
    let p = ScenarioParams::new(0.3, 0.4, 2.0, 12, 1e-3).unwrap();
    let n = 20_000u64;
    for h in Hypothesis::BOTH {
        let (mut fast_l, mut fast_e, mut slow_l, mut slow_e) = (vec![], vec![], vec![], vec![]);
        for i in 0..n {
            let t = sample_trial_mode_level(&p, h, &mut RngStreamKey::new(11, i, 0)).unwrap();
            fast_l.push(t.statistic);
            fast_e.push(t.return_energy);
            let t = sample_trial_mode_level_per_mode(&p, h, &mut RngStreamKey::new(12, i, 0)).unwrap();
            slow_l.push(t.statistic);
            slow_e.push(t.return_energy);
        }
        let crit = ks_critical(n as usize, n as usize);
        let d_l = ks_statistic(&fast_l, &slow_l);
        let d_e = ks_statistic(&fast_e, &slow_e);
        assert!(d_l < crit, "{h} statistic: D = {d_l}");
        assert!(d_e < crit, "{h} energy: D = {d_e}");
    }
}

#[test]
fn mode_level_moments_match_their_closed_form() {
    // E[l] = c M s, Var[l] = M s v + c^2 M s^2 for energy ~ Gamma(M, s).
    let p = ScenarioParams::reference();
    let n = 100_000u64;
    for h in Hypothesis::BOTH {
        let c = mode_coefficients(&p, h).unwrap();
        let m = p.m_f64();
        let mean = c.gain * m * c.power;
        let var = m * c.power * c.noise + c.gain * c.gain * m * c.power * c.power;
        let xs: Vec<f64> = (0..n)
            .map(|i| {
                sample_trial_mode_level(&p, h, &mut RngStreamKey::for_experiment(3, h, i))
                    .unwrap()
                    .statistic
            })
            .collect();
        let (m_hat, v_hat) = mean_var(&xs);
        let se_mean = (var / n as f64).sqrt();
        let se_var = var * (2.0 / (n as f64 - 1.0)).sqrt();
        assert!((m_hat - mean).abs() < 4.0 * se_mean, "{h}: mean {m_hat} vs {mean}");
        assert!((v_hat - var).abs() < 4.0 * se_var, "{h}: var {v_hat} vs {var}");
    }
}

#[test]
fn mode_level_mean_matches_exact_model() {
    let p = ScenarioParams::reference();
    let exact = statistic_model(ReceiverKind::QiHeteroHomodyne, Fidelity::PaperExact, &p).unwrap();
    for h in Hypothesis::BOTH {
        let c = mode_coefficients(&p, h).unwrap();
        let mean = c.gain * p.m_f64() * c.power;
        assert!((mean - exact.mean(h)).abs() <= 1e-9 * exact.mean(Hypothesis::H1), "{h}");
    }
}
