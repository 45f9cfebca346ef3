//! Physical scenario parameters and the two hypotheses.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Target absent (`H0`) or present (`H1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

impl Hypothesis {
    pub const BOTH: [Hypothesis; 2] = [Hypothesis::H0, Hypothesis::H1];

    pub fn index(self) -> u64 {
        match self {
            Hypothesis::H0 => 0,
            Hypothesis::H1 => 1,
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::H0 => f.write_str("H0"),
            Hypothesis::H1 => f.write_str("H1"),
        }
    }
}

/// A detection scenario.
///
/// All photon numbers are per mode. `m` counts the signal modes in one
/// transmission, so the transmitted energy per transmission is `m * n_s`.
/// `t_pulse` only enters the bandwidth formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    /// Mean signal photons per mode.
    pub n_s: f64,
    /// Roundtrip transmissivity. Zero means no target return at all.
    pub kappa: f64,
    /// Mean background photons per mode.
    pub n_b: f64,
    /// Modes per transmission.
    pub m: u64,
    /// Pulse duration in seconds.
    pub t_pulse: f64,
}

impl ScenarioParams {
    pub fn new(n_s: f64, kappa: f64, n_b: f64, m: u64, t_pulse: f64) -> Result<Self> {
        let params = Self {
            n_s,
            kappa,
            n_b,
            m,
            t_pulse,
        };
        params.validate()?;
        Ok(params)
    }

    /// The low-SNR microwave operating point used throughout the simulations:
    /// `N_S = 0.01`, `kappa = 0.01`, `N_B = 100`, `M = 1e5`, 1 ms pulses.
    pub fn reference() -> Self {
        Self {
            n_s: 0.01,
            kappa: 0.01,
            n_b: 100.0,
            m: 100_000,
            t_pulse: 1e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n_s.is_finite() && self.n_s > 0.0) {
            return Err(domain(format!("n_s must be positive, got {}", self.n_s)));
        }
        if !(self.kappa.is_finite() && (0.0..=1.0).contains(&self.kappa)) {
            return Err(domain(format!("kappa out of [0,1]: {}", self.kappa)));
        }
        if !(self.n_b.is_finite() && self.n_b > 0.0) {
            return Err(domain(format!("n_b must be positive, got {}", self.n_b)));
        }
        if self.m == 0 {
            return Err(domain("m must be at least 1"));
        }
        if !(self.t_pulse.is_finite() && self.t_pulse > 0.0) {
            return Err(domain(format!(
                "t_pulse must be positive, got {}",
                self.t_pulse
            )));
        }
        Ok(())
    }

    pub fn with_m(self, m: u64) -> Self {
        Self { m, ..self }
    }

    pub fn with_kappa(self, kappa: f64) -> Self {
        Self { kappa, ..self }
    }

    pub fn m_f64(&self) -> f64 {
        self.m as f64
    }

    /// Transmitted signal photons per transmission, `M * N_S`.
    pub fn n_t(&self) -> f64 {
        self.m_f64() * self.n_s
    }

    /// `kappa * M * N_S / N_B`.
    pub fn single_trial_snr(&self) -> f64 {
        self.kappa * self.n_t() / self.n_b
    }

    /// Mean return photons per mode, `kappa * N_S + N_B`.
    pub fn n_r(&self) -> f64 {
        self.kappa * self.n_s + self.n_b
    }
}
