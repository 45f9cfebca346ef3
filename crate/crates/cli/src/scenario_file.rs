//! Scenario files: flat TOML with the keys `n_s`, `kappa`, `n_b`, `m`,
//! `t_pulse`.
//!
//! ```toml
//! n_s = 0.01
//! kappa = 0.01
//! n_b = 100.0
//! m = 100000
//! t_pulse = 1e-3
//! ```

use std::fs;
use std::path::Path;

use qillum::ScenarioParams;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioFileError {
    #[error("cannot read scenario file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid scenario file: {0}")]
    Parse(String),
    #[error(transparent)]
    Invalid(#[from] qillum::Error),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    n_s: f64,
    kappa: f64,
    n_b: f64,
    m: i64,
    t_pulse: f64,
}

pub fn parse_scenario(text: &str) -> Result<ScenarioParams, ScenarioFileError> {
    let raw: RawScenario =
        toml::from_str(text).map_err(|e| ScenarioFileError::Parse(e.message().to_string()))?;
    if raw.m < 1 {
        return Err(ScenarioFileError::Parse(format!(
            "m must be a positive integer, got {}",
            raw.m
        )));
    }
    Ok(ScenarioParams::new(
        raw.n_s,
        raw.kappa,
        raw.n_b,
        raw.m as u64,
        raw.t_pulse,
    )?)
}

pub fn load_scenario(path: &Path) -> Result<ScenarioParams, ScenarioFileError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text)
}

pub fn render_scenario(params: &ScenarioParams) -> String {
    format!(
        "n_s = {:?}\nkappa = {:?}\nn_b = {:?}\nm = {}\nt_pulse = {:?}\n",
        params.n_s, params.kappa, params.n_b, params.m, params.t_pulse
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_round_trips() {
        let p = ScenarioParams::reference();
        assert_eq!(parse_scenario(&render_scenario(&p)).unwrap(), p);
    }

    #[test]
    fn missing_key_is_named() {
        let err = parse_scenario("n_s = 0.01\nn_b = 100.0\nm = 10\nt_pulse = 1.0\n").unwrap_err();
        assert!(err.to_string().contains("kappa"), "{err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let text = render_scenario(&ScenarioParams::reference()) + "nb = 3.0\n";
        assert!(parse_scenario(&text).unwrap_err().to_string().contains("nb"));
    }

    #[test]
    fn out_of_range_kappa() {
        let text = render_scenario(&ScenarioParams::reference()).replace("kappa = 0.01", "kappa = -1.0");
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("kappa out of [0,1]"), "{err}");
    }

    #[test]
    fn non_positive_mode_count() {
        let text = render_scenario(&ScenarioParams::reference()).replace("m = 100000", "m = 0");
        assert!(parse_scenario(&text).unwrap_err().to_string().contains("m must be"));
    }
}
