//! The `theory`, `simulate` and `reproduce` subcommands.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use qillum::sprt::default_max_trials;
use qillum::theory::optimum_qi_chernoff;
use qillum::{
    bandwidth_requirements, error_probability, expected_trials, export_trial_histogram,
    photon_budget_curve, q_function, run_batch, BatchConfig, BudgetCurve, DetectionMode,
    ExperimentSummary, Fidelity, ReceiverKind, ScenarioParams, SprtConfig, TheoryReport,
    ThresholdMode, TruncationRule,
};
use serde::{Deserialize, Serialize};

use crate::output::{fmt_float, fmt_opt, OutputDir, RunManifest, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Figure {
    Fig3,
    Fig4,
}

/// Fully resolved configuration of one invocation, echoed into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum ResolvedConfig {
    Theory {
        scenario: ScenarioParams,
        receiver: ReceiverKind,
        alphas: Vec<f64>,
        format: OutputFormat,
    },
    Simulate {
        batch: BatchConfig,
        format: OutputFormat,
    },
    Reproduce {
        figure: Figure,
        scenario: ScenarioParams,
        qi_fidelity: Fidelity,
        alphas: Vec<f64>,
        experiments_per_hypothesis: u64,
        master_seed: u64,
        worker_count: usize,
    },
}

// ---------------------------------------------------------------- theory

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedTrials {
    pub alpha: f64,
    pub expected_trials: f64,
    /// `<K> M N_S`.
    pub n_t_avg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonBudget {
    pub pr_e: f64,
    pub ci_sprt: f64,
    pub qi_sprt: f64,
    pub ci_lrt: f64,
    pub qi_lrt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthEntry {
    pub pr_e: f64,
    pub k_avg: f64,
    pub b_lrt: f64,
    pub b_sprt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryOutput {
    pub receiver: ReceiverKind,
    pub scenario: ScenarioParams,
    pub single_trial_snr: f64,
    pub report: TheoryReport,
    pub optimum_qi_chernoff: f64,
    pub expected_trials: Vec<ExpectedTrials>,
    pub photon_budgets: Vec<PhotonBudget>,
    pub bandwidths: Vec<BandwidthEntry>,
}

pub fn theory(scenario: &ScenarioParams, receiver: ReceiverKind, alphas: &[f64]) -> Result<TheoryOutput> {
    let report = error_probability(receiver, scenario)?;
    let mut trials = Vec::new();
    let mut budgets = Vec::new();
    let mut bandwidths = Vec::new();
    for &alpha in alphas {
        let k = expected_trials(receiver, scenario, alpha)?;
        trials.push(ExpectedTrials {
            alpha,
            expected_trials: k,
            n_t_avg: k * scenario.n_t(),
        });
        if scenario.kappa > 0.0 {
            let budget = |c| photon_budget_curve(c, alpha, scenario);
            budgets.push(PhotonBudget {
                pr_e: alpha,
                ci_sprt: budget(BudgetCurve::CiSprt)?,
                qi_sprt: budget(BudgetCurve::QiSprt)?,
                ci_lrt: budget(BudgetCurve::CiLrt)?,
                qi_lrt: budget(BudgetCurve::QiLrt)?,
            });
            let b = bandwidth_requirements(scenario, alpha, k)?;
            bandwidths.push(BandwidthEntry {
                pr_e: alpha,
                k_avg: k,
                b_lrt: b.b_lrt,
                b_sprt: b.b_sprt,
            });
        }
    }
    Ok(TheoryOutput {
        receiver,
        scenario: *scenario,
        single_trial_snr: scenario.single_trial_snr(),
        report,
        optimum_qi_chernoff: optimum_qi_chernoff(scenario),
        expected_trials: trials,
        photon_budgets: budgets,
        bandwidths,
    })
}

pub fn theory_table(out: &TheoryOutput) -> Table {
    let mut t = Table::new(&[
        "alpha",
        "pr_e_gaussian",
        "pr_e_chernoff",
        "error_exponent",
        "expected_trials",
        "n_t_avg",
        "n_t_ci_sprt",
        "n_t_qi_sprt",
        "n_t_ci_lrt",
        "n_t_qi_lrt",
        "b_lrt",
        "b_sprt",
    ]);
    for (i, k) in out.expected_trials.iter().enumerate() {
        let budget = out.photon_budgets.get(i);
        let bw = out.bandwidths.get(i);
        t.push(vec![
            fmt_float(k.alpha),
            fmt_float(out.report.pr_e_gaussian),
            fmt_float(out.report.pr_e_chernoff),
            fmt_float(out.report.error_exponent),
            fmt_float(k.expected_trials),
            fmt_float(k.n_t_avg),
            fmt_opt(budget.map(|b| b.ci_sprt)),
            fmt_opt(budget.map(|b| b.qi_sprt)),
            fmt_opt(budget.map(|b| b.ci_lrt)),
            fmt_opt(budget.map(|b| b.qi_lrt)),
            fmt_opt(bw.map(|b| b.b_lrt)),
            fmt_opt(bw.map(|b| b.b_sprt)),
        ]);
    }
    t
}

// -------------------------------------------------------------- simulate

pub fn summary_table(batch: &BatchConfig, s: &ExperimentSummary) -> Table {
    let mut t = Table::new(&[
        "receiver",
        "fidelity",
        "mode",
        "experiments_per_hypothesis",
        "errors_h0",
        "errors_h1",
        "pr_e_hat",
        "log10_pr_e",
        "ci95_log10_halfwidth",
        "pr_e_upper_bound",
        "mean_trials_h0",
        "mean_trials_h1",
        "truncated_count",
        "inconclusive_count",
    ]);
    t.push(vec![
        batch.receiver.to_string(),
        batch.fidelity.to_string(),
        match s.mode {
            DetectionMode::Lrt => "lrt".into(),
            DetectionMode::Sprt => "sprt".into(),
        },
        s.experiments_per_hypothesis.to_string(),
        s.errors_h0.to_string(),
        s.errors_h1.to_string(),
        fmt_float(s.pr_e_hat),
        fmt_opt(s.log10_pr_e),
        fmt_opt(s.ci95_log10_halfwidth),
        fmt_opt(s.pr_e_upper_bound),
        fmt_float(s.mean_trials_h0),
        fmt_float(s.mean_trials_h1),
        s.truncated_count.to_string(),
        s.inconclusive_count.to_string(),
    ]);
    t
}

pub const HISTOGRAM_COLUMNS: [&str; 5] = ["trials", "prob_h0", "prob_h1", "count_h0", "count_h1"];

pub fn histogram_table(s: &ExperimentSummary) -> Result<Table> {
    let mut t = Table::new(&HISTOGRAM_COLUMNS);
    for row in export_trial_histogram(s)? {
        t.push(vec![
            row.trials.to_string(),
            fmt_float(row.prob_h0),
            fmt_float(row.prob_h1),
            row.count_h0.to_string(),
            row.count_h1.to_string(),
        ]);
    }
    Ok(t)
}

/// SPRT configuration with the default trial cap for `receiver`.
pub fn sprt_config(
    receiver: ReceiverKind,
    scenario: &ScenarioParams,
    alpha: f64,
    beta: f64,
    max_trials: Option<u64>,
) -> Result<SprtConfig> {
    let cap = match max_trials {
        Some(cap) => cap,
        None => {
            let predicted = expected_trials(receiver, scenario, alpha.min(beta).min(0.49))
                .unwrap_or(f64::INFINITY);
            default_max_trials(predicted)
        }
    };
    Ok(SprtConfig::new(alpha, beta, cap, TruncationRule::ForceByLlrSign)?)
}

pub fn simulate(batch: &BatchConfig, format: OutputFormat, out: Option<&PathBuf>) -> Result<(ExperimentSummary, Option<RunManifest>)> {
    let start = Instant::now();
    let summary = run_batch(batch)?;
    let manifest = match out {
        Some(dir) => {
            let mut dir = OutputDir::create(dir)?;
            match format {
                OutputFormat::Json => dir.write_json("summary.json", &summary)?,
                OutputFormat::Csv => dir.write_table("summary.csv", &summary_table(batch, &summary))?,
            };
            if batch.mode == DetectionMode::Sprt {
                dir.write_table("histogram.csv", &histogram_table(&summary)?)?;
            }
            Some(dir.finish(
                ResolvedConfig::Simulate {
                    batch: *batch,
                    format,
                },
                Some(batch.master_seed),
                start.elapsed().as_secs_f64(),
            )?)
        }
        None => None,
    };
    Ok((summary, manifest))
}

// ------------------------------------------------------------- reproduce

/// Error probabilities of the sequential points.
pub const FIG4_ALPHAS: [f64; 5] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5];
pub const FIG3_ALPHA: f64 = 1e-4;
pub const MIN_EXPERIMENTS: u64 = 1_000;
pub const DEFAULT_EXPERIMENTS: u64 = 100_000;
pub const FULL_EXPERIMENTS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ReproduceOptions {
    pub figure: Figure,
    pub experiments_per_hypothesis: u64,
    pub master_seed: u64,
    pub worker_count: usize,
    pub qi_fidelity: Fidelity,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproduceResult {
    pub manifest: RunManifest,
    /// (series name, summary) for every simulated batch.
    pub summaries: Vec<(String, ExperimentSummary)>,
}

fn sprt_batch(
    receiver: ReceiverKind,
    fidelity: Fidelity,
    alpha: f64,
    opts: &ReproduceOptions,
) -> Result<BatchConfig> {
    let scenario = ScenarioParams::reference();
    Ok(BatchConfig {
        scenario,
        receiver,
        fidelity,
        mode: DetectionMode::Sprt,
        sprt: Some(sprt_config(receiver, &scenario, alpha, alpha, None)?),
        lrt_threshold: ThresholdMode::Fixed,
        experiments_per_hypothesis: opts.experiments_per_hypothesis,
        master_seed: opts.master_seed,
        worker_count: opts.worker_count,
    })
}

fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    let steps = ((b - a) * per_decade as f64).round() as usize;
    (0..=steps)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / steps as f64))
        .collect()
}

pub fn reproduce(opts: &ReproduceOptions) -> Result<ReproduceResult> {
    if opts.experiments_per_hypothesis < MIN_EXPERIMENTS {
        bail!(
            "reproduce needs at least {MIN_EXPERIMENTS} experiments per hypothesis, got {}",
            opts.experiments_per_hypothesis
        );
    }
    if opts.experiments_per_hypothesis < DEFAULT_EXPERIMENTS {
        eprintln!(
            "warning: {} experiments per hypothesis; expect wider confidence intervals than the 1e5 default",
            opts.experiments_per_hypothesis
        );
    }
    let start = Instant::now();
    let scenario = ScenarioParams::reference();
    let mut dir = OutputDir::create(&opts.out_dir)?;
    let mut summaries = Vec::new();
    let series = [
        ("ci", ReceiverKind::CiHomodyne, Fidelity::Asymptotic),
        ("qi", ReceiverKind::QiHeteroHomodyne, opts.qi_fidelity),
    ];

    let alphas = match opts.figure {
        Figure::Fig3 => {
            for (name, receiver, fidelity) in series {
                let batch = sprt_batch(receiver, fidelity, FIG3_ALPHA, opts)?;
                let summary = run_batch(&batch).with_context(|| format!("fig3 {name} batch"))?;
                dir.write_table(&format!("fig3_{name}.csv"), &histogram_table(&summary)?)?;
                summaries.push((name.to_string(), summary));
            }
            vec![FIG3_ALPHA]
        }
        Figure::Fig4 => {
            let grid = log_grid(1e2, 1e6, 20);
            for (name, receiver) in [("ci", ReceiverKind::CiHomodyne), ("qi", ReceiverKind::QiHeteroHomodyne)] {
                let mut t = Table::new(&["n_t", "pr_e"]);
                for &n_t in &grid {
                    let snr = scenario.kappa * n_t / scenario.n_b;
                    let arg = match receiver {
                        ReceiverKind::CiHomodyne => (snr / 2.0).sqrt(),
                        _ => snr.sqrt(),
                    };
                    t.push(vec![fmt_float(n_t), fmt_float(q_function(arg)?)]);
                }
                dir.write_table(&format!("fig4_theory_{name}.csv"), &t)?;
            }

            for (name, receiver, fidelity) in series {
                let mut t = Table::new(&["alpha", "n_t_avg", "pr_e_hat", "ci_lo", "ci_hi"]);
                for alpha in FIG4_ALPHAS {
                    let batch = sprt_batch(receiver, fidelity, alpha, opts)?;
                    let summary = run_batch(&batch)
                        .with_context(|| format!("fig4 {name} batch at alpha {alpha}"))?;
                    let (lo, hi) = summary.error_estimate().interval();
                    t.push(vec![
                        fmt_float(alpha),
                        fmt_float(summary.mean_trials() * scenario.n_t()),
                        fmt_float(summary.pr_e_hat),
                        fmt_float(lo),
                        fmt_float(hi),
                    ]);
                    summaries.push((format!("{name}@{alpha:e}"), summary));
                }
                dir.write_table(&format!("fig4_sprt_{name}.csv"), &t)?;
            }

            let pr_grid = log_grid(1e-6, 1e-1, 20);
            for curve in BudgetCurve::ALL {
                let mut t = Table::new(&["n_t", "pr_e"]);
                for &pr in &pr_grid {
                    t.push(vec![
                        fmt_float(photon_budget_curve(curve, pr, &scenario)?),
                        fmt_float(pr),
                    ]);
                }
                dir.write_table(&format!("fig4_budget_{}.csv", curve.name()), &t)?;
            }
            FIG4_ALPHAS.to_vec()
        }
    };

    let manifest = dir.finish(
        ResolvedConfig::Reproduce {
            figure: opts.figure,
            scenario,
            qi_fidelity: opts.qi_fidelity,
            alphas,
            experiments_per_hypothesis: opts.experiments_per_hypothesis,
            master_seed: opts.master_seed,
            worker_count: opts.worker_count,
        },
        Some(opts.master_seed),
        start.elapsed().as_secs_f64(),
    )?;
    Ok(ReproduceResult { manifest, summaries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = log_grid(1e2, 1e6, 20);
        assert_eq!(g.len(), 81);
        assert!((g[0] - 1e2).abs() < 1e-9 && (g[80] - 1e6).abs() < 1e-6);
    }

    #[test]
    fn theory_reference_values() {
        let p = ScenarioParams::reference();
        let qi = theory(&p, ReceiverKind::QiHeteroHomodyne, &[1e-4]).unwrap();
        assert!((qi.expected_trials[0].expected_trials - 46.04).abs() < 0.005);
        let ci = theory(&p, ReceiverKind::CiHomodyne, &[1e-4]).unwrap();
        assert!((ci.expected_trials[0].expected_trials - 92.08).abs() < 0.005);
        assert_eq!(theory_table(&ci).len(), 1);
    }

    #[test]
    fn theory_skips_budgets_for_null_scenario() {
        let p = ScenarioParams::reference().with_kappa(0.0);
        let out = theory(&p, ReceiverKind::CiHomodyne, &[1e-2]).unwrap();
        assert!(out.photon_budgets.is_empty());
        assert_eq!(out.report.pr_e_gaussian, 0.5);
    }

    #[test]
    fn reproduce_rejects_tiny_runs() {
        let opts = ReproduceOptions {
            figure: Figure::Fig3,
            experiments_per_hypothesis: 10,
            master_seed: 0,
            worker_count: 1,
            qi_fidelity: Fidelity::Asymptotic,
            out_dir: std::env::temp_dir().join("qillum-never-written"),
        };
        assert!(reproduce(&opts).is_err());
    }
}
