//! Subcommand implementations behind the `rnl-lab` binary.
//!
//! Every subcommand writes data only to the supplied sink; diagnostics are
//! the caller's business. Exit status: 0 success, 1 invalid input, 2
//! runtime failure.

use std::fmt::Write as _;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigErrors, ExperimentConfig};
use crate::model::Correlation;
use crate::montecarlo::{discrimination_power, estimate, sample_pairs, CountRecord, EstimateReport};
use crate::quantum::{entangled_joint, AnalyzerSettings};
use crate::rnl::{predict, LabelJoints, PredictionReport};
use crate::timing::{classify_experiment, feasibility_sweep, write_feasibility_csv, Classification};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Classify,
    Predict,
    Sweep,
    Feasibility,
    Simulate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Command {
    pub fn default_format(self) -> Format {
        match self {
            Command::Sweep | Command::Feasibility => Format::Csv,
            _ => Format::Json,
        }
    }

    fn supports(self, format: Format) -> bool {
        match self {
            Command::Predict | Command::Simulate => format == Format::Json,
            _ => true,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigErrors),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Model(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Invalid(_) => 1,
            CliError::Model(e) => match e {
                Error::Superluminal(_)
                | Error::NonFinite(_)
                | Error::MixedMarkings
                | Error::Domain(_)
                | Error::NotNormalized(_)
                | Error::UnsupportedPreparation => 1,
                _ => 2,
            },
            CliError::Io(_) => 2,
        }
    }
}

pub const SWEEP_CSV_HEADER: &str = "alpha_deg,beta_deg,E_rnl,E_qm,E_bb,E_ab";

/// Shortest representation that reads back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn run(
    command: Command,
    config: &ExperimentConfig,
    format: Option<Format>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let format = format.unwrap_or(command.default_format());
    if !command.supports(format) {
        return Err(CliError::Invalid(format!("{command:?} does not support {format:?} output")));
    }
    match command {
        Command::Classify => classify(config, format, out),
        Command::Predict => predict_cmd(config, out),
        Command::Sweep => sweep(config, format, out),
        Command::Feasibility => feasibility(config, format, out),
        Command::Simulate => simulate(config, out),
    }
}

fn write_json<T: Serialize>(value: &T, out: &mut dyn Write) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    writeln!(out, "{text}")?;
    Ok(())
}

#[derive(Serialize)]
struct ImpactSummary {
    class: &'static str,
    gap_s: f64,
}

#[derive(Serialize)]
struct ClassifyOutput {
    label: String,
    photon1: ImpactSummary,
    photon2: ImpactSummary,
}

fn classify(config: &ExperimentConfig, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let c: Classification = classify_experiment(&config.setup()?)?;
    match format {
        Format::Json => write_json(
            &ClassifyOutput {
                label: c.label.to_string(),
                photon1: ImpactSummary { class: c.class1.name(), gap_s: c.gap1 },
                photon2: ImpactSummary { class: c.class2.name(), gap_s: c.gap2 },
            },
            out,
        ),
        Format::Csv => {
            writeln!(out, "photon,class,gap_s")?;
            writeln!(out, "1,{},{}", c.class1.name(), fmt_f64(c.gap1))?;
            writeln!(out, "2,{},{}", c.class2.name(), fmt_f64(c.gap2))?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct PredictOutput<'a> {
    alpha_deg: f64,
    beta_deg: f64,
    #[serde(flatten)]
    report: &'a PredictionReport,
}

fn predict_cmd(config: &ExperimentConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let report = predict(&config.setup()?, &config.state()?, &config.settings()?)?;
    write_json(
        &PredictOutput { alpha_deg: config.angles.alpha_deg, beta_deg: config.angles.beta_deg, report: &report },
        out,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha_deg: f64,
    pub beta_deg: f64,
    #[serde(rename = "E_rnl")]
    pub e_rnl: f64,
    #[serde(rename = "E_qm")]
    pub e_qm: f64,
    #[serde(rename = "E_bb")]
    pub e_bb: f64,
    #[serde(rename = "E_ab")]
    pub e_ab: f64,
}

/// One row per sweep point, in grid order. `E_rnl` and `E_qm` follow the
/// setup's classification and markings.
pub fn sweep_rows(config: &ExperimentConfig) -> Result<Vec<SweepRow>, CliError> {
    let spec =
        config.sweep.ok_or_else(|| CliError::Invalid("sweep: section required for the sweep subcommand".into()))?;
    let setup = config.setup()?;
    let label = classify_experiment(&setup)?.label;
    let state = config.state()?;
    let distinguishable = setup.marking1 == crate::timing::Marking::Distinguishable;
    spec.points(&config.angles)
        .into_par_iter()
        .map(|(alpha_deg, beta_deg)| {
            let settings = AnalyzerSettings::from_degrees(alpha_deg, beta_deg)?;
            let joints = LabelJoints::compute(&state, &settings)?;
            let qm = if distinguishable { joints.bb } else { entangled_joint(&state, &settings)? };
            Ok(SweepRow {
                alpha_deg,
                beta_deg,
                e_rnl: joints.get(label).correlation().value(),
                e_qm: qm.correlation().value(),
                e_bb: joints.bb.correlation().value(),
                e_ab: joints.ab.correlation().value(),
            })
        })
        .collect::<crate::Result<Vec<_>>>()
        .map_err(CliError::from)
}

fn sweep(config: &ExperimentConfig, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = sweep_rows(config)?;
    match format {
        Format::Json => write_json(&rows, out),
        Format::Csv => {
            let mut text = String::with_capacity(64 * (rows.len() + 1));
            text.push_str(SWEEP_CSV_HEADER);
            text.push('\n');
            for r in &rows {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{}",
                    fmt_f64(r.alpha_deg),
                    fmt_f64(r.beta_deg),
                    fmt_f64(r.e_rnl),
                    fmt_f64(r.e_qm),
                    fmt_f64(r.e_bb),
                    fmt_f64(r.e_ab)
                );
            }
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct FeasibilityOutput<'a> {
    safety_margin: f64,
    rows: &'a [crate::timing::FeasibilityRow],
}

fn feasibility(config: &ExperimentConfig, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let (speeds, distances, margin) = config.feasibility_grids();
    let rows = feasibility_sweep(&speeds, &distances, margin)?;
    match format {
        Format::Csv => Ok(write_feasibility_csv(&rows, out)?),
        Format::Json => write_json(&FeasibilityOutput { safety_margin: margin, rows: &rows }, out),
    }
}

#[derive(Serialize)]
struct SimulatedPrediction {
    #[serde(rename = "E")]
    e: f64,
    record: CountRecord,
    estimate: EstimateReport,
}

#[derive(Serialize)]
struct SimulateOutput {
    label: String,
    pairs: u64,
    rnl: SimulatedPrediction,
    qm: SimulatedPrediction,
    /// Expected separation at this sample size, from the analytic values.
    discrimination_sigma: f64,
    /// Separation of the two sampled estimates.
    observed_sigma: f64,
}

/// Seed of the QM stream; the RNL stream uses the configured seed.
pub fn qm_stream_seed(seed: u64) -> u64 {
    crate::montecarlo::derive_seed(seed, u64::MAX)
}

fn simulate(config: &ExperimentConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let mc = config
        .montecarlo
        .ok_or_else(|| CliError::Invalid("montecarlo: section required for the simulate subcommand".into()))?;
    let report = predict(&config.setup()?, &config.state()?, &config.settings()?)?;
    let run_one = |joint: &crate::model::JointDistribution, seed| -> Result<SimulatedPrediction, CliError> {
        let record = sample_pairs(joint, mc.pairs, seed)?;
        Ok(SimulatedPrediction { e: joint.correlation().value(), estimate: estimate(&record), record })
    };
    let rnl = run_one(&report.rnl, mc.seed)?;
    let qm = run_one(&report.qm, qm_stream_seed(mc.seed))?;
    let clamp = |e: f64| Correlation::new(e.clamp(-1.0, 1.0));
    let discrimination_sigma = discrimination_power(report.rnl_e, report.qm_e, mc.pairs)?;
    let observed_sigma = discrimination_power(clamp(rnl.estimate.e_hat)?, clamp(qm.estimate.e_hat)?, mc.pairs)?;
    write_json(
        &SimulateOutput {
            label: report.label.to_string(),
            pairs: mc.pairs,
            rnl,
            qm,
            discrimination_sigma,
            observed_sigma,
        },
        out,
    )
}
