//! Experiment runner for the `dyadic-lab` library.

pub mod config;
pub mod record;
pub mod run;

use std::io::Write;
use std::path::Path;

use clap::{Parser, Subcommand as ClapSubcommand};
use dyadic_lab::LabError;

use config::{ExperimentConfig, OutputFormat, Overrides, Subcommand};
use record::ResultRecord;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_ASSERTION: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "dyadic-lab",
    version,
    about = "Dyadic and circle Hilbert transform experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, ClapSubcommand)]
pub enum Command {
    /// Quarter averages of H phi against c0 times the dyadic shift
    VerifyLemma(Overrides),
    /// Pairing identity E<F^H, G> = c0 E<S0 F, G> on random inputs
    VerifyWeakForm(Overrides),
    /// Hilbert transform in psi of modulated increments
    VerifyModulation(Overrides),
    /// Grid law of f against the quarter law of its lift
    VerifyDistribution(Overrides),
    /// s_p and h_p lower bounds and their ratios
    EstimateNorms(Overrides),
    /// Dump an operator matrix
    Materialize(Overrides),
}

impl Command {
    pub fn split(&self) -> (Subcommand, &Overrides) {
        match self {
            Command::VerifyLemma(o) => (Subcommand::VerifyLemma, o),
            Command::VerifyWeakForm(o) => (Subcommand::VerifyWeakForm, o),
            Command::VerifyModulation(o) => (Subcommand::VerifyModulation, o),
            Command::VerifyDistribution(o) => (Subcommand::VerifyDistribution, o),
            Command::EstimateNorms(o) => (Subcommand::EstimateNorms, o),
            Command::Materialize(o) => (Subcommand::Materialize, o),
        }
    }
}

/// Errors that mean the request itself was unusable.
fn is_config_error(e: &LabError) -> bool {
    matches!(
        e,
        LabError::MalformedInput(_)
            | LabError::Budget(_)
            | LabError::UnknownOperator(_)
            | LabError::Precondition(_)
            | LabError::DimensionMismatch { .. }
    )
}

pub fn write_records(
    records: &[ResultRecord],
    format: OutputFormat,
    path: Option<&Path>,
) -> std::io::Result<()> {
    let mut sink: Box<dyn Write> = match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(std::io::BufWriter::new(std::fs::File::create(p)?))
        }
        None => Box::new(std::io::stdout().lock()),
    };
    match format {
        OutputFormat::Csv => record::write_csv(records, &mut sink),
        OutputFormat::Json => record::write_json(records, &mut sink),
    }?;
    sink.flush()
}

/// Resolves the config, runs the subcommand, writes the records and returns
/// the process exit code.
pub fn execute(cli: &Cli) -> u8 {
    let (sub, overrides) = cli.command.split();
    let cfg = match ExperimentConfig::resolve(sub, overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let records = match run::run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return if is_config_error(&e) {
                EXIT_CONFIG
            } else {
                EXIT_ASSERTION
            };
        }
    };
    if let Err(e) = write_records(&records, cfg.format, cfg.output.as_deref()) {
        eprintln!("error: cannot write output: {e}");
        return EXIT_CONFIG;
    }
    summarize(&cfg, &records)
}

/// Reports failing checks on stderr and maps the records to an exit code.
pub fn summarize(cfg: &ExperimentConfig, records: &[ResultRecord]) -> u8 {
    if let Some(c0) = records.iter().find(|r| r.metric == "c0") {
        eprintln!("c0 = {:.10}", c0.value);
    }
    let checks = records.iter().filter(|r| r.passed.is_some()).count();
    let failures: Vec<&ResultRecord> = records.iter().filter(|r| r.failed()).collect();
    for r in &failures {
        eprintln!(
            "FAILED {} {} {}: {} = {:e} (threshold {})",
            r.experiment,
            r.id,
            r.space.as_deref().unwrap_or(""),
            r.metric,
            r.value,
            r.threshold
                .map_or_else(|| "-".to_string(), |t| format!("{t:e}"))
        );
    }
    eprintln!(
        "{}: {} records, {} checks, {} failed",
        cfg.subcommand.name(),
        records.len(),
        checks,
        failures.len()
    );
    if failures.is_empty() {
        EXIT_PASS
    } else {
        EXIT_ASSERTION
    }
}
