//! Experiment configuration: defaults, an optional flat TOML file and
//! command-line overrides, resolved in that order of increasing precedence.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use dyadic_lab::norms::SpaceKind;
use serde::Deserialize;
use thiserror::Error;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "DYADIC_LAB_OUTPUT_DIR";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config file {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    VerifyLemma,
    VerifyWeakForm,
    VerifyModulation,
    VerifyDistribution,
    EstimateNorms,
    Materialize,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::VerifyLemma => "verify-lemma",
            Subcommand::VerifyWeakForm => "verify-weak-form",
            Subcommand::VerifyModulation => "verify-modulation",
            Subcommand::VerifyDistribution => "verify-distribution",
            Subcommand::EstimateNorms => "estimate-norms",
            Subcommand::Materialize => "materialize",
        }
    }

    pub fn is_randomized(self) -> bool {
        !matches!(self, Subcommand::VerifyLemma | Subcommand::Materialize)
    }

    fn default_depth(self) -> usize {
        match self {
            Subcommand::VerifyLemma | Subcommand::Materialize => 1,
            Subcommand::VerifyWeakForm => 4,
            Subcommand::VerifyModulation => 2,
            Subcommand::VerifyDistribution | Subcommand::EstimateNorms => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Keys accepted in a config file; every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub depth: Option<usize>,
    pub grid: Option<usize>,
    pub order: Option<usize>,
    pub spaces: Option<Vec<String>>,
    pub exponents: Option<Vec<f64>>,
    pub restarts: Option<usize>,
    pub iterations: Option<usize>,
    pub tol: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub operator: Option<String>,
    pub dim: Option<usize>,
    pub slack: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            ConfigError::Parse { message, .. } => ConfigError::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: PathBuf::new(),
            message: e.to_string(),
        })
    }
}

/// Command-line overrides shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Flat TOML config file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Truncation depth K
    #[arg(long)]
    pub depth: Option<usize>,
    /// Circle grid size N (power of two)
    #[arg(long)]
    pub grid: Option<usize>,
    /// Fourier truncation order M
    #[arg(long)]
    pub order: Option<usize>,
    /// Comma-separated spaces: scalar, l<q>^<d>
    #[arg(long, value_delimiter = ',')]
    pub spaces: Option<Vec<String>>,
    /// Comma-separated exponents p
    #[arg(long = "p", value_delimiter = ',')]
    pub exponents: Option<Vec<f64>>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Power-iteration cap per start
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Power-iteration stopping tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// Random instances per check
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; defaults to $DYADIC_LAB_OUTPUT_DIR/<subcommand>.<format> or stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Operator for `materialize`: identity, s0, classical-shift, reduce-tilde, talpha[:bits]
    #[arg(long)]
    pub operator: Option<String>,
    /// Vector dimension for `materialize`
    #[arg(long)]
    pub dim: Option<usize>,
    /// Slack factor on the s_p / h_p envelope
    #[arg(long)]
    pub slack: Option<f64>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub subcommand: Subcommand,
    pub depth: usize,
    pub grid: usize,
    pub order: usize,
    pub spaces: Vec<SpaceKind>,
    pub exponents: Vec<f64>,
    pub restarts: usize,
    pub iterations: usize,
    pub tol: f64,
    pub trials: usize,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub operator: String,
    pub dim: usize,
    pub slack: f64,
}

pub const MAX_TOSS_DEPTH: usize = 9;
pub const MAX_MODULATION_DEPTH: usize = 3;
pub const MAX_ORDER: usize = 9;
pub const MAX_GRID: usize = 1 << 16;
pub const MAX_MATERIALIZE_DEPTH: usize = 10;

impl ExperimentConfig {
    /// Defaults, then the file named by `--config` (if any), then flags.
    pub fn resolve(subcommand: Subcommand, cli: &Overrides) -> Result<Self, ConfigError> {
        let file = match &cli.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Self::resolve_with(
            subcommand,
            &file,
            cli,
            std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from),
        )
    }

    pub fn resolve_with(
        subcommand: Subcommand,
        file: &FileConfig,
        cli: &Overrides,
        output_dir: Option<PathBuf>,
    ) -> Result<Self, ConfigError> {
        macro_rules! pick {
            ($field:ident, $default:expr) => {
                cli.$field
                    .clone()
                    .or_else(|| file.$field.clone())
                    .unwrap_or($default)
            };
        }
        let format = pick!(format, OutputFormat::default());
        let spaces = pick!(spaces, vec!["scalar".to_string()])
            .iter()
            .map(|s| SpaceKind::parse(s).map_err(|e| ConfigError::Invalid(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let output = cli
            .output
            .clone()
            .or_else(|| file.output.clone())
            .or_else(|| {
                output_dir.map(|d| d.join(format!("{}.{}", subcommand.name(), format.extension())))
            });
        let cfg = Self {
            subcommand,
            depth: pick!(depth, subcommand.default_depth()),
            grid: pick!(grid, 1024),
            order: pick!(order, 3),
            spaces,
            exponents: pick!(exponents, vec![2.0]),
            restarts: pick!(restarts, 20),
            iterations: pick!(iterations, 500),
            tol: pick!(tol, 1e-10),
            trials: pick!(trials, 50),
            seed: cli.seed.or(file.seed),
            output,
            format,
            operator: pick!(operator, "s0".to_string()),
            dim: pick!(dim, 1),
            slack: pick!(slack, dyadic_lab::norms::experiment::DEFAULT_SLACK),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.subcommand.is_randomized() && self.seed.is_none() {
            return bad(format!(
                "{} is randomized and needs --seed",
                self.subcommand.name()
            ));
        }
        let depth_cap = match self.subcommand {
            Subcommand::VerifyWeakForm | Subcommand::VerifyDistribution => MAX_TOSS_DEPTH,
            Subcommand::VerifyModulation => MAX_MODULATION_DEPTH,
            _ => MAX_MATERIALIZE_DEPTH,
        };
        if self.depth > depth_cap {
            return bad(format!("depth {} exceeds {depth_cap}", self.depth));
        }
        if self.order == 0 || self.order > MAX_ORDER {
            return bad(format!("order must lie in 1..={MAX_ORDER}"));
        }
        if !self.grid.is_power_of_two() || self.grid < 2 || self.grid > MAX_GRID {
            return bad(format!("grid must be a power of two in 2..={MAX_GRID}"));
        }
        if self.spaces.is_empty() || self.exponents.is_empty() {
            return bad("spaces and exponents must be non-empty".into());
        }
        if let Some(p) = self
            .exponents
            .iter()
            .find(|p| !(**p > 1.0 && p.is_finite()))
        {
            return bad(format!("exponent {p} is outside (1, inf)"));
        }
        if self.restarts == 0 || self.iterations == 0 || self.trials == 0 || self.dim == 0 {
            return bad("restarts, iterations, trials and dim must be positive".into());
        }
        if !(self.tol > 0.0) || !(self.slack >= 1.0) {
            return bad("tol must be positive and slack at least 1".into());
        }
        Ok(())
    }
}

/// `key=value` pairs joined by `;`, echoed in every record.
impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let spaces: Vec<String> = self.spaces.iter().map(|s| s.label()).collect();
        let exps: Vec<String> = self.exponents.iter().map(|p| p.to_string()).collect();
        write!(
            f,
            "subcommand={};depth={};grid={};order={};spaces={};exponents={};restarts={};\
             iterations={};tol={:e};trials={};seed={};format={};operator={};dim={};slack={}",
            self.subcommand.name(),
            self.depth,
            self.grid,
            self.order,
            spaces.join("|"),
            exps.join("|"),
            self.restarts,
            self.iterations,
            self.tol,
            self.trials,
            self.seed
                .map_or_else(|| "none".to_string(), |s| s.to_string()),
            self.format.extension(),
            self.operator,
            self.dim,
            self.slack
        )
    }
}
