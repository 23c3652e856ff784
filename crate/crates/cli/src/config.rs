use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Subcommand {
    /// Centered least-squares fit with norm-based t, F and intervals.
    Fit,
    /// B matrix, univariate/partial decomposition and residualized fits.
    Decompose,
    /// Sign deviations, VIF, geometric norms and cause hint.
    Diagnose,
    /// Ridge coefficient path.
    Ridge,
    /// First-difference model compared with the original fit.
    Difference,
    /// Sign-deviation Monte Carlo experiments.
    Simulate,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Fit => "fit",
            Subcommand::Decompose => "decompose",
            Subcommand::Diagnose => "diagnose",
            Subcommand::Ridge => "ridge",
            Subcommand::Difference => "difference",
            Subcommand::Simulate => "simulate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "collinear-lens",
    version,
    about = "Least-squares diagnostics for collinear designs"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub subcommand: Subcommand,
    /// CSV file with a header row; required except for `simulate`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Response column name (default: last column).
    #[arg(long)]
    pub response: Option<String>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Comma-separated λ values, or `log:LO:HI:N`.
    #[arg(long)]
    pub lambda_grid: Option<String>,
    /// Assert that row order is meaningful (required by `difference`).
    #[arg(long)]
    pub ordered: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Which table to reproduce; both when omitted.
    #[arg(long)]
    pub table: Option<u8>,
    /// Single-cell simulation: sample size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Single-cell simulation: correlation of the two regressors.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Single-cell simulation: coefficient on x1.
    #[arg(long, allow_negative_numbers = true)]
    pub beta1: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Worker threads for `simulate`; 1 runs serially, 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LambdaGrid {
    Explicit { values: Vec<f64> },
    Log { lo: f64, hi: f64, points: usize },
}

impl LambdaGrid {
    pub fn parse(spec: &str) -> Result<LambdaGrid, CliError> {
        let bad = |why: &str| CliError::Config(format!("λ grid `{spec}`: {why}"));
        if let Some(rest) = spec.strip_prefix("log:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(bad("expected log:LO:HI:N"));
            }
            let lo: f64 = parts[0]
                .trim()
                .parse()
                .map_err(|_| bad("LO is not a number"))?;
            let hi: f64 = parts[1]
                .trim()
                .parse()
                .map_err(|_| bad("HI is not a number"))?;
            let points: usize = parts[2]
                .trim()
                .parse()
                .map_err(|_| bad("N is not a count"))?;
            if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                return Err(bad("need 0 < LO < HI"));
            }
            if points < 2 {
                return Err(bad("need at least two points"));
            }
            return Ok(LambdaGrid::Log { lo, hi, points });
        }
        let values = spec
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad("expected comma-separated numbers"))?;
        Ok(LambdaGrid::Explicit { values })
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            LambdaGrid::Explicit { values } => values.clone(),
            LambdaGrid::Log { lo, hi, points } => {
                collinear_lens_core::remedies::log_grid(*lo, *hi, *points)
            }
        }
    }
}

/// Validated invocation, echoed back in every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub input_path: Option<String>,
    pub response_column: Option<String>,
    pub alpha: f64,
    pub lambda_grid: Option<LambdaGrid>,
    pub ordered: bool,
    pub seed: u64,
    pub output_format: OutputFormat,
    pub table: Option<u8>,
    pub n: Option<usize>,
    pub rho: Option<f64>,
    pub beta1: Option<f64>,
    pub trials: u64,
    /// Scheduling only; results do not depend on it, so it is not echoed.
    #[serde(skip)]
    pub threads: usize,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<RunConfig, CliError> {
        if cli.subcommand != Subcommand::Simulate && cli.input.is_none() {
            return Err(CliError::Config(format!(
                "`{}` needs --input",
                cli.subcommand.name()
            )));
        }
        if !(cli.alpha > 0.0 && cli.alpha < 1.0) {
            return Err(CliError::Config(format!(
                "--alpha must lie in (0, 1), got {}",
                cli.alpha
            )));
        }
        if let Some(t) = cli.table {
            if t != 1 && t != 2 {
                return Err(CliError::Config(format!("--table must be 1 or 2, got {t}")));
            }
        }
        if cli.trials == 0 {
            return Err(CliError::Config("--trials must be positive".into()));
        }
        let lambda_grid = cli
            .lambda_grid
            .as_deref()
            .map(LambdaGrid::parse)
            .transpose()?;
        Ok(RunConfig {
            subcommand: cli.subcommand,
            input_path: cli.input.map(|p| p.display().to_string()),
            response_column: cli.response,
            alpha: cli.alpha,
            lambda_grid,
            ordered: cli.ordered,
            seed: cli.seed,
            output_format: cli.format,
            table: cli.table,
            n: cli.n,
            rho: cli.rho,
            beta1: cli.beta1,
            trials: cli.trials,
            threads: cli.threads,
        })
    }

    /// Options that the chosen subcommand does not read.
    pub fn ignored_options(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let sim = self.subcommand == Subcommand::Simulate;
        if sim {
            if self.input_path.is_some() {
                out.push("--input");
            }
            if self.response_column.is_some() {
                out.push("--response");
            }
            if self.ordered {
                out.push("--ordered");
            }
        } else {
            if self.table.is_some() {
                out.push("--table");
            }
            if self.n.is_some() {
                out.push("--n");
            }
            if self.rho.is_some() {
                out.push("--rho");
            }
            if self.beta1.is_some() {
                out.push("--beta1");
            }
        }
        if self.lambda_grid.is_some() && self.subcommand != Subcommand::Ridge {
            out.push("--lambda-grid");
        }
        out
    }
}
