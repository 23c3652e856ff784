use std::path::Path;

use collinear_lens_core::dataset::center;
use collinear_lens_core::decomposition::{
    b_matrix, cumulative_weights, decompose, differences, effect_matrix, fwl_residualize,
    inner_product_slope, t_star, univariate_slopes, BMatrix,
};
use collinear_lens_core::diagnostics::{classify_report, geometric_report};
use collinear_lens_core::montecarlo::{
    reference_value, reproduce_tables_with, run_experiment_with, DgpConfig, Execution,
    ExperimentResult, TableGrid, TableId,
};
use collinear_lens_core::regression::{
    confidence_interval, fit_ols, ConfidenceInterval, ConventionalStats, FitResult, Magnitude,
};
use collinear_lens_core::remedies::{
    default_lambda_grid, difference_model, ridge_path, structure_compare, RidgePath,
    StructureComparison,
};
use collinear_lens_core::{Dataset, LensError};
use serde::Serialize;
use serde_json::Value;

use crate::config::{RunConfig, Subcommand};
use crate::csv_io::read_csv;
use crate::error::CliError;
use crate::report::{to_value, ReportEnvelope, TOOL_VERSION};

/// Points in the default ridge grid, not counting the leading `λ = 0`.
pub const DEFAULT_RIDGE_POINTS: usize = 50;

pub const DEFAULT_SIM_N: usize = 30;
pub const DEFAULT_SIM_RHO: f64 = 0.8;
pub const DEFAULT_SIM_BETA1: f64 = -0.1;

#[derive(Serialize)]
struct FitPayload {
    fit: FitResult,
    conventional: Option<ConventionalStats>,
    intervals: Vec<ConfidenceInterval>,
    t_star: Vec<Magnitude>,
}

#[derive(Serialize)]
struct ResidualizedSummary {
    name: String,
    slope: f64,
    t_value: Magnitude,
    net_component_norm: f64,
    y_resid_norm: f64,
    residual_norm: f64,
}

#[derive(Serialize)]
struct DecomposePayload {
    names: Vec<String>,
    b_matrix: BMatrix,
    b_condition_number: f64,
    partial_slopes: Vec<f64>,
    univariate_slopes: Vec<f64>,
    /// `B · partial_slopes`
    reconstructed_univariates: Vec<f64>,
    max_identity_gap: f64,
    /// Row `i`: contributions `partial_j · b̂_{j,i}` summing to the univariate slope of `xᵢ`.
    effects: Vec<Vec<f64>>,
    /// `⟨w, Δy⟩` per regressor in row order.
    inner_product_slopes: Vec<f64>,
    residualized: Vec<ResidualizedSummary>,
    t_star: Vec<Magnitude>,
}

#[derive(Serialize)]
struct RidgePayload {
    path: RidgePath,
    ols_slopes: Vec<f64>,
}

#[derive(Serialize)]
struct DifferencePayload {
    original: FitResult,
    difference: FitResult,
    comparison: StructureComparison,
}

#[derive(Serialize)]
struct ExperimentPayload {
    experiment: ExperimentResult,
    reference: Option<f64>,
}

pub fn run(config: &RunConfig) -> Result<ReportEnvelope, CliError> {
    let mut warnings: Vec<String> = config
        .ignored_options()
        .into_iter()
        .map(|o| format!("{o} is ignored by `{}`", config.subcommand.name()))
        .collect();
    let mut preamble = None;
    let payload = match config.subcommand {
        Subcommand::Fit => fit_payload(&load(config)?, config.alpha)?,
        Subcommand::Decompose => decompose_payload(&load(config)?)?,
        Subcommand::Diagnose => diagnose_payload(&load(config)?, config, &mut warnings)?,
        Subcommand::Ridge => ridge_payload(&load(config)?, config)?,
        Subcommand::Difference => difference_payload(&load(config)?, config, &mut warnings)?,
        Subcommand::Simulate => simulate_payload(config, &mut warnings, &mut preamble)?,
    };
    Ok(ReportEnvelope {
        tool_version: TOOL_VERSION.to_string(),
        subcommand: config.subcommand.name().to_string(),
        config_echo: config.clone(),
        payload,
        warnings,
        text_preamble: preamble,
    })
}

fn load(config: &RunConfig) -> Result<Dataset, CliError> {
    let path = config
        .input_path
        .as_deref()
        .ok_or_else(|| CliError::Config("missing --input".into()))?;
    read_csv(Path::new(path), config.response_column.as_deref())
}

fn fit_payload(data: &Dataset, alpha: f64) -> Result<Value, CliError> {
    let cd = center(data)?;
    let fit = fit_ols(&cd)?;
    let intervals = (0..fit.p)
        .map(|j| confidence_interval(&fit, j, alpha))
        .collect::<Result<Vec<_>, _>>()?;
    let stars = (0..fit.p)
        .map(|j| t_star(&fit, &cd, j))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(to_value(&FitPayload {
        conventional: fit.conventional(),
        fit,
        intervals,
        t_star: stars,
    }))
}

fn decompose_payload(data: &Dataset) -> Result<Value, CliError> {
    let cd = center(data)?;
    let fit = fit_ols(&cd)?;
    let b = b_matrix(&cd)?;
    let uni = univariate_slopes(&cd)?;
    let recon = decompose(&b, &fit.slopes)?;
    let max_identity_gap = recon
        .iter()
        .zip(&uni)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let effects = effect_matrix(&b, &fit.slopes)?;
    let dy = differences(data.response());
    let inner = data
        .regressors()
        .map(|c| inner_product_slope(&cumulative_weights(&c.values)?, &dy))
        .collect::<Result<Vec<_>, LensError>>()?;
    let residualized = if cd.p() >= 2 {
        (0..cd.p())
            .map(|j| {
                fwl_residualize(&cd, j).map(|r| ResidualizedSummary {
                    y_resid_norm: r.y_resid_norm(),
                    residual_norm: r.residual_norm(),
                    name: r.name,
                    slope: r.slope,
                    t_value: r.t_value,
                    net_component_norm: r.net_component_norm,
                })
            })
            .collect::<Result<Vec<_>, _>>()?
    } else {
        Vec::new()
    };
    let stars = (0..cd.p())
        .map(|j| t_star(&fit, &cd, j))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(to_value(&DecomposePayload {
        names: cd.names().to_vec(),
        b_condition_number: b.condition_number(),
        effects: effects
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect(),
        b_matrix: b,
        partial_slopes: fit.slopes,
        univariate_slopes: uni,
        reconstructed_univariates: recon,
        max_identity_gap,
        inner_product_slopes: inner,
        residualized,
        t_star: stars,
    }))
}

fn diagnose_payload(
    data: &Dataset,
    config: &RunConfig,
    warnings: &mut Vec<String>,
) -> Result<Value, CliError> {
    let mut report = geometric_report(data, config.alpha)?;
    let mut comparison = None;
    if config.ordered {
        check_order(data, warnings);
        let cd = center(data)?;
        let cmp = structure_compare(&fit_ols(&cd)?, &difference_model(data)?, data)?;
        report.classification = classify_report(&report, Some(&cmp))?;
        comparison = Some(cmp);
    }
    let mut value = to_value(&report);
    if let Value::Object(map) = &mut value {
        map.insert(
            "difference_comparison".into(),
            comparison.map(|c| to_value(&c)).unwrap_or(Value::Null),
        );
    }
    Ok(value)
}

fn ridge_payload(data: &Dataset, config: &RunConfig) -> Result<Value, CliError> {
    let cd = center(data)?;
    let grid = match &config.lambda_grid {
        Some(g) => g.values(),
        None => {
            let mut g = vec![0.0];
            g.extend(default_lambda_grid(&cd, DEFAULT_RIDGE_POINTS));
            g
        }
    };
    let path = ridge_path(&cd, &grid).map_err(|e| match e {
        LensError::InvalidArgument(m) => CliError::Config(m),
        other => other.into(),
    })?;
    let ols_slopes = fit_ols(&cd)?.slopes;
    Ok(to_value(&RidgePayload { path, ols_slopes }))
}

fn difference_payload(
    data: &Dataset,
    config: &RunConfig,
    warnings: &mut Vec<String>,
) -> Result<Value, CliError> {
    if !config.ordered {
        return Err(CliError::Config(
            "`difference` needs --ordered to confirm that row order is meaningful".into(),
        ));
    }
    check_order(data, warnings);
    let original = fit_ols(&center(data)?)?;
    let difference = difference_model(data)?;
    let comparison = structure_compare(&original, &difference, data)?;
    Ok(to_value(&DifferencePayload {
        original,
        difference,
        comparison,
    }))
}

/// Lag-one autocorrelation with the full-sample mean.
pub fn lag_one_autocorrelation(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let den: f64 = v.iter().map(|x| (x - m) * (x - m)).sum();
    if den == 0.0 {
        return 0.0;
    }
    let num: f64 = v.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    num / den
}

/// Rows look exchangeable when no column shows lag-one autocorrelation
/// beyond `2/√n`.
pub fn looks_unordered(data: &Dataset) -> bool {
    let bound = 2.0 / (data.n() as f64).sqrt();
    data.columns()
        .iter()
        .all(|c| lag_one_autocorrelation(&c.values).abs() < bound)
}

fn check_order(data: &Dataset, warnings: &mut Vec<String>) {
    if looks_unordered(data) {
        warnings.push(format!(
            "--ordered was given but no column shows lag-one autocorrelation above 2/sqrt(n) = {:.4}; \
             differences of arbitrarily ordered rows carry no extra information",
            2.0 / (data.n() as f64).sqrt()
        ));
    }
}

fn execute<T: Send>(
    threads: usize,
    job: impl FnOnce(Execution) -> T + Send,
) -> Result<T, CliError> {
    match threads {
        0 => Ok(job(Execution::Parallel)),
        1 => Ok(job(Execution::Serial)),
        k => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| CliError::Config(format!("cannot start {k} threads: {e}")))?;
            Ok(pool.install(|| job(Execution::Parallel)))
        }
    }
}

fn simulate_payload(
    config: &RunConfig,
    warnings: &mut Vec<String>,
    preamble: &mut Option<String>,
) -> Result<Value, CliError> {
    let single = config.n.is_some() || config.rho.is_some() || config.beta1.is_some();
    if single {
        if config.table.is_some() {
            warnings.push("--table is ignored when --n, --rho or --beta1 is given".into());
        }
        let dgp = DgpConfig::standard(
            config.beta1.unwrap_or(DEFAULT_SIM_BETA1),
            config.rho.unwrap_or(DEFAULT_SIM_RHO),
            config.n.unwrap_or(DEFAULT_SIM_N),
        )
        .with_seed(config.seed)
        .with_trials(config.trials);
        dgp.validate().map_err(config_error)?;
        let experiment = execute(config.threads, |ex| run_experiment_with(&dgp, ex))??;
        let table = if dgp.beta1 < 0.0 {
            TableId::PopulationStructure
        } else {
            TableId::SampleSelection
        };
        let reference = reference_value(table, dgp.n, dgp.rho, dgp.beta1);
        *preamble = Some(crate::text::experiment_summary(&experiment, reference));
        return Ok(to_value(&ExperimentPayload {
            experiment,
            reference,
        }));
    }
    let which: Vec<TableId> = match config.table {
        Some(k) => vec![TableId::from_number(k).expect("validated table number")],
        None => vec![TableId::PopulationStructure, TableId::SampleSelection],
    };
    let grid: TableGrid = execute(config.threads, |ex| {
        reproduce_tables_with(config.seed, config.trials, &which, ex)
    })??;
    for t in &grid.tables {
        warnings.extend(t.warnings.iter().map(|w| format!("table {}: {w}", t.table)));
    }
    *preamble = Some(crate::text::table_layout(&grid));
    Ok(to_value(&grid))
}

fn config_error(e: LensError) -> CliError {
    match e {
        LensError::InvalidArgument(m) => CliError::Config(m),
        other => other.into(),
    }
}
