//! Sign-deviation detection, VIF, norm-based significance reports and the
//! advisory cause classification.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::dataset::{center, CenteredData, Dataset};
use crate::decomposition::{t_star, univariate_slopes};
use crate::error::{LensError, Result};
use crate::linalg;
use crate::regression::{fit_ols, t_critical, ConventionalStats, FitResult, Magnitude};
use crate::remedies::StructureComparison;

/// Two-sided significance level used when none is given.
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Slopes smaller than this multiple of `‖y⃗‖/‖x⃗ⱼ‖` count as sign 0.
pub const ZERO_SLOPE_TOLERANCE: f64 = 1e-12;

/// `R²ⱼ` at or above `1 - VIF_SATURATION` reports an infinite VIF.
pub const VIF_SATURATION: f64 = 1e-12;

/// Sign of `value` with values below `scale · ZERO_SLOPE_TOLERANCE` mapped to 0.
pub(crate) fn sign_with_scale(value: f64, scale: f64) -> i8 {
    if value.abs() <= ZERO_SLOPE_TOLERANCE * scale || value == 0.0 {
        0
    } else if value > 0.0 {
        1
    } else {
        -1
    }
}

/// Opposite strict signs.
pub(crate) fn deviates(univariate: f64, partial: f64, scale: f64) -> bool {
    sign_with_scale(univariate, scale) * sign_with_scale(partial, scale) < 0
}

pub(crate) fn slope_scale(cd: &CenteredData, j: usize) -> f64 {
    cd.y().norm() / cd.column(j).norm()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignDeviation {
    pub name: String,
    pub univariate_slope: f64,
    pub partial_slope: f64,
    pub flagged: bool,
}

pub fn sign_expectation_deviation(data: &Dataset) -> Result<Vec<SignDeviation>> {
    let cd = center(data)?;
    let fit = fit_ols(&cd)?;
    let uni = univariate_slopes(&cd)?;
    Ok((0..cd.p())
        .map(|j| SignDeviation {
            name: cd.names()[j].clone(),
            univariate_slope: uni[j],
            partial_slope: fit.slopes[j],
            flagged: deviates(uni[j], fit.slopes[j], slope_scale(&cd, j)),
        })
        .collect())
}

/// `1 / (1 - R²ⱼ)` with `R²ⱼ` from regressing `xⱼ` on the remaining regressors.
pub fn vif(cd: &CenteredData) -> Result<Vec<Magnitude>> {
    let p = cd.p();
    if p < 2 {
        return Err(LensError::InvalidArgument(
            "VIF needs at least two regressors".into(),
        ));
    }
    cd.check_nondegenerate()?;
    fit_ols(cd)?;
    Ok((0..p)
        .map(|j| {
            let others: Vec<usize> = (0..p).filter(|&k| k != j).collect();
            let rest = linalg::select_columns(cd.x(), &others);
            let xj = cd.column(j).into_owned();
            let resid = linalg::residualize(&rest, &xj);
            let r2 = 1.0 - resid.norm_squared() / xj.norm_squared();
            if r2 >= 1.0 - VIF_SATURATION {
                Magnitude::Infinite
            } else {
                Magnitude::Finite(1.0 / (1.0 - r2))
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariableReport {
    pub name: String,
    pub univariate_slope: f64,
    pub partial_slope: f64,
    pub sign_deviation: bool,
    /// `√(n-1)·‖b̂x⃗ⱼ‖/‖û_uni‖` for the regression of `y` on `xⱼ` alone.
    pub univariate_t: Magnitude,
    pub univariate_significant: bool,
    /// `√(n-p)·‖û_{j·rest}‖/‖û‖`
    pub t_net: Magnitude,
    pub partial_significant: bool,
    pub t_star: Magnitude,
    pub vif: Magnitude,
    /// `‖β̂ⱼx⃗ⱼ‖`
    pub component_norm: f64,
    /// `‖û_{j·rest}‖`
    pub net_component_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometricSummary {
    pub response_norm: f64,
    pub fitted_norm: f64,
    pub residual_norm: f64,
    /// `|‖y⃗‖² - ‖ŷ⃗‖² - ‖û‖²| / ‖y⃗‖²`
    pub pythagorean_gap: f64,
    pub pythagorean_holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassificationHint {
    None,
    SampleSelectionSuspected,
    StructureSuspected,
    Indeterminate,
}

/// Advisory reading of why coefficients look the way they do; never a verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub hint: ClassificationHint,
    pub advisory: bool,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub n: usize,
    pub p: usize,
    pub df: usize,
    pub alpha: f64,
    pub t_critical: f64,
    pub univariate_t_critical: f64,
    pub per_variable: Vec<VariableReport>,
    pub correlation_matrix: Vec<Vec<f64>>,
    pub geometric: GeometricSummary,
    pub r_squared: f64,
    pub f_stat: Magnitude,
    pub f_critical: f64,
    pub f_significant: bool,
    pub conventional: Option<ConventionalStats>,
    pub classification: Classification,
}

pub fn geometric_report(data: &Dataset, alpha: f64) -> Result<DiagnosticsReport> {
    let cd = center(data)?;
    let fit = fit_ols(&cd)?;
    report_from_fit(&cd, &fit, alpha)
}

pub(crate) fn report_from_fit(
    cd: &CenteredData,
    fit: &FitResult,
    alpha: f64,
) -> Result<DiagnosticsReport> {
    let n = cd.n();
    let p = cd.p();
    let t_crit = t_critical(alpha, fit.df)?;
    let t_crit_uni = t_critical(alpha, n - 1)?;
    let uni = univariate_slopes(cd)?;
    let vifs = if p >= 2 {
        vif(cd)?
    } else {
        vec![Magnitude::Finite(1.0)]
    };
    let y_sq = cd.y().norm_squared();

    let mut per_variable = Vec::with_capacity(p);
    for j in 0..p {
        let x_norm = cd.column(j).norm();
        let uni_component = uni[j].abs() * x_norm;
        let uni_resid = (y_sq - uni_component * uni_component).max(0.0).sqrt();
        let uni_resid = if uni_resid <= crate::regression::EXACT_FIT_TOLERANCE * y_sq.sqrt() {
            0.0
        } else {
            uni_resid
        };
        let univariate_t = Magnitude::ratio(((n - 1) as f64).sqrt() * uni_component, uni_resid);
        per_variable.push(VariableReport {
            name: cd.names()[j].clone(),
            univariate_slope: uni[j],
            partial_slope: fit.slopes[j],
            sign_deviation: deviates(uni[j], fit.slopes[j], slope_scale(cd, j)),
            univariate_t,
            univariate_significant: univariate_t.exceeds(t_crit_uni),
            t_net: fit.t_values[j],
            partial_significant: fit.t_values[j].exceeds(t_crit),
            t_star: t_star(fit, cd, j)?,
            vif: vifs[j],
            component_norm: fit.component_norm(j),
            net_component_norm: fit.net_component_norm(j),
        });
    }

    let correlation_matrix = (0..p)
        .map(|i| {
            (0..p)
                .map(|j| {
                    if i == j {
                        1.0
                    } else {
                        let (a, b) = (cd.column(i), cd.column(j));
                        a.dot(&b) / (a.norm() * b.norm())
                    }
                })
                .collect()
        })
        .collect();

    let gap = if fit.tss == 0.0 {
        0.0
    } else {
        (fit.tss - fit.ess - fit.rss).abs() / fit.tss
    };
    let geometric = GeometricSummary {
        response_norm: fit.tss.sqrt(),
        fitted_norm: fit.ess.sqrt(),
        residual_norm: fit.rss.sqrt(),
        pythagorean_gap: gap,
        pythagorean_holds: gap <= 1e-8,
    };

    let f_dist = FisherSnedecor::new(p as f64, fit.df as f64)
        .map_err(|e| LensError::InvalidArgument(e.to_string()))?;
    let f_critical = f_dist.inverse_cdf(1.0 - alpha);

    let mut report = DiagnosticsReport {
        n,
        p,
        df: fit.df,
        alpha,
        t_critical: t_crit,
        univariate_t_critical: t_crit_uni,
        per_variable,
        correlation_matrix,
        geometric,
        r_squared: fit.r_squared,
        f_stat: fit.f_stat,
        f_critical,
        f_significant: fit.f_stat.exceeds(f_critical),
        conventional: fit.conventional(),
        classification: Classification {
            hint: ClassificationHint::None,
            advisory: true,
            rationale: String::new(),
        },
    };
    report.classification = classify_report(&report, None)?;
    Ok(report)
}

/// Heuristic cause reading at [`DEFAULT_ALPHA`].
pub fn classify_cause(
    data: &Dataset,
    diff: Option<&StructureComparison>,
) -> Result<Classification> {
    let report = geometric_report(data, DEFAULT_ALPHA)?;
    classify_report(&report, diff)
}

/// Rules, in order:
/// 1. a sign deviation that also appears inside the difference model, or one
///    whose reversed partial slope is itself significant, suggests structure;
/// 2. any other sign deviation is indeterminate;
/// 3. without deviations, a significant univariate slope whose partial slope
///    is insignificant suggests sample selection;
/// 4. otherwise nothing is flagged.
pub fn classify_report(
    report: &DiagnosticsReport,
    diff: Option<&StructureComparison>,
) -> Result<Classification> {
    if let Some(cmp) = diff {
        let names: Vec<&str> = report
            .per_variable
            .iter()
            .map(|v| v.name.as_str())
            .collect();
        let cmp_names: Vec<&str> = cmp.names.iter().map(String::as_str).collect();
        if names != cmp_names {
            return Err(LensError::DimensionMismatch(
                "difference comparison covers different variables".into(),
            ));
        }
    }
    let deviating: Vec<usize> = report
        .per_variable
        .iter()
        .enumerate()
        .filter(|(_, v)| v.sign_deviation)
        .map(|(j, _)| j)
        .collect();
    let names_of = |idx: &[usize]| {
        idx.iter()
            .map(|&j| report.per_variable[j].name.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    };

    let (hint, rationale) = if !deviating.is_empty() {
        let persisting: Vec<usize> = match diff {
            Some(cmp) => deviating
                .iter()
                .copied()
                .filter(|&j| cmp.difference_deviation[j])
                .collect(),
            None => Vec::new(),
        };
        let significant: Vec<usize> = deviating
            .iter()
            .copied()
            .filter(|&j| report.per_variable[j].partial_significant)
            .collect();
        if !persisting.is_empty() {
            (
                ClassificationHint::StructureSuspected,
                format!(
                    "sign deviation on [{}] persists in the difference model",
                    names_of(&persisting)
                ),
            )
        } else if !significant.is_empty() {
            (
                ClassificationHint::StructureSuspected,
                format!(
                    "sign deviation on [{}] with a significant partial slope",
                    names_of(&significant)
                ),
            )
        } else {
            let why = if diff.is_some() {
                "the difference model does not reproduce it"
            } else {
                "no difference-model evidence was supplied"
            };
            (
                ClassificationHint::Indeterminate,
                format!(
                    "sign deviation on [{}] with insignificant partial slopes; {why}",
                    names_of(&deviating)
                ),
            )
        }
    } else {
        let masked: Vec<usize> = report
            .per_variable
            .iter()
            .enumerate()
            .filter(|(_, v)| v.univariate_significant && !v.partial_significant)
            .map(|(j, _)| j)
            .collect();
        if !masked.is_empty() {
            (
                ClassificationHint::SampleSelectionSuspected,
                format!(
                    "[{}] significant alone but not in the joint model, with no sign deviation",
                    names_of(&masked)
                ),
            )
        } else {
            (
                ClassificationHint::None,
                "no sign deviation and no masked significance".to_string(),
            )
        }
    };
    Ok(Classification {
        hint,
        advisory: true,
        rationale,
    })
}
