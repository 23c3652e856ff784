//! Centered least squares and the norm-based significance statistics.
//!
//! Every statistic here uses `df = n - p` on centered data: the intercept is
//! absorbed by centering and not counted. [`FitResult::conventional`] gives the
//! usual `n - p - 1` variants for comparison.

use nalgebra::DVector;
use serde::{Serialize, Serializer};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dataset::CenteredData;
use crate::error::{LensError, Result};
use crate::linalg;

/// Relative singular-value cutoff separating exact from near collinearity.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Residual norms at or below this fraction of `‖y⃗‖` are treated as an exact fit.
pub const EXACT_FIT_TOLERANCE: f64 = 1e-12;

/// A non-negative statistic that may be unbounded, e.g. a t value when the
/// residual vector vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Magnitude {
    Finite(f64),
    Infinite,
}

impl Magnitude {
    /// `num / den` for non-negative operands, with `0 / 0 = 0`.
    pub fn ratio(num: f64, den: f64) -> Magnitude {
        if num == 0.0 {
            Magnitude::Finite(0.0)
        } else if den == 0.0 {
            Magnitude::Infinite
        } else {
            Magnitude::Finite(num / den)
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Magnitude::Finite(v) => v,
            Magnitude::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Magnitude::Infinite)
    }

    pub fn exceeds(self, threshold: f64) -> bool {
        self.value() > threshold
    }
}

impl Serialize for Magnitude {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Magnitude::Finite(v) => s.serialize_f64(*v),
            Magnitude::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub names: Vec<String>,
    pub response: String,
    pub n: usize,
    pub p: usize,
    /// `n - p`.
    pub df: usize,
    pub slopes: Vec<f64>,
    pub intercept: f64,
    /// Fitted values on the original response scale.
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `‖y⃗‖²`
    pub tss: f64,
    /// `‖ŷ⃗‖²`
    pub ess: f64,
    /// `‖û‖²`
    pub rss: f64,
    pub r_squared: f64,
    /// `‖û‖² / (n - p)`
    pub sigma_sq: f64,
    pub std_errors: Vec<f64>,
    /// `√(n-p)·‖û_{j·rest}‖ / ‖û‖`; unsigned, the sign is the slope's.
    pub t_values: Vec<Magnitude>,
    pub f_stat: Magnitude,
    /// `‖x⃗ⱼ‖`
    pub column_norms: Vec<f64>,
    /// `‖v̂ⱼ‖`, the residual norm of `x⃗ⱼ` regressed on the other regressors.
    pub partial_residual_norms: Vec<f64>,
}

/// Statistics under the textbook intercept convention, `df = n - p - 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConventionalStats {
    pub df: usize,
    pub sigma_sq: f64,
    pub std_errors: Vec<f64>,
    /// `|β̂ⱼ| / se`; the sign is the slope's.
    pub t_values: Vec<Magnitude>,
    pub f_stat: Magnitude,
    pub adjusted_r_squared: f64,
}

impl FitResult {
    pub fn residual_norm(&self) -> f64 {
        self.rss.sqrt()
    }

    pub fn response_norm(&self) -> f64 {
        self.tss.sqrt()
    }

    pub fn is_exact(&self) -> bool {
        self.rss == 0.0
    }

    /// `‖β̂ⱼx⃗ⱼ‖`
    pub fn component_norm(&self, j: usize) -> f64 {
        self.slopes[j].abs() * self.column_norms[j]
    }

    /// `‖û_{j·rest}‖ = |β̂ⱼ|·‖v̂ⱼ‖`, the part of `β̂ⱼx⃗ⱼ` not explained by the other regressors.
    pub fn net_component_norm(&self, j: usize) -> f64 {
        self.slopes[j].abs() * self.partial_residual_norms[j]
    }

    /// `1 - R²ⱼ` where `R²ⱼ` comes from regressing `xⱼ` on the other regressors.
    pub fn tolerance(&self, j: usize) -> f64 {
        let ratio = self.partial_residual_norms[j] / self.column_norms[j];
        ratio * ratio
    }

    /// `None` when `n - p - 1 < 1`.
    pub fn conventional(&self) -> Option<ConventionalStats> {
        let df = self.n.checked_sub(self.p + 1).filter(|&d| d > 0)?;
        let sigma_sq = self.rss / df as f64;
        let std_errors: Vec<f64> = self
            .partial_residual_norms
            .iter()
            .map(|v| (sigma_sq / (v * v)).sqrt())
            .collect();
        let t_values = self
            .slopes
            .iter()
            .zip(&std_errors)
            .map(|(b, se)| Magnitude::ratio(b.abs(), *se))
            .collect();
        let f_stat = Magnitude::ratio(self.ess / self.p as f64, sigma_sq);
        let adjusted_r_squared = if self.tss == 0.0 {
            0.0
        } else {
            1.0 - (self.rss / df as f64) / (self.tss / (self.n - 1) as f64)
        };
        Some(ConventionalStats {
            df,
            sigma_sq,
            std_errors,
            t_values,
            f_stat,
            adjusted_r_squared,
        })
    }
}

/// Ordinary least squares of the centered response on all centered regressors.
pub fn fit_ols(cd: &CenteredData) -> Result<FitResult> {
    let n = cd.n();
    let p = cd.p();
    cd.check_nondegenerate()?;
    let x = cd.x();
    let ratio = linalg::singular_value_ratio(&linalg::equilibrate(x));
    if ratio <= RANK_TOLERANCE {
        let cols = linalg::dependent_columns(x, RANK_TOLERANCE);
        return Err(LensError::CompleteMulticollinearity {
            columns: cols.iter().map(|&j| cd.names()[j].clone()).collect(),
            ratio,
        });
    }

    let sol = linalg::qr_least_squares(x, cd.y());
    let slopes: Vec<f64> = sol.coef.iter().copied().collect();
    let y = cd.y();
    let tss = y.norm_squared();

    let mut fitted_c: DVector<f64> = x * &sol.coef;
    let mut resid: DVector<f64> = y - &fitted_c;
    if resid.norm() <= EXACT_FIT_TOLERANCE * tss.sqrt() {
        resid.fill(0.0);
        fitted_c = y.clone();
    }
    let rss = resid.norm_squared();
    let ess = fitted_c.norm_squared();
    let r_squared = if tss == 0.0 {
        0.0
    } else {
        (ess / tss).min(1.0)
    };
    let df = n - p;
    let sigma_sq = rss / df as f64;

    let column_norms: Vec<f64> = (0..p).map(|j| x.column(j).norm()).collect();
    let partial_residual_norms: Vec<f64> = if p == 1 {
        column_norms.clone()
    } else {
        sol.gram_inverse_diag
            .iter()
            .map(|d| 1.0 / d.sqrt())
            .collect()
    };
    let std_errors = partial_residual_norms
        .iter()
        .map(|v| (sigma_sq / (v * v)).sqrt())
        .collect();
    let sqrt_df = (df as f64).sqrt();
    let resid_norm = rss.sqrt();
    let t_values = (0..p)
        .map(|j| {
            Magnitude::ratio(
                sqrt_df * slopes[j].abs() * partial_residual_norms[j],
                resid_norm,
            )
        })
        .collect();
    let f_stat = Magnitude::ratio(ess / p as f64, rss / df as f64);

    let intercept = cd.y_mean()
        - slopes
            .iter()
            .zip(cd.x_means())
            .map(|(b, m)| b * m)
            .sum::<f64>();

    Ok(FitResult {
        names: cd.names().to_vec(),
        response: cd.response_name().to_string(),
        n,
        p,
        df,
        slopes,
        intercept,
        fitted: fitted_c.iter().map(|v| v + cd.y_mean()).collect(),
        residuals: resid.iter().copied().collect(),
        tss,
        ess,
        rss,
        r_squared,
        sigma_sq,
        std_errors,
        t_values,
        f_stat,
        column_norms,
        partial_residual_norms,
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Slope of `y` on `x` alone: `⟨x⃗, y⃗⟩ / ⟨x⃗, x⃗⟩` on centered data.
pub fn fit_univariate(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(LensError::DimensionMismatch(format!(
            "x has {} entries, y has {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(LensError::TooFewObservations {
            n: x.len(),
            required: 2,
        });
    }
    let mx = mean(x);
    let my = mean(y);
    let xc: Vec<f64> = x.iter().map(|v| v - mx).collect();
    let sxx: f64 = xc.iter().map(|v| v * v).sum();
    let scale = xc.iter().fold(mx.abs(), |a, v| a.max(v.abs())) * (x.len() as f64).sqrt();
    if sxx == 0.0 || sxx.sqrt() <= 1e-12 * scale {
        return Err(LensError::DegenerateRegressor("x".into()));
    }
    let sxy: f64 = xc.iter().zip(y).map(|(a, b)| a * (b - my)).sum();
    Ok(sxy / sxx)
}

/// Univariate slope between two already-centered vectors.
pub(crate) fn centered_slope(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    x.dot(y) / x.norm_squared()
}

/// Two-sided Student-t critical value `t_{α/2, df}`.
pub fn t_critical(alpha: f64, df: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(LensError::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if df == 0 {
        return Err(LensError::InvalidArgument("zero degrees of freedom".into()));
    }
    let dist = StudentsT::new(0.0, 1.0, df as f64)
        .map_err(|e| LensError::InvalidArgument(e.to_string()))?;
    Ok(dist.inverse_cdf(1.0 - alpha / 2.0))
}

/// The interval rewritten as `β̂ⱼ(1 ± (t/√df)·‖û‖ / (‖β̂ⱼx⃗ⱼ‖·√(1-R²ⱼ)))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormRatioForm {
    pub residual_norm: f64,
    pub component_norm: f64,
    /// `1 - R²ⱼ`
    pub tolerance: f64,
    /// `(t/√df)·‖û‖ / (‖β̂ⱼx⃗ⱼ‖·√(1-R²ⱼ))`; below 1 means significant.
    pub relative_half_width: f64,
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    pub name: String,
    pub estimate: f64,
    pub alpha: f64,
    pub df: usize,
    pub t_critical: f64,
    pub std_error: f64,
    pub low: f64,
    pub high: f64,
    /// Absent when `β̂ⱼx⃗ⱼ` is negligible against `y⃗`, where the
    /// multiplicative form is undefined.
    pub norm_ratio: Option<NormRatioForm>,
}

pub fn confidence_interval(fit: &FitResult, j: usize, alpha: f64) -> Result<ConfidenceInterval> {
    if j >= fit.p {
        return Err(LensError::InvalidArgument(format!(
            "coefficient index {j} out of range for p = {}",
            fit.p
        )));
    }
    let t = t_critical(alpha, fit.df)?;
    let estimate = fit.slopes[j];
    let se = fit.std_errors[j];
    let negligible = fit.component_norm(j) <= EXACT_FIT_TOLERANCE * fit.response_norm();
    let norm_ratio = (!negligible).then(|| {
        let tolerance = fit.tolerance(j);
        let rel = (t / (fit.df as f64).sqrt()) * fit.residual_norm()
            / (fit.component_norm(j) * tolerance.sqrt());
        let a = estimate * (1.0 - rel);
        let b = estimate * (1.0 + rel);
        NormRatioForm {
            residual_norm: fit.residual_norm(),
            component_norm: fit.component_norm(j),
            tolerance,
            relative_half_width: rel,
            low: a.min(b),
            high: a.max(b),
        }
    });
    Ok(ConfidenceInterval {
        name: fit.names[j].clone(),
        estimate,
        alpha,
        df: fit.df,
        t_critical: t,
        std_error: se,
        low: estimate - t * se,
        high: estimate + t * se,
        norm_ratio,
    })
}
