//! Common multicollinearity remedies, each paired with a check of what it
//! actually changes.
//!
//! * ridge shrinks every coefficient toward zero along a λ path;
//! * any invertible linear transform of the regressors, principal components
//!   included, back-substitutes to the original slopes exactly;
//! * dropping a regressor redistributes its effect through the B matrix;
//! * first differences estimate the same parameter structure in large samples.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dataset::{center, CenteredData, Dataset};
use crate::decomposition::{b_matrix, recover_partials, univariate_slopes};
use crate::diagnostics::{deviates, sign_with_scale, slope_scale};
use crate::error::{LensError, Result};
use crate::linalg;
use crate::regression::{fit_ols, FitResult};

/// Maximum condition number accepted for a regressor transform.
pub const MAX_TRANSFORM_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RidgePath {
    pub names: Vec<String>,
    pub lambdas: Vec<f64>,
    pub coefficients: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
}

/// Solves `(XᵀX + λI)β = Xᵀy` on centered data for each λ.
///
/// `λ = 0` is ordinary least squares and needs a full-rank design.
pub fn ridge_path(cd: &CenteredData, lambdas: &[f64]) -> Result<RidgePath> {
    if lambdas.is_empty() {
        return Err(LensError::InvalidArgument("empty λ grid".into()));
    }
    if let Some(bad) = lambdas.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(LensError::InvalidArgument(format!(
            "λ must be finite and non-negative, got {bad}"
        )));
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LensError::InvalidArgument(
            "λ grid must be strictly ascending".into(),
        ));
    }
    let x = cd.x();
    let p = cd.p();
    let gram = x.transpose() * x;
    let xty = x.transpose() * cd.y();
    let mut coefficients = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let beta: Vec<f64> = if lambda == 0.0 {
            fit_ols(cd)?.slopes
        } else {
            let a = &gram + DMatrix::identity(p, p) * lambda;
            let chol = a.cholesky().ok_or_else(|| {
                LensError::InvalidArgument(format!("XᵀX + {lambda}·I is not positive definite"))
            })?;
            chol.solve(&xty).iter().copied().collect()
        };
        coefficients.push(beta);
    }
    let norms = coefficients
        .iter()
        .map(|b| b.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    Ok(RidgePath {
        names: cd.names().to_vec(),
        lambdas: lambdas.to_vec(),
        coefficients,
        norms,
    })
}

/// `points` log-spaced values from `1e-4` to `1e4` times the mean diagonal of `XᵀX`.
pub fn default_lambda_grid(cd: &CenteredData, points: usize) -> Vec<f64> {
    let p = cd.p() as f64;
    let mean_diag = cd.x().column_iter().map(|c| c.norm_squared()).sum::<f64>() / p;
    log_grid(1e-4 * mean_diag, 1e4 * mean_diag, points)
}

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..points)
                .map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp())
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformRoundTrip {
    /// Row `k` holds the weights of `z_k` on the original regressors.
    pub transform: Vec<Vec<f64>>,
    pub original: FitResult,
    pub transformed: FitResult,
    /// `Tᵀ · (z slopes)`
    pub back_substituted: Vec<f64>,
    pub max_slope_gap: f64,
    pub max_fitted_gap: f64,
    pub max_residual_gap: f64,
    pub r_squared_gap: f64,
    /// Correlations among the transformed regressors.
    pub z_correlation: Vec<Vec<f64>>,
}

/// Regresses `y` on `Z = X·Tᵀ` and maps the slopes back through `Tᵀ`.
pub fn linear_transform_roundtrip(data: &Dataset, t: &DMatrix<f64>) -> Result<TransformRoundTrip> {
    let cd = center(data)?;
    let p = cd.p();
    if t.shape() != (p, p) {
        return Err(LensError::DimensionMismatch(format!(
            "transform is {}x{}, expected {p}x{p}",
            t.nrows(),
            t.ncols()
        )));
    }
    let condition = linalg::condition_number(t);
    if !(condition < MAX_TRANSFORM_CONDITION) {
        return Err(LensError::SingularTransform { condition });
    }
    let original = fit_ols(&cd)?;

    let z = cd.x() * t.transpose();
    let z_means = (t * DVector::from_column_slice(cd.x_means()))
        .iter()
        .copied()
        .collect();
    let names = (1..=p).map(|k| format!("z{k}")).collect();
    let cz = cd.with_design(names, z, z_means);
    let transformed = fit_ols(&cz)?;

    let back: Vec<f64> = (t.transpose() * DVector::from_column_slice(&transformed.slopes))
        .iter()
        .copied()
        .collect();
    let max_gap = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max)
    };
    let zx = cz.x();
    let z_correlation = (0..p)
        .map(|i| {
            (0..p)
                .map(|j| {
                    let (a, b) = (zx.column(i), zx.column(j));
                    a.dot(&b) / (a.norm() * b.norm())
                })
                .collect()
        })
        .collect();
    Ok(TransformRoundTrip {
        transform: t.row_iter().map(|r| r.iter().copied().collect()).collect(),
        max_slope_gap: max_gap(&back, &original.slopes),
        max_fitted_gap: max_gap(&transformed.fitted, &original.fitted),
        max_residual_gap: max_gap(&transformed.residuals, &original.residuals),
        r_squared_gap: (transformed.r_squared - original.r_squared).abs(),
        back_substituted: back,
        original,
        transformed,
        z_correlation,
    })
}

/// Rows are the eigenvectors of the centered Gram matrix, largest eigenvalue first.
pub fn principal_component_transform(cd: &CenteredData) -> DMatrix<f64> {
    let gram = cd.x().transpose() * cd.x();
    let eig = gram.symmetric_eigen();
    let mut order: Vec<usize> = (0..cd.p()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    DMatrix::from_fn(cd.p(), cd.p(), |k, j| eig.eigenvectors[(j, order[k])])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Elimination {
    pub removed: String,
    pub full: FitResult,
    pub reduced: FitResult,
    /// `R²(full) - R²(reduced)`, never negative beyond rounding.
    pub delta_r_squared: f64,
    /// Reduced-model slopes predicted from the B sub-block and the univariate slopes.
    pub redistributed: Vec<f64>,
    pub max_redistribution_gap: f64,
}

pub fn eliminate_variable(data: &Dataset, j: usize) -> Result<Elimination> {
    let p = data.p();
    if p < 2 {
        return Err(LensError::InvalidArgument(
            "cannot eliminate the only regressor".into(),
        ));
    }
    if j >= p {
        return Err(LensError::InvalidArgument(format!(
            "regressor index {j} out of range for p = {p}"
        )));
    }
    let cd = center(data)?;
    let full = fit_ols(&cd)?;
    let reduced_data = data.without_regressor(j)?;
    let reduced = fit_ols(&center(&reduced_data)?)?;

    let keep: Vec<usize> = (0..p).filter(|&k| k != j).collect();
    let b = b_matrix(&cd)?.submatrix(&keep);
    let uni = univariate_slopes(&cd)?;
    let uni_keep: Vec<f64> = keep.iter().map(|&k| uni[k]).collect();
    let redistributed = recover_partials(&b, &uni_keep)?;
    let max_redistribution_gap = redistributed
        .iter()
        .zip(&reduced.slopes)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(Elimination {
        removed: cd.names()[j].clone(),
        delta_r_squared: full.r_squared - reduced.r_squared,
        full,
        reduced,
        redistributed,
        max_redistribution_gap,
    })
}

/// First differences of every column, in the stored observation order.
pub fn difference_dataset(data: &Dataset) -> Result<Dataset> {
    let rows = data.n().saturating_sub(1);
    if data.n() < 3 || rows <= data.p() {
        return Err(LensError::InsufficientDifferencedSample { rows, p: data.p() });
    }
    data.map_columns(|_, v| v.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Least squares of `Δy` on `Δx₁..Δx_p` over the `n - 1` differenced rows.
///
/// The differences are centered before fitting, so no separate intercept is
/// estimated for the differenced model.
pub fn difference_model(data: &Dataset) -> Result<FitResult> {
    fit_ols(&center(&difference_dataset(data)?)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureComparison {
    pub names: Vec<String>,
    pub original_partials: Vec<f64>,
    pub difference_partials: Vec<f64>,
    pub original_univariates: Vec<f64>,
    pub difference_univariates: Vec<f64>,
    pub max_abs_gap: f64,
    /// Original and difference partial slopes share a sign.
    pub sign_agreement: Vec<bool>,
    /// Univariate and partial slopes disagree in the original model.
    pub original_deviation: Vec<bool>,
    /// Univariate and partial slopes disagree in the difference model.
    pub difference_deviation: Vec<bool>,
}

pub fn structure_compare(
    original: &FitResult,
    differenced: &FitResult,
    data: &Dataset,
) -> Result<StructureComparison> {
    let names = data.regressor_names();
    if original.names != names || differenced.names != names {
        return Err(LensError::DimensionMismatch(
            "fits and dataset cover different variable sets".into(),
        ));
    }
    let cd = center(data)?;
    let cd_diff = center(&difference_dataset(data)?)?;
    let original_univariates = univariate_slopes(&cd)?;
    let difference_univariates = univariate_slopes(&cd_diff)?;
    let p = names.len();

    let mut sign_agreement = Vec::with_capacity(p);
    let mut original_deviation = Vec::with_capacity(p);
    let mut difference_deviation = Vec::with_capacity(p);
    for j in 0..p {
        let (s, sd) = (slope_scale(&cd, j), slope_scale(&cd_diff, j));
        sign_agreement.push(
            sign_with_scale(original.slopes[j], s) == sign_with_scale(differenced.slopes[j], sd),
        );
        original_deviation.push(deviates(original_univariates[j], original.slopes[j], s));
        difference_deviation.push(deviates(
            difference_univariates[j],
            differenced.slopes[j],
            sd,
        ));
    }
    let max_abs_gap = original
        .slopes
        .iter()
        .zip(&differenced.slopes)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(StructureComparison {
        names,
        original_partials: original.slopes.clone(),
        difference_partials: differenced.slopes.clone(),
        original_univariates,
        difference_univariates,
        max_abs_gap,
        sign_agreement,
        original_deviation,
        difference_deviation,
    })
}
