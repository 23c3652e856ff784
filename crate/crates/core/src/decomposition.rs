//! Univariate/partial coefficient decomposition.
//!
//! A univariate slope of `y` on `xᵢ` splits into the partial slopes of the
//! full model, weighted by the pairwise slopes `b̂_{j,i}` of `xⱼ` on `xᵢ`:
//!
//! ```text
//! univariate_i = Σⱼ partial_j · b̂_{j,i}
//! ```
//!
//! [`BMatrix`] stores `b̂_{j,i}` at row `i`, column `j`, so the identity reads
//! `univariate = B · partial`. Transposing `B` silently breaks it whenever the
//! regressors have unequal norms.
//!
//! The slope itself can also be written as an inner product of cumulative
//! weights with first differences of the response (see [`cumulative_weights`]).

use nalgebra::{DMatrix, DVector};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::dataset::{check_permutation, CenteredData};
use crate::error::{LensError, Result};
use crate::linalg;
use crate::regression::{centered_slope, FitResult, Magnitude};

/// Maximum condition number of `B` accepted by [`recover_partials`].
pub const MAX_B_CONDITION: f64 = 1e12;

/// The observation sequence under which weights and differences are taken.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObservationOrder(Vec<usize>);

impl ObservationOrder {
    pub fn identity(n: usize) -> Self {
        ObservationOrder((0..n).collect())
    }

    /// Position `k` of the sequence is observation `perm[k]`.
    pub fn from_permutation(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        check_permutation(&perm, n)?;
        Ok(ObservationOrder(perm))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.0.iter().map(|&i| v[i]).collect()
    }
}

/// Cumulative weights of one explanatory variable.
///
/// `g_(i) = (x̄ - x_(i)) / (n·s²)` with `s²` using divisor `n`, and
/// `w_(j) = g_(1) + … + g_(j)` for `j < n`. The final partial sum is zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    pub g: Vec<f64>,
    pub w: Vec<f64>,
    pub mean: f64,
    /// Divisor-`n` variance.
    pub variance: f64,
    pub order: ObservationOrder,
}

/// `Δv_(j) = v_(j+1) - v_(j)` under a fixed observation order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferenceVector {
    pub values: Vec<f64>,
    pub order: ObservationOrder,
}

pub fn cumulative_weights(x: &[f64]) -> Result<WeightVector> {
    cumulative_weights_in_order(x, &ObservationOrder::identity(x.len()))
}

pub fn cumulative_weights_in_order(x: &[f64], order: &ObservationOrder) -> Result<WeightVector> {
    let n = x.len();
    if n < 2 {
        return Err(LensError::TooFewObservations { n, required: 2 });
    }
    if order.len() != n {
        return Err(LensError::OrderingMismatch);
    }
    let xs = order.apply(x);
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let ss: f64 = xs.iter().map(|v| (v - mean) * (v - mean)).sum();
    let scale = xs.iter().fold(mean.abs(), |a, v| a.max((v - mean).abs())) * nf.sqrt();
    if ss == 0.0 || ss.sqrt() <= 1e-12 * scale {
        return Err(LensError::DegenerateRegressor("x".into()));
    }
    // n·s² with divisor-n variance is just the centered sum of squares.
    let g: Vec<f64> = xs.iter().map(|v| (mean - v) / ss).collect();
    let w: Vec<f64> = g[..n - 1]
        .iter()
        .scan(0.0, |acc, gi| {
            *acc += gi;
            Some(*acc)
        })
        .collect();
    Ok(WeightVector {
        g,
        w,
        mean,
        variance: ss / nf,
        order: order.clone(),
    })
}

pub fn differences(v: &[f64]) -> DifferenceVector {
    differences_in_order(v, &ObservationOrder::identity(v.len()))
}

pub fn differences_in_order(v: &[f64], order: &ObservationOrder) -> DifferenceVector {
    let vs = order.apply(v);
    DifferenceVector {
        values: vs.windows(2).map(|p| p[1] - p[0]).collect(),
        order: order.clone(),
    }
}

/// `⟨w, Δy⟩`, the univariate slope of `y` on the variable that produced `w`.
pub fn inner_product_slope(w: &WeightVector, dy: &DifferenceVector) -> Result<f64> {
    if w.order != dy.order || w.w.len() != dy.values.len() {
        return Err(LensError::OrderingMismatch);
    }
    Ok(w.w.iter().zip(&dy.values).map(|(a, b)| a * b).sum())
}

/// Pairwise univariate slopes between regressors; row `i`, column `j` holds
/// `b̂_{j,i}`, the slope of `xⱼ` regressed on `xᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BMatrix {
    entries: DMatrix<f64>,
    names: Vec<String>,
}

impl BMatrix {
    pub fn from_entries(entries: DMatrix<f64>, names: Vec<String>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() != names.len() {
            return Err(LensError::DimensionMismatch(format!(
                "B is {}x{} with {} names",
                entries.nrows(),
                entries.ncols(),
                names.len()
            )));
        }
        Ok(BMatrix { entries, names })
    }

    pub fn p(&self) -> usize {
        self.entries.nrows()
    }

    /// `b̂_{j,i}`
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    pub fn condition_number(&self) -> f64 {
        linalg::condition_number(&self.entries)
    }

    /// Principal sub-block over the listed regressors.
    pub fn submatrix(&self, cols: &[usize]) -> BMatrix {
        BMatrix {
            entries: DMatrix::from_fn(cols.len(), cols.len(), |a, b| {
                self.entries[(cols[a], cols[b])]
            }),
            names: cols.iter().map(|&j| self.names[j].clone()).collect(),
        }
    }
}

impl Serialize for BMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("BMatrix", 2)?;
        st.serialize_field("names", &self.names)?;
        st.serialize_field("rows", &self.rows())?;
        st.end()
    }
}

pub fn b_matrix(cd: &CenteredData) -> Result<BMatrix> {
    cd.check_nondegenerate()?;
    let p = cd.p();
    let x = cd.x();
    let sq: Vec<f64> = (0..p).map(|i| x.column(i).norm_squared()).collect();
    let entries = DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0
        } else {
            x.column(i).dot(&x.column(j)) / sq[i]
        }
    });
    BMatrix::from_entries(entries, cd.names().to_vec())
}

/// Univariate slope of the centered response on each regressor alone.
pub fn univariate_slopes(cd: &CenteredData) -> Result<Vec<f64>> {
    cd.check_nondegenerate()?;
    Ok((0..cd.p())
        .map(|j| centered_slope(&cd.column(j).into_owned(), cd.y()))
        .collect())
}

/// `B · partial`; with the full-model partial slopes this yields the
/// univariate slopes.
pub fn decompose(b: &BMatrix, partial: &[f64]) -> Result<Vec<f64>> {
    if partial.len() != b.p() {
        return Err(LensError::DimensionMismatch(format!(
            "B is {p}x{p}, vector has {} entries",
            partial.len(),
            p = b.p()
        )));
    }
    let v = b.matrix() * DVector::from_column_slice(partial);
    Ok(v.iter().copied().collect())
}

/// Entry `(i, j)` is `partial_j · b̂_{j,i}`: the diagonal holds the direct
/// effects and each row sums to the univariate slope of `xᵢ`.
pub fn effect_matrix(b: &BMatrix, partial: &[f64]) -> Result<DMatrix<f64>> {
    if partial.len() != b.p() {
        return Err(LensError::DimensionMismatch(format!(
            "B is {p}x{p}, vector has {} entries",
            partial.len(),
            p = b.p()
        )));
    }
    Ok(DMatrix::from_fn(b.p(), b.p(), |i, j| {
        partial[j] * b.entry(i, j)
    }))
}

/// `B⁻¹ · univariate`.
pub fn recover_partials(b: &BMatrix, univariate: &[f64]) -> Result<Vec<f64>> {
    if univariate.len() != b.p() {
        return Err(LensError::DimensionMismatch(format!(
            "B is {p}x{p}, vector has {} entries",
            univariate.len(),
            p = b.p()
        )));
    }
    let condition = b.condition_number();
    if !(condition < MAX_B_CONDITION) {
        return Err(LensError::StructuralCollinearity { condition });
    }
    let lu = b.matrix().clone().lu();
    let sol = lu
        .solve(&DVector::from_column_slice(univariate))
        .ok_or(LensError::StructuralCollinearity { condition })?;
    Ok(sol.iter().copied().collect())
}

/// Residualized regression of `y` on `xⱼ` after both are purged of the other
/// regressors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FwlResult {
    pub name: String,
    pub index: usize,
    /// Residual of `y` on the other regressors, `û_{j·rest} + û`.
    pub y_resid: Vec<f64>,
    /// Residual of `xⱼ` on the other regressors, `v̂_{j·rest}`.
    pub x_resid: Vec<f64>,
    pub slope: f64,
    /// Residual of `y_resid` on `x_resid`.
    pub residuals: Vec<f64>,
    /// `‖slope · x_resid‖`
    pub net_component_norm: f64,
    pub t_value: Magnitude,
}

impl FwlResult {
    /// `‖y_resid‖`, the residual norm of `y` on the other regressors alone.
    pub fn y_resid_norm(&self) -> f64 {
        self.y_resid.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn residual_norm(&self) -> f64 {
        self.residuals.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

pub fn fwl_residualize(cd: &CenteredData, j: usize) -> Result<FwlResult> {
    let p = cd.p();
    if p < 2 {
        return Err(LensError::InvalidArgument(
            "residualization needs at least two regressors; use the univariate fit".into(),
        ));
    }
    if j >= p {
        return Err(LensError::InvalidArgument(format!(
            "regressor index {j} out of range for p = {p}"
        )));
    }
    // full rank is a precondition; surface the same errors as the full fit
    crate::regression::fit_ols(cd)?;

    let others: Vec<usize> = (0..p).filter(|&k| k != j).collect();
    let rest = linalg::select_columns(cd.x(), &others);
    let y_resid = linalg::residualize(&rest, cd.y());
    let x_resid = linalg::residualize(&rest, &cd.column(j).into_owned());
    let slope = centered_slope(&x_resid, &y_resid);
    let mut residuals = &y_resid - &x_resid * slope;
    if residuals.norm() <= crate::regression::EXACT_FIT_TOLERANCE * cd.y().norm() {
        residuals.fill(0.0);
    }
    let net_component_norm = slope.abs() * x_resid.norm();
    let df = (cd.n() - p) as f64;
    let t_value = Magnitude::ratio(df.sqrt() * net_component_norm, residuals.norm());
    Ok(FwlResult {
        name: cd.names()[j].clone(),
        index: j,
        y_resid: y_resid.iter().copied().collect(),
        x_resid: x_resid.iter().copied().collect(),
        slope,
        residuals: residuals.iter().copied().collect(),
        net_component_norm,
        t_value,
    })
}

/// `√(n-p)·‖β̂ⱼx⃗ⱼ‖ / ‖û‖`, significance measured without netting out the
/// other regressors. Never below the ordinary `|t|`.
pub fn t_star(fit: &FitResult, cd: &CenteredData, j: usize) -> Result<Magnitude> {
    if fit.p != cd.p() || fit.n != cd.n() {
        return Err(LensError::DimensionMismatch(
            "fit and centered data describe different designs".into(),
        ));
    }
    if j >= fit.p {
        return Err(LensError::InvalidArgument(format!(
            "regressor index {j} out of range for p = {}",
            fit.p
        )));
    }
    let component = fit.slopes[j].abs() * cd.column(j).norm();
    Ok(Magnitude::ratio(
        (fit.df as f64).sqrt() * component,
        fit.residual_norm(),
    ))
}
