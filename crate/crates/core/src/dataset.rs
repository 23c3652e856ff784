//! Observation storage and centering.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector, DVectorView};
use serde::Serialize;

use crate::error::{LensError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

impl Column {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Column {
            name: name.into(),
            values,
        }
    }
}

/// Named numeric columns, one of which is the response.
///
/// Column order is preserved exactly as given; every column other than the
/// response is an explanatory variable, in that order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    columns: Vec<Column>,
    response: usize,
    n: usize,
}

impl Dataset {
    pub fn new(columns: Vec<Column>, response: &str) -> Result<Self> {
        let response_idx = columns
            .iter()
            .position(|c| c.name == response)
            .ok_or_else(|| {
                LensError::InvalidDataset(format!("response column `{response}` not found"))
            })?;
        if columns.len() < 2 {
            return Err(LensError::InvalidDataset(
                "need a response and at least one explanatory column".into(),
            ));
        }
        let mut seen = HashSet::new();
        for c in &columns {
            if !seen.insert(c.name.as_str()) {
                return Err(LensError::InvalidDataset(format!(
                    "duplicate column name `{}`",
                    c.name
                )));
            }
        }
        let n = columns[0].values.len();
        for c in &columns {
            if c.values.len() != n {
                return Err(LensError::InvalidDataset(format!(
                    "column `{}` has {} values, expected {n}",
                    c.name,
                    c.values.len()
                )));
            }
        }
        if n < 2 {
            return Err(LensError::TooFewObservations { n, required: 2 });
        }
        for c in &columns {
            if let Some(row) = c.values.iter().position(|v| !v.is_finite()) {
                return Err(LensError::NonFinite {
                    column: c.name.clone(),
                    row,
                });
            }
        }
        Ok(Dataset {
            columns,
            response: response_idx,
            n,
        })
    }

    /// Builds a dataset from explanatory columns `x1..xp` and a response `y`.
    pub fn from_design(regressors: &[Vec<f64>], y: Vec<f64>) -> Result<Self> {
        let mut columns: Vec<Column> = regressors
            .iter()
            .enumerate()
            .map(|(j, v)| Column::new(format!("x{}", j + 1), v.clone()))
            .collect();
        columns.push(Column::new("y", y));
        Dataset::new(columns, "y")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of explanatory columns.
    pub fn p(&self) -> usize {
        self.columns.len() - 1
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn response_name(&self) -> &str {
        &self.columns[self.response].name
    }

    pub fn response(&self) -> &[f64] {
        &self.columns[self.response].values
    }

    pub fn regressors(&self) -> impl Iterator<Item = &Column> + '_ {
        self.columns
            .iter()
            .enumerate()
            .filter(move |(i, _)| *i != self.response)
            .map(|(_, c)| c)
    }

    pub fn regressor(&self, j: usize) -> Option<&Column> {
        self.regressors().nth(j)
    }

    pub fn regressor_names(&self) -> Vec<String> {
        self.regressors().map(|c| c.name.clone()).collect()
    }

    /// Same columns with every observation appended a second time.
    pub fn duplicated_rows(&self) -> Dataset {
        let columns = self
            .columns
            .iter()
            .map(|c| {
                let mut values = c.values.clone();
                values.extend_from_slice(&c.values);
                Column::new(c.name.clone(), values)
            })
            .collect();
        Dataset {
            columns,
            response: self.response,
            n: self.n * 2,
        }
    }

    /// Reorders observations so that row `i` of the result is row `perm[i]`.
    pub fn permuted_rows(&self, perm: &[usize]) -> Result<Dataset> {
        check_permutation(perm, self.n)?;
        let columns = self
            .columns
            .iter()
            .map(|c| Column::new(c.name.clone(), perm.iter().map(|&i| c.values[i]).collect()))
            .collect();
        Ok(Dataset {
            columns,
            response: self.response,
            n: self.n,
        })
    }

    /// Drops explanatory column `j` (in regressor order).
    pub fn without_regressor(&self, j: usize) -> Result<Dataset> {
        let name = self
            .regressor(j)
            .ok_or_else(|| {
                LensError::InvalidArgument(format!(
                    "regressor index {j} out of range for p = {}",
                    self.p()
                ))
            })?
            .name
            .clone();
        let columns: Vec<Column> = self
            .columns
            .iter()
            .filter(|c| c.name != name)
            .cloned()
            .collect();
        Dataset::new(columns, self.response_name())
    }

    /// Same dataset with every column replaced by `f(name, values)`.
    pub(crate) fn map_columns<F>(&self, mut f: F) -> Result<Dataset>
    where
        F: FnMut(&str, &[f64]) -> Vec<f64>,
    {
        let columns = self
            .columns
            .iter()
            .map(|c| Column::new(c.name.clone(), f(&c.name, &c.values)))
            .collect();
        Dataset::new(columns, self.response_name())
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(LensError::DimensionMismatch(format!(
            "permutation has length {}, expected {n}",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &i in perm {
        if i >= n || seen[i] {
            return Err(LensError::InvalidArgument(
                "ordering is not a permutation of the observations".into(),
            ));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Mean-removed response and explanatory vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredData {
    names: Vec<String>,
    response: String,
    x: DMatrix<f64>,
    y: DVector<f64>,
    x_means: Vec<f64>,
    y_mean: f64,
}

/// Mean with one refinement pass, so the centered vector sums to zero up to
/// rounding in the subtraction alone.
fn refined_mean(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    m + v.iter().map(|x| x - m).sum::<f64>() / n
}

pub fn center(data: &Dataset) -> Result<CenteredData> {
    let n = data.n();
    let p = data.p();
    if n < 2 {
        return Err(LensError::TooFewObservations { n, required: 2 });
    }
    for c in data.columns() {
        if let Some(row) = c.values.iter().position(|v| !v.is_finite()) {
            return Err(LensError::NonFinite {
                column: c.name.clone(),
                row,
            });
        }
    }
    if n <= p {
        return Err(LensError::TooFewObservations { n, required: p + 1 });
    }
    let y_mean = refined_mean(data.response());
    let y = DVector::from_iterator(n, data.response().iter().map(|v| v - y_mean));
    let mut x = DMatrix::zeros(n, p);
    let mut x_means = Vec::with_capacity(p);
    for (j, col) in data.regressors().enumerate() {
        let m = refined_mean(&col.values);
        for (i, v) in col.values.iter().enumerate() {
            x[(i, j)] = v - m;
        }
        x_means.push(m);
    }
    Ok(CenteredData {
        names: data.regressor_names(),
        response: data.response_name().to_string(),
        x,
        y,
        x_means,
        y_mean,
    })
}

impl CenteredData {
    /// Assembles centered data from vectors that are already mean-free.
    pub fn from_centered(
        names: Vec<String>,
        response: impl Into<String>,
        x: DMatrix<f64>,
        y: DVector<f64>,
    ) -> Result<Self> {
        let (n, p) = x.shape();
        if names.len() != p || y.len() != n {
            return Err(LensError::DimensionMismatch(format!(
                "x is {n}x{p}, y has {} entries, {} names",
                y.len(),
                names.len()
            )));
        }
        if p == 0 {
            return Err(LensError::InvalidArgument(
                "need at least one regressor".into(),
            ));
        }
        if n <= p {
            return Err(LensError::TooFewObservations { n, required: p + 1 });
        }
        Ok(CenteredData {
            names,
            response: response.into(),
            x,
            y,
            x_means: vec![0.0; p],
            y_mean: 0.0,
        })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn column(&self, j: usize) -> DVectorView<'_, f64> {
        self.x.column(j)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn response_name(&self) -> &str {
        &self.response
    }

    pub fn x_means(&self) -> &[f64] {
        &self.x_means
    }

    pub fn y_mean(&self) -> f64 {
        self.y_mean
    }

    /// Keeps only the listed regressors, in the listed order.
    pub fn select(&self, cols: &[usize]) -> Result<CenteredData> {
        if cols.is_empty() {
            return Err(LensError::InvalidArgument(
                "empty regressor selection".into(),
            ));
        }
        if let Some(&bad) = cols.iter().find(|&&j| j >= self.p()) {
            return Err(LensError::InvalidArgument(format!(
                "regressor index {bad} out of range for p = {}",
                self.p()
            )));
        }
        Ok(CenteredData {
            names: cols.iter().map(|&j| self.names[j].clone()).collect(),
            response: self.response.clone(),
            x: crate::linalg::select_columns(&self.x, cols),
            y: self.y.clone(),
            x_means: cols.iter().map(|&j| self.x_means[j]).collect(),
            y_mean: self.y_mean,
        })
    }

    /// Same response with a replacement design whose columns are already centered.
    pub(crate) fn with_design(
        &self,
        names: Vec<String>,
        x: DMatrix<f64>,
        x_means: Vec<f64>,
    ) -> CenteredData {
        CenteredData {
            names,
            response: self.response.clone(),
            x,
            y: self.y.clone(),
            x_means,
            y_mean: self.y_mean,
        }
    }

    /// Scale used to decide whether a centered column is numerically zero.
    pub(crate) fn column_scale(&self, j: usize) -> f64 {
        let col = self.x.column(j);
        col.amax().max(self.x_means[j].abs()) * (self.n() as f64).sqrt()
    }

    pub(crate) fn is_degenerate(&self, j: usize) -> bool {
        let norm = self.x.column(j).norm();
        norm == 0.0 || norm <= 1e-12 * self.column_scale(j)
    }

    pub(crate) fn check_nondegenerate(&self) -> Result<()> {
        match (0..self.p()).find(|&j| self.is_degenerate(j)) {
            Some(j) => Err(LensError::DegenerateRegressor(self.names[j].clone())),
            None => Ok(()),
        }
    }
}
