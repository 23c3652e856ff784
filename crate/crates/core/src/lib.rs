//! Least-squares diagnostics for collinear designs: fits, the univariate to
//! partial slope decomposition, sign-deviation diagnostics, remedies, and a
//! seeded Monte Carlo engine.

pub mod dataset;
pub mod decomposition;
pub mod diagnostics;
pub mod error;
mod linalg;
pub mod montecarlo;
pub mod regression;
pub mod remedies;

pub use dataset::{center, CenteredData, Column, Dataset};
pub use decomposition::{
    b_matrix, cumulative_weights, cumulative_weights_in_order, decompose, differences,
    differences_in_order, effect_matrix, fwl_residualize, inner_product_slope, recover_partials,
    t_star, univariate_slopes, BMatrix, DifferenceVector, FwlResult, ObservationOrder,
    WeightVector,
};
pub use diagnostics::{
    classify_cause, classify_report, geometric_report, sign_expectation_deviation, vif,
    Classification, ClassificationHint, DiagnosticsReport, SignDeviation,
};
pub use error::{ErrorKind, LensError, Result};
pub use montecarlo::{
    reproduce_tables, run_experiment, run_experiment_with, DgpConfig, Execution, ExperimentResult,
    FlagPredicate, TableId,
};
pub use regression::{confidence_interval, fit_ols, fit_univariate, FitResult, Magnitude};
pub use remedies::{
    difference_dataset, difference_model, eliminate_variable, linear_transform_roundtrip,
    ridge_path, structure_compare, RidgePath, StructureComparison,
};
