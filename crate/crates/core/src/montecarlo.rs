//! Seeded sign-deviation experiments on a correlated bivariate design.
//!
//! The data generating process is
//!
//! ```text
//! x₁ ~ N(0, scale²),  ε ~ N(0, scale²),  u ~ N(0, 1)
//! x₂ = ρ·x₁ + √(1-ρ²)·ε
//! y  = β₀ + β₁·x₁ + β₂·x₂ + u
//! ```
//!
//! with `scale = 5` as the standard deviation. Each trial draws from its own
//! ChaCha8 stream keyed by `(seed, trial index)`, so results do not depend on
//! scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::dataset::Dataset;
use crate::error::{LensError, Result};
use crate::regression::RANK_TOLERANCE;

pub const DEFAULT_TRIALS: u64 = 100_000;
pub const GRID_SAMPLE_SIZES: [usize; 3] = [30, 50, 100];
pub const GRID_RHOS: [f64; 2] = [0.8, 0.5];
pub const GRID_BETA1_MAGNITUDES: [f64; 4] = [0.01, 0.05, 0.1, 0.2];

/// Reference proportions indexed `[rho][n][|β₁|]` in the order of the
/// constants above. Table 1 is the β₁ < 0 regime, Table 2 the β₁ > 0 regime.
const TABLE1_REFERENCE: [[[f64; 4]; 3]; 2] = [
    [
        [0.5618, 0.7807, 0.9382, 0.9984],
        [0.5820, 0.8493, 0.9793, 1.0000],
        [0.6141, 0.9294, 0.9984, 1.0000],
    ],
    [
        [0.5869, 0.8691, 0.9854, 1.0000],
        [0.6171, 0.9303, 0.9978, 1.0000],
        [0.6648, 0.9828, 1.0000, 1.0000],
    ],
];
const TABLE2_REFERENCE: [[[f64; 4]; 3]; 2] = [
    [
        [0.4378, 0.2160, 0.0613, 0.0018],
        [0.4164, 0.1538, 0.0225, 0.0001],
        [0.3812, 0.0712, 0.0018, 0.0000],
    ],
    [
        [0.4086, 0.1306, 0.0157, 0.0000],
        [0.3826, 0.0706, 0.0021, 0.0000],
        [0.3332, 0.0177, 0.0000, 0.0000],
    ],
];

const TABLE1_LAYOUT_WARNING: &str =
    "the reference table's rho = 0.5 block lists three beta1 headers over \
four data columns; the last column is read as beta1 = -0.2";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagPredicate {
    /// Flag when the estimated partial slope of `x₁` is below zero.
    NegativePartial,
    /// Flag when it is above zero.
    PositivePartial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DgpConfig {
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub rho: f64,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    /// Standard deviation of `x₁` and `ε`.
    pub scale_x: f64,
    pub flag: FlagPredicate,
}

impl DgpConfig {
    /// `β₀ = 2`, `β₂ = 1`, `scale = 5`, 100 000 trials, flag on `β̂₁ < 0`.
    pub fn standard(beta1: f64, rho: f64, n: usize) -> Self {
        DgpConfig {
            beta0: 2.0,
            beta1,
            beta2: 1.0,
            rho,
            n,
            trials: DEFAULT_TRIALS,
            seed: 0,
            scale_x: 5.0,
            flag: FlagPredicate::NegativePartial,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho.abs() < 1.0) {
            return Err(LensError::InvalidArgument(format!(
                "|rho| must be below 1, got {}",
                self.rho
            )));
        }
        if self.n < 3 {
            return Err(LensError::InvalidArgument(format!(
                "sample size must be at least 3, got {}",
                self.n
            )));
        }
        if self.trials == 0 {
            return Err(LensError::InvalidArgument("need at least one trial".into()));
        }
        if !(self.scale_x.is_finite() && self.scale_x > 0.0) {
            return Err(LensError::InvalidArgument(format!(
                "scale_x must be positive, got {}",
                self.scale_x
            )));
        }
        for (name, v) in [
            ("beta0", self.beta0),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
        ] {
            if !v.is_finite() {
                return Err(LensError::InvalidArgument(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    /// Normal approximation `Φ(∓β₁·√(n·scale²·(1-ρ²)))` to the flag rate.
    pub fn normal_approximation(&self) -> f64 {
        let z =
            self.beta1 * (self.n as f64 * self.scale_x.powi(2) * (1.0 - self.rho.powi(2))).sqrt();
        let std = Normal::new(0.0, 1.0).expect("standard normal");
        match self.flag {
            FlagPredicate::NegativePartial => std.cdf(-z),
            FlagPredicate::PositivePartial => std.cdf(z),
        }
    }

    /// Exact flag probability for the Gaussian design:
    /// `P(T_{n-2} > β₁·√((n-2)·scale²·(1-ρ²)))` for the negative predicate.
    pub fn finite_sample_probability(&self) -> f64 {
        let k = (self.n - 2) as f64;
        let c = self.beta1 * (k * self.scale_x.powi(2) * (1.0 - self.rho.powi(2))).sqrt();
        let t = StudentsT::new(0.0, 1.0, k).expect("positive degrees of freedom");
        match self.flag {
            FlagPredicate::NegativePartial => 1.0 - t.cdf(c),
            FlagPredicate::PositivePartial => t.cdf(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub config: DgpConfig,
    pub flagged: u64,
    pub proportion: f64,
    /// `√(p̂(1-p̂)/trials)`
    pub mc_std_err: f64,
    pub analytic_approx: f64,
    pub finite_sample_exact: f64,
    /// Draws replaced because the design came out rank deficient.
    pub regenerated: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Serial,
    Parallel,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws observations one at a time as `(x₁, ε, u)`, so a longer sample from
/// the same stream extends a shorter one.
fn draw_into(
    config: &DgpConfig,
    stream: u64,
    x1: &mut Vec<f64>,
    x2: &mut Vec<f64>,
    y: &mut Vec<f64>,
) {
    let mut rng = stream_rng(config.seed, stream);
    let mix = (1.0 - config.rho * config.rho).sqrt();
    x1.clear();
    x2.clear();
    y.clear();
    for _ in 0..config.n {
        let a: f64 = StandardNormal.sample(&mut rng);
        let e: f64 = StandardNormal.sample(&mut rng);
        let u: f64 = StandardNormal.sample(&mut rng);
        let v1 = config.scale_x * a;
        let v2 = config.rho * v1 + mix * config.scale_x * e;
        x1.push(v1);
        x2.push(v2);
        y.push(config.beta0 + config.beta1 * v1 + config.beta2 * v2 + u);
    }
}

/// Dataset `(x1, x2, y)` for one trial.
pub fn generate_trial(config: &DgpConfig, trial_index: u64) -> Result<Dataset> {
    config.validate()?;
    let (mut x1, mut x2, mut y) = (Vec::new(), Vec::new(), Vec::new());
    draw_into(config, trial_index, &mut x1, &mut x2, &mut y);
    Dataset::from_design(&[x1, x2], y)
}

/// Closed-form centered least squares for two regressors. `None` when the
/// design is rank deficient under the same cutoff as the general solver.
pub fn bivariate_slopes(x1: &[f64], x2: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x1.len() as f64;
    let m1 = x1.iter().sum::<f64>() / n;
    let m2 = x2.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut s11, mut s12, mut s22, mut s1y, mut s2y) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((a, b), c) in x1.iter().zip(x2).zip(y) {
        let (a, b, c) = (a - m1, b - m2, c - my);
        s11 += a * a;
        s12 += a * b;
        s22 += b * b;
        s1y += a * c;
        s2y += b * c;
    }
    if s11 == 0.0 || s22 == 0.0 {
        return None;
    }
    // singular values of the unit-norm columns are √(1 ± |r|)
    let r = (s12 / (s11 * s22).sqrt()).abs().min(1.0);
    if ((1.0 - r) / (1.0 + r)).sqrt() <= RANK_TOLERANCE {
        return None;
    }
    let det = s11 * s22 - s12 * s12;
    Some(((s22 * s1y - s12 * s2y) / det, (s11 * s2y - s12 * s1y) / det))
}

struct Buffers {
    x1: Vec<f64>,
    x2: Vec<f64>,
    y: Vec<f64>,
}

impl Buffers {
    fn new(n: usize) -> Self {
        Buffers {
            x1: Vec::with_capacity(n),
            x2: Vec::with_capacity(n),
            y: Vec::with_capacity(n),
        }
    }
}

/// `(flagged, regenerations)` for one trial.
fn run_trial(config: &DgpConfig, trial: u64, buf: &mut Buffers) -> (bool, u64) {
    let mut attempt = 0u64;
    loop {
        let stream = trial + attempt * config.trials;
        draw_into(config, stream, &mut buf.x1, &mut buf.x2, &mut buf.y);
        if let Some((b1, _)) = bivariate_slopes(&buf.x1, &buf.x2, &buf.y) {
            let flagged = match config.flag {
                FlagPredicate::NegativePartial => b1 < 0.0,
                FlagPredicate::PositivePartial => b1 > 0.0,
            };
            return (flagged, attempt);
        }
        attempt += 1;
    }
}

pub fn run_experiment(config: &DgpConfig) -> Result<ExperimentResult> {
    run_experiment_with(config, Execution::Parallel)
}

pub fn run_experiment_with(config: &DgpConfig, execution: Execution) -> Result<ExperimentResult> {
    config.validate()?;
    let (flagged, regenerated) = match execution {
        Execution::Serial => {
            let mut buf = Buffers::new(config.n);
            (0..config.trials).fold((0u64, 0u64), |(f, r), t| {
                let (hit, regen) = run_trial(config, t, &mut buf);
                (f + hit as u64, r + regen)
            })
        }
        Execution::Parallel => (0..config.trials)
            .into_par_iter()
            .map_init(
                || Buffers::new(config.n),
                |buf, t| {
                    let (hit, regen) = run_trial(config, t, buf);
                    (hit as u64, regen)
                },
            )
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1)),
    };
    let trials = config.trials as f64;
    let proportion = flagged as f64 / trials;
    Ok(ExperimentResult {
        config: *config,
        flagged,
        proportion,
        mc_std_err: (proportion * (1.0 - proportion) / trials).sqrt(),
        analytic_approx: config.normal_approximation(),
        finite_sample_exact: config.finite_sample_probability(),
        regenerated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TableId {
    /// β₁ < 0: the sign reversal is real.
    PopulationStructure,
    /// β₁ > 0: any reversal is a small-sample artefact.
    SampleSelection,
}

impl TableId {
    pub fn number(self) -> u8 {
        match self {
            TableId::PopulationStructure => 1,
            TableId::SampleSelection => 2,
        }
    }

    pub fn from_number(k: u8) -> Option<TableId> {
        match k {
            1 => Some(TableId::PopulationStructure),
            2 => Some(TableId::SampleSelection),
            _ => None,
        }
    }

    fn beta_sign(self) -> f64 {
        match self {
            TableId::PopulationStructure => -1.0,
            TableId::SampleSelection => 1.0,
        }
    }

    fn reference(self) -> &'static [[[f64; 4]; 3]; 2] {
        match self {
            TableId::PopulationStructure => &TABLE1_REFERENCE,
            TableId::SampleSelection => &TABLE2_REFERENCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableCell {
    pub n: usize,
    pub rho: f64,
    pub beta1: f64,
    pub reference: f64,
    pub result: ExperimentResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub table: u8,
    pub regime: TableId,
    pub cells: Vec<TableCell>,
    pub warnings: Vec<String>,
}

impl Table {
    pub fn cell(&self, n: usize, rho: f64, beta1: f64) -> Option<&TableCell> {
        self.cells
            .iter()
            .find(|c| c.n == n && c.rho == rho && c.beta1 == beta1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableGrid {
    pub seed: u64,
    pub trials: u64,
    pub tables: Vec<Table>,
}

/// Reference proportion for a grid cell, if it is one of the tabulated ones.
pub fn reference_value(table: TableId, n: usize, rho: f64, beta1: f64) -> Option<f64> {
    let r = GRID_RHOS.iter().position(|&v| v == rho)?;
    let k = GRID_SAMPLE_SIZES.iter().position(|&v| v == n)?;
    let b = GRID_BETA1_MAGNITUDES
        .iter()
        .position(|&v| v * table.beta_sign() == beta1)?;
    Some(table.reference()[r][k][b])
}

/// One table over the full `(ρ, n, β₁)` grid. Every cell shares `seed`, so
/// cells differ only through the configuration, not through the draws.
pub fn reproduce_table(
    table: TableId,
    seed: u64,
    trials: u64,
    execution: Execution,
) -> Result<Table> {
    let mut cells = Vec::with_capacity(24);
    for (r, &rho) in GRID_RHOS.iter().enumerate() {
        for (k, &n) in GRID_SAMPLE_SIZES.iter().enumerate() {
            for (b, &mag) in GRID_BETA1_MAGNITUDES.iter().enumerate() {
                let beta1 = mag * table.beta_sign();
                let config = DgpConfig::standard(beta1, rho, n)
                    .with_seed(seed)
                    .with_trials(trials);
                cells.push(TableCell {
                    n,
                    rho,
                    beta1,
                    reference: table.reference()[r][k][b],
                    result: run_experiment_with(&config, execution)?,
                });
            }
        }
    }
    let warnings = match table {
        TableId::PopulationStructure => vec![TABLE1_LAYOUT_WARNING.to_string()],
        TableId::SampleSelection => Vec::new(),
    };
    Ok(Table {
        table: table.number(),
        regime: table,
        cells,
        warnings,
    })
}

pub fn reproduce_tables(seed: u64) -> Result<TableGrid> {
    reproduce_tables_with(
        seed,
        DEFAULT_TRIALS,
        &[TableId::PopulationStructure, TableId::SampleSelection],
        Execution::Parallel,
    )
}

pub fn reproduce_tables_with(
    seed: u64,
    trials: u64,
    which: &[TableId],
    execution: Execution,
) -> Result<TableGrid> {
    let tables = which
        .iter()
        .map(|&t| reproduce_table(t, seed, trials, execution))
        .collect::<Result<Vec<_>>>()?;
    Ok(TableGrid {
        seed,
        trials,
        tables,
    })
}
