//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use collinear_lens_core::dataset::center;
use collinear_lens_core::decomposition::{
    b_matrix, cumulative_weights_in_order, decompose, differences_in_order, fwl_residualize,
    inner_product_slope, ObservationOrder,
};
use collinear_lens_core::montecarlo::{
    generate_trial, reproduce_table, DgpConfig, Execution, Table, TableId, DEFAULT_TRIALS,
    GRID_BETA1_MAGNITUDES, GRID_RHOS, GRID_SAMPLE_SIZES,
};
use collinear_lens_core::regression::{fit_ols, fit_univariate};
use collinear_lens_core::remedies::{
    difference_model, linear_transform_roundtrip, log_grid, ridge_path,
};
use collinear_lens_core::Dataset;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const SEED: u64 = 42;
const TABLE_TOLERANCE_FLOOR: f64 = 0.01;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normals(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.sample(StandardNormal)).collect()
}

/// Full-rank design with a shared factor, random column scales and offsets,
/// and `y` linear in the columns plus unit noise.
fn random_dataset(seed: u64, n: usize, p: usize, max_loading: f64) -> Dataset {
    let mut r = rng(seed);
    let common = normals(&mut r, n);
    let cols: Vec<Vec<f64>> = (0..p)
        .map(|_| {
            let a: f64 = r.random_range(-max_loading..=max_loading);
            let scale: f64 = r.random_range(0.5..20.0);
            let offset: f64 = r.random_range(-10.0..10.0);
            let own = normals(&mut r, n);
            let b = (1.0 - a * a).sqrt();
            common
                .iter()
                .zip(&own)
                .map(|(c, e)| offset + scale * (a * c + b * e))
                .collect()
        })
        .collect();
    let beta: Vec<f64> = (0..p).map(|_| r.random_range(-2.0..2.0)).collect();
    let noise = normals(&mut r, n);
    let y = (0..n)
        .map(|i| 1.5 + noise[i] + (0..p).map(|j| beta[j] * cols[j][i]).sum::<f64>())
        .collect();
    Dataset::from_design(&cols, y).unwrap()
}

fn bivariate_design(seed: u64, n: usize, rho: f64) -> Dataset {
    let mut r = rng(seed);
    let x1 = normals(&mut r, n);
    let e = normals(&mut r, n);
    let u = normals(&mut r, n);
    let mix = (1.0 - rho * rho).sqrt();
    let x2: Vec<f64> = x1.iter().zip(&e).map(|(a, b)| rho * a + mix * b).collect();
    let y = (0..n).map(|i| 1.0 + 0.5 * x1[i] + x2[i] + u[i]).collect();
    Dataset::from_design(&[x1, x2], y).unwrap()
}

fn shuffled(r: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, r.random_range(0..=i));
    }
    perm
}

fn max_abs_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn decomposition_identity() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for k in 0..1000u64 {
        let p = [2, 3, 5][(k % 3) as usize];
        let n = [20, 200][((k / 3) % 2) as usize];
        let data = random_dataset(1000 + k, n, p, 0.9);
        let cd = center(&data).unwrap();
        let partial = fit_ols(&cd).unwrap().slopes;
        let combined = decompose(&b_matrix(&cd).unwrap(), &partial).unwrap();
        let oracle: Vec<f64> = data
            .regressors()
            .map(|c| fit_univariate(&c.values, data.response()).unwrap())
            .collect();
        worst = worst.max(max_abs_gap(&combined, &oracle) / inf_norm(&oracle));
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-8 && elapsed < Duration::from_secs(10),
        format!("max relative gap {worst:.3e} (< 1e-8), {}", secs(elapsed)),
    )
}

fn cumulative_weights_reproduce_slope() -> Outcome {
    let start = Instant::now();
    let (mut slope_gap, mut resid_gap): (f64, f64) = (0.0, 0.0);
    for k in 0..1000u64 {
        let mut r = rng(2000 + k);
        let n = r.random_range(3..200);
        let data = random_dataset(2000 + k, n, 1, 0.0);
        let x = &data.regressor(0).unwrap().values;
        let y = data.response();
        let fit = fit_ols(&center(&data).unwrap()).unwrap();
        let slope = fit.slopes[0];
        for order in [
            ObservationOrder::identity(n),
            ObservationOrder::from_permutation(shuffled(&mut r, n)).unwrap(),
        ] {
            let w = cumulative_weights_in_order(x, &order).unwrap();
            let on_y = inner_product_slope(&w, &differences_in_order(y, &order)).unwrap();
            let on_u =
                inner_product_slope(&w, &differences_in_order(&fit.residuals, &order)).unwrap();
            slope_gap = slope_gap.max((on_y - slope).abs() / slope.abs().max(1.0));
            resid_gap = resid_gap.max(on_u.abs());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        slope_gap <= 1e-10 && resid_gap <= 1e-10 && elapsed < Duration::from_secs(5),
        format!(
            "slope gap {slope_gap:.3e}, residual inner product {resid_gap:.3e} (<= 1e-10), {}",
            secs(elapsed)
        ),
    )
}

fn residualized_regression() -> Outcome {
    let (mut slope, mut resid, mut t, mut triangle): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..1000u64 {
        let p = 2 + (k % 2) as usize;
        let n = rng(3000 + k).random_range(8..200);
        let cd = center(&random_dataset(3000 + k, n, p, 0.9)).unwrap();
        let fit = fit_ols(&cd).unwrap();
        for j in 0..p {
            let fwl = fwl_residualize(&cd, j).unwrap();
            slope = slope.max((fwl.slope - fit.slopes[j]).abs() / fit.slopes[j].abs().max(1.0));
            resid = resid.max(max_abs_gap(&fwl.residuals, &fit.residuals));
            let (a, b) = (fwl.t_value.value(), fit.t_values[j].value());
            t = t.max((a - b).abs() / b.max(1.0));
            let without = fwl.y_resid_norm().powi(2);
            let split = fwl.net_component_norm.powi(2) + fit.rss;
            triangle = triangle.max((without - split).abs() / without);
        }
    }
    outcome(
        slope <= 1e-9 && resid <= 1e-9 && t <= 1e-9 && triangle <= 1e-8,
        format!(
            "slope {slope:.3e}, residuals {resid:.3e}, t {t:.3e} (<= 1e-9); right triangle {triangle:.3e} (<= 1e-8)"
        ),
    )
}

fn squared_correlation_product() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 0..1000u64 {
        let mut r = rng(4000 + k);
        let n = r.random_range(5..300);
        let rho = r.random_range(-0.99..0.99);
        let data = bivariate_design(4000 + k, n, rho);
        let b = b_matrix(&center(&data).unwrap()).unwrap();
        let c = correlation(
            &data.regressor(0).unwrap().values,
            &data.regressor(1).unwrap().values,
        );
        worst = worst.max((b.entry(0, 1) * b.entry(1, 0) - c * c).abs());
    }
    outcome(worst <= 1e-10, format!("max gap {worst:.3e} (<= 1e-10)"))
}

/// Cells outside `max(3·se, 0.01)` of the reference value, as descriptions.
fn table_misses(table: &Table) -> Vec<String> {
    table
        .cells
        .iter()
        .filter_map(|c| {
            let tol = (3.0 * c.result.mc_std_err).max(TABLE_TOLERANCE_FLOOR);
            let gap = (c.result.proportion - c.reference).abs();
            (gap > tol).then(|| {
                format!(
                    "(n={}, rho={}, beta1={}) {:.4} vs {:.4}",
                    c.n, c.rho, c.beta1, c.result.proportion, c.reference
                )
            })
        })
        .collect()
}

fn worst_table_gap(table: &Table) -> f64 {
    table
        .cells
        .iter()
        .map(|c| (c.result.proportion - c.reference).abs())
        .fold(0.0, f64::max)
}

fn columns_monotone(table: &Table, decreasing: bool) -> bool {
    GRID_RHOS.iter().all(|&rho| {
        GRID_BETA1_MAGNITUDES.iter().all(|&mag| {
            let beta1 = if decreasing { mag } else { -mag };
            let col: Vec<f64> = GRID_SAMPLE_SIZES
                .iter()
                .map(|&n| table.cell(n, rho, beta1).unwrap().result.proportion)
                .collect();
            col.windows(2).all(|w| {
                if decreasing {
                    w[1] <= w[0]
                } else {
                    w[1] >= w[0]
                }
            })
        })
    })
}

fn population_structure_table() -> Outcome {
    let start = Instant::now();
    let table = reproduce_table(
        TableId::PopulationStructure,
        SEED,
        DEFAULT_TRIALS,
        Execution::Parallel,
    )
    .unwrap();
    let elapsed = start.elapsed();
    let misses = table_misses(&table);
    let anchor = table.cell(30, 0.8, -0.2).unwrap().result.proportion;
    outcome(
        misses.is_empty() && (anchor - 0.9984).abs() <= 0.01 && elapsed < Duration::from_secs(120),
        format!(
            "{} cells, worst gap {:.4}, (30, 0.8, -0.2) = {anchor:.4}, non-decreasing in n: {}, {}{}",
            table.cells.len(),
            worst_table_gap(&table),
            columns_monotone(&table, false),
            secs(elapsed),
            if misses.is_empty() { String::new() } else { format!("; misses: {}", misses.join(", ")) }
        ),
    )
}

fn sample_selection_table() -> Outcome {
    let start = Instant::now();
    let table = reproduce_table(
        TableId::SampleSelection,
        SEED,
        DEFAULT_TRIALS,
        Execution::Parallel,
    )
    .unwrap();
    let elapsed = start.elapsed();
    let misses = table_misses(&table);
    let anchor = table.cell(30, 0.5, 0.05).unwrap().result.proportion;
    let large: Vec<f64> = GRID_RHOS
        .iter()
        .map(|&rho| table.cell(100, rho, 0.2).unwrap().result.proportion)
        .collect();
    let monotone = columns_monotone(&table, true);
    outcome(
        misses.is_empty()
            && (anchor - 0.1306).abs() <= 0.01
            && large.iter().all(|&v| v < 0.001)
            && monotone
            && elapsed < Duration::from_secs(120),
        format!(
            "{} cells, worst gap {:.4}, (30, 0.5, 0.05) = {anchor:.4}, n=100 beta1=0.2 cells {large:?}, non-increasing in n: {monotone}, {}{}",
            table.cells.len(),
            worst_table_gap(&table),
            secs(elapsed),
            if misses.is_empty() { String::new() } else { format!("; misses: {}", misses.join(", ")) }
        ),
    )
}

fn duplication_law() -> Outcome {
    let (mut slope, mut t): (f64, f64) = (0.0, 0.0);
    for k in 0..100u64 {
        let mut r = rng(7000 + k);
        let p = r.random_range(1..=3);
        let n = r.random_range(6..100);
        let data = random_dataset(7000 + k, n, p, 0.8);
        let once = fit_ols(&center(&data).unwrap()).unwrap();
        let twice = fit_ols(&center(&data.duplicated_rows()).unwrap()).unwrap();
        slope =
            slope.max(max_abs_gap(&once.slopes, &twice.slopes) / inf_norm(&once.slopes).max(1.0));
        let factor = (((2 * n - p) as f64) / ((n - p) as f64)).sqrt();
        for j in 0..p {
            let expect = once.t_values[j].value() * factor;
            t = t.max((twice.t_values[j].value() - expect).abs() / expect.max(1.0));
        }
    }
    outcome(
        slope <= 1e-12 && t <= 1e-9,
        format!("slope gap {slope:.3e} (<= 1e-12), scaled t gap {t:.3e} (<= 1e-9)"),
    )
}

fn transform_round_trip() -> Outcome {
    let (mut slope, mut resid, mut r2): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for k in 0..100u64 {
        let mut r = rng(8000 + k);
        let p = 2 + (k % 2) as usize;
        let n = r.random_range(8..150);
        let data = random_dataset(8000 + k, n, p, 0.9);
        let t = loop {
            let m = DMatrix::from_fn(p, p, |_, _| r.random_range(-3.0..3.0));
            let sv = m.singular_values();
            if sv.min() / sv.max() > 1e-3 {
                break m;
            }
        };
        let rt = linear_transform_roundtrip(&data, &t).unwrap();
        slope = slope.max(rt.max_slope_gap / inf_norm(&rt.original.slopes).max(1.0));
        resid = resid.max(rt.max_residual_gap);
        r2 = r2.max(rt.r_squared_gap);
    }
    outcome(
        slope <= 1e-9 && resid <= 1e-9 && r2 <= 1e-9,
        format!("slopes {slope:.3e}, residuals {resid:.3e}, R^2 {r2:.3e} (<= 1e-9)"),
    )
}

fn ridge_shrinkage() -> Outcome {
    let mut ols_gap: f64 = 0.0;
    let mut increases = 0usize;
    for k in 0..100u64 {
        let mut r = rng(9000 + k);
        let p = r.random_range(1..=5);
        let n = r.random_range(8..150);
        let cd = center(&random_dataset(9000 + k, n, p, 0.95)).unwrap();
        let mut grid = vec![0.0];
        grid.extend(log_grid(1e-6, 1e6, 50));
        let path = ridge_path(&cd, &grid).unwrap();
        let ols = fit_ols(&cd).unwrap();
        ols_gap = ols_gap
            .max(max_abs_gap(&path.coefficients[0], &ols.slopes) / inf_norm(&ols.slopes).max(1.0));
        increases += path.norms.windows(2).filter(|w| w[1] > w[0]).count();
    }
    outcome(
        ols_gap <= 1e-10 && increases == 0,
        format!("lambda=0 gap {ols_gap:.3e} (<= 1e-10), norm increases along 50-point grids: {increases}"),
    )
}

fn difference_consistency() -> Outcome {
    let start = Instant::now();
    let beta1 = -0.1;
    let config = DgpConfig::standard(beta1, 0.8, 5000).with_seed(SEED);
    let (mut ols, mut dif) = (Vec::new(), Vec::new());
    for t in 0..200 {
        let d = generate_trial(&config, t).unwrap();
        ols.push(fit_ols(&center(&d).unwrap()).unwrap().slopes[0]);
        dif.push(difference_model(&d).unwrap().slopes[0]);
    }
    let elapsed = start.elapsed();
    let mean_err = dif.iter().map(|b| (b - beta1).abs()).sum::<f64>() / dif.len() as f64;
    let var = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|b| (b - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
    };
    let (vo, vd) = (var(&ols), var(&dif));
    outcome(
        mean_err < 0.05 && vo < vd && elapsed < Duration::from_secs(60),
        format!(
            "mean |difference slope - beta1| {mean_err:.4} (< 0.05), var OLS {vo:.3e} < var difference {vd:.3e}, {}",
            secs(elapsed)
        ),
    )
}

fn simulate_output(extra: &[&str]) -> (bool, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_collinear-lens"))
        .args(["simulate", "--seed", "42", "--table", "2"])
        .args(extra)
        .output()
        .expect("binary runs");
    (
        out.status.success(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    )
}

fn simulate_determinism() -> Outcome {
    let runs = [
        simulate_output(&[]),
        simulate_output(&[]),
        simulate_output(&["--threads", "1"]),
        simulate_output(&["--threads", "3"]),
    ];
    let ok = runs.iter().all(|(s, _)| *s);
    let same = runs.iter().all(|(_, o)| *o == runs[0].1);
    outcome(
        ok && same && !runs[0].1.is_empty(),
        format!(
            "two default runs, --threads 1 and --threads 3 byte-identical: {same} ({} bytes)",
            runs[0].1.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("decomposition identity", decomposition_identity),
        ("cumulative weights", cumulative_weights_reproduce_slope),
        ("residualized regression", residualized_regression),
        ("squared correlation product", squared_correlation_product),
        ("population-structure table", population_structure_table),
        ("sample-selection table", sample_selection_table),
        ("row duplication", duplication_law),
        ("transform round trip", transform_round_trip),
        ("ridge path", ridge_shrinkage),
        ("difference consistency", difference_consistency),
        ("simulate determinism", simulate_determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {}",
            k + 1,
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
