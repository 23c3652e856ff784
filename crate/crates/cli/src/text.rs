//! Aligned text layouts for simulation results.

use std::fmt::Write;

use collinear_lens_core::montecarlo::{
    ExperimentResult, TableGrid, GRID_BETA1_MAGNITUDES, GRID_RHOS, GRID_SAMPLE_SIZES,
};

fn percent(p: f64) -> String {
    format!("{:.2}%", 100.0 * p)
}

/// Grid laid out as rows of `n` and column blocks of `ρ`, simulated value
/// above the reference one in parentheses.
pub fn table_layout(grid: &TableGrid) -> String {
    let mut out = String::new();
    let cell_w = 10;
    for table in &grid.tables {
        let sign = if table.table == 1 { -1.0 } else { 1.0 };
        let _ = writeln!(
            out,
            "Table {}: share of trials with partial slope of x1 < 0 ({} trials, seed {})",
            table.table, grid.trials, grid.seed
        );
        let block_w = cell_w * GRID_BETA1_MAGNITUDES.len();
        let mut line = format!("{:<6}", "");
        for rho in GRID_RHOS {
            line.push_str(&format!("{:<block_w$}", format!("rho = {rho}")));
        }
        let _ = writeln!(out, "{}", line.trim_end());
        let mut line = format!("{:<6}", "n");
        for _ in GRID_RHOS {
            for b in GRID_BETA1_MAGNITUDES {
                line.push_str(&format!("{:>cell_w$}", format!("{}", sign * b)));
            }
        }
        let _ = writeln!(out, "{line}");
        for n in GRID_SAMPLE_SIZES {
            let mut sim = format!("{n:<6}");
            let mut pubd = format!("{:<6}", "");
            for rho in GRID_RHOS {
                for b in GRID_BETA1_MAGNITUDES {
                    match table.cell(n, rho, sign * b) {
                        Some(c) => {
                            sim.push_str(&format!("{:>cell_w$}", percent(c.result.proportion)));
                            pubd.push_str(&format!(
                                "{:>cell_w$}",
                                format!("({})", percent(c.reference))
                            ));
                        }
                        None => {
                            sim.push_str(&format!("{:>cell_w$}", "-"));
                            pubd.push_str(&format!("{:>cell_w$}", ""));
                        }
                    }
                }
            }
            let _ = writeln!(out, "{sim}");
            let _ = writeln!(out, "{}", pubd.trim_end());
        }
        for w in &table.warnings {
            let _ = writeln!(out, "note: {w}");
        }
        out.push('\n');
    }
    out
}

pub fn experiment_summary(r: &ExperimentResult, reference: Option<f64>) -> String {
    let c = &r.config;
    let mut out = format!(
        "n = {}, rho = {}, beta1 = {}: {} of {} trials flagged ({} +/- {})\n",
        c.n,
        c.rho,
        c.beta1,
        r.flagged,
        c.trials,
        percent(r.proportion),
        percent(r.mc_std_err)
    );
    let _ = writeln!(
        out,
        "normal approximation {}, exact finite-sample {}",
        percent(r.analytic_approx),
        percent(r.finite_sample_exact)
    );
    if let Some(p) = reference {
        let _ = writeln!(out, "reference {}", percent(p));
    }
    out
}
