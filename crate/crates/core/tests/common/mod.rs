#![allow(dead_code)]

use collinear_lens_core::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Random full-rank design: columns share a common factor with loading up to
/// `max_loading`, get random scales and offsets, and `y` is a random linear
/// combination plus unit noise.
pub fn correlated_dataset(seed: u64, n: usize, p: usize, max_loading: f64) -> Dataset {
    let mut r = rng(seed);
    let common = normals(&mut r, n);
    let mut cols = Vec::with_capacity(p);
    for _ in 0..p {
        let a: f64 = r.random_range(-max_loading..=max_loading);
        let scale: f64 = r.random_range(0.5..20.0);
        let offset: f64 = r.random_range(-10.0..10.0);
        let own = normals(&mut r, n);
        let b = (1.0 - a * a).sqrt();
        cols.push(
            common
                .iter()
                .zip(&own)
                .map(|(c, e)| offset + scale * (a * c + b * e))
                .collect::<Vec<f64>>(),
        );
    }
    let beta: Vec<f64> = (0..p).map(|_| r.random_range(-2.0..2.0)).collect();
    let noise = normals(&mut r, n);
    let y = (0..n)
        .map(|i| 1.5 + noise[i] + (0..p).map(|j| beta[j] * cols[j][i]).sum::<f64>())
        .collect();
    Dataset::from_design(&cols, y).unwrap()
}

/// Draw from the bivariate design `x₂ = ρx₁ + √(1-ρ²)ε`, both with sd 5.
pub fn bivariate_dgp(seed: u64, n: usize, rho: f64, beta1: f64) -> Dataset {
    let mut r = rng(seed);
    let x1: Vec<f64> = normals(&mut r, n).iter().map(|v| 5.0 * v).collect();
    let e = normals(&mut r, n);
    let u = normals(&mut r, n);
    let mix = (1.0 - rho * rho).sqrt();
    let x2: Vec<f64> = x1
        .iter()
        .zip(&e)
        .map(|(a, b)| rho * a + mix * 5.0 * b)
        .collect();
    let y = (0..n).map(|i| 2.0 + beta1 * x1[i] + x2[i] + u[i]).collect();
    Dataset::from_design(&[x1, x2], y).unwrap()
}

pub fn shuffled(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

pub fn max_abs_gap(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Textbook correlation, computed without the crate.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

pub fn residual_sum_of_squares(data: &Dataset, intercept: f64, slopes: &[f64]) -> f64 {
    let cols: Vec<&Vec<f64>> = data.regressors().map(|c| &c.values).collect();
    data.response()
        .iter()
        .enumerate()
        .map(|(i, y)| {
            let fit = intercept + cols.iter().zip(slopes).map(|(c, b)| b * c[i]).sum::<f64>();
            (y - fit).powi(2)
        })
        .sum()
}
