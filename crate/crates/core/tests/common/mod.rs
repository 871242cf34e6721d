//! Grid-search reference solutions shared by the test targets.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// All points of the 3-simplex on a grid of `1/n`.
pub fn simplex3_grid(n: usize) -> impl Iterator<Item = [f64; 3]> {
    (0..=n).flat_map(move |i| {
        (0..=n - i).map(move |j| {
            let (a, b) = (i as f64 / n as f64, j as f64 / n as f64);
            [a, b, (1.0 - a - b).max(0.0)]
        })
    })
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Minimum of `||x - Sigma g||^2` over a simplex grid of `1/1000`, for K = 3.
pub fn gamma_oracle(x: &[f64], sigma: &DMatrix<f64>) -> f64 {
    simplex3_grid(1000)
        .map(|g| {
            let fit = sigma * DVector::from_column_slice(&g);
            sq_dist(fit.as_slice(), x)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Minimum of `||B - Lambda A||_F^2` over 2x2 column-stochastic matrices:
/// a grid of step 0.05, then a 0.0005 grid around the coarse optimum.
pub fn lambda_oracle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let obj = |p: f64, q: f64| {
        let l = DMatrix::from_row_slice(2, 2, &[p, q, 1.0 - p, 1.0 - q]);
        (b - l * a).norm_squared()
    };
    let search = |lo_p: f64, lo_q: f64, span: f64, step: f64| {
        let n = (span / step).round() as usize;
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=n {
            for j in 0..=n {
                let p = (lo_p + i as f64 * step).clamp(0.0, 1.0);
                let q = (lo_q + j as f64 * step).clamp(0.0, 1.0);
                let v = obj(p, q);
                if v < best.0 {
                    best = (v, p, q);
                }
            }
        }
        best
    };
    let (_, p, q) = search(0.0, 0.0, 1.0, 0.05);
    search(p - 0.05, q - 0.05, 0.1, 0.0005).0
}
