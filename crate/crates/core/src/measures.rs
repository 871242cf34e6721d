//! Dependency measures on a stochastic matrix and the pairwise tables built
//! from them.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::LambdaFit;
use crate::types::StochasticMatrix;

/// Sum of all singular values.
pub fn schatten1(m: &StochasticMatrix) -> f64 {
    m.matrix().singular_values().sum()
}

/// Mean over rows of the sample variance (divisor `K_X - 1`) of each row.
pub fn avg_row_variance(m: &StochasticMatrix) -> Result<f64> {
    let lambda = m.matrix();
    let kx = lambda.ncols();
    if kx < 2 {
        return Err(Error::DegenerateShape(format!(
            "row variance needs at least two columns, got {kx}"
        )));
    }
    let total: f64 = lambda
        .row_iter()
        .map(|row| {
            // pairwise form of the sample variance: exactly zero for equal entries
            let mut acc = 0.0;
            for a in 0..kx {
                for b in a + 1..kx {
                    acc += (row[a] - row[b]).powi(2);
                }
            }
            acc / (kx * (kx - 1)) as f64
        })
        .sum();
    Ok(total / lambda.nrows() as f64)
}

/// `(a - b) / max(a, b)`, and 0 when the maximum is 0.
pub fn relative_difference(a: f64, b: f64) -> f64 {
    let max = a.max(b);
    if max == 0.0 {
        0.0
    } else {
        (a - b) / max
    }
}

/// Pairwise measures for N variables. Entry `(i, j)` of an `m_*` matrix is the
/// measure of the mapping from variable i to variable j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependencyReport {
    pub variable_names: Vec<String>,
    pub m_schatten: DMatrix<f64>,
    pub m_rowvar: DMatrix<f64>,
    pub delta_schatten: DMatrix<f64>,
    pub delta_rowvar: DMatrix<f64>,
    pub tau: usize,
}

impl DependencyReport {
    /// Assembles a report from precomputed measure matrices.
    pub fn from_measures(
        variable_names: Vec<String>,
        m_schatten: DMatrix<f64>,
        m_rowvar: DMatrix<f64>,
        tau: usize,
    ) -> Result<Self> {
        let n = variable_names.len();
        for (what, m) in [("m_schatten", &m_schatten), ("m_rowvar", &m_rowvar)] {
            if m.shape() != (n, n) {
                return Err(Error::DimensionMismatch(format!(
                    "{what} is {:?}, expected {n}x{n}",
                    m.shape()
                )));
            }
        }
        Ok(Self {
            delta_schatten: delta(&m_schatten),
            delta_rowvar: delta(&m_rowvar),
            variable_names,
            m_schatten,
            m_rowvar,
            tau,
        })
    }
}

/// Antisymmetric relative-difference table with a zero diagonal.
pub fn delta(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else if i < j {
            relative_difference(m[(i, j)], m[(j, i)])
        } else {
            -relative_difference(m[(j, i)], m[(i, j)])
        }
    })
}

/// Builds both measure tables from `fits[i][j]`, the mapping from variable i
/// to variable j. Missing entries (typically the diagonal) are recorded as 0.
pub fn build_report(fits: &[Vec<Option<LambdaFit>>], names: &[String]) -> Result<DependencyReport> {
    let n = names.len();
    if fits.len() != n || fits.iter().any(|row| row.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "fit table must be {n}x{n} to match the variable names"
        )));
    }
    let mut schatten = DMatrix::zeros(n, n);
    let mut rowvar = DMatrix::zeros(n, n);
    let mut tau = None;
    for (i, row) in fits.iter().enumerate() {
        for (j, fit) in row.iter().enumerate() {
            let Some(fit) = fit else {
                if i != j {
                    return Err(Error::InvalidInput(format!("missing fit from {i} to {j}")));
                }
                continue;
            };
            match tau {
                None => tau = Some(fit.tau),
                Some(t) if t != fit.tau => {
                    return Err(Error::InvalidInput("fits use different time shifts".into()))
                }
                _ => {}
            }
            schatten[(i, j)] = schatten1(&fit.lambda);
            rowvar[(i, j)] = avg_row_variance(&fit.lambda)?;
        }
    }
    DependencyReport::from_measures(names.to_vec(), schatten, rowvar, tau.unwrap_or(0))
}
