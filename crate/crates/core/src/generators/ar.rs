//! Block-triangular vector autoregression: the first block (X) is driven by
//! the second (Y), never the reverse.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::types::TimeSeriesMatrix;

/// Trajectories beyond this magnitude are treated as unstable draws.
pub const AR_DIVERGENCE_LIMIT: f64 = 1e6;

// independent streams so coefficient edits never shift the noise sequence
const COEFF_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArConfig {
    pub block_dim: usize,
    pub p: usize,
    /// Standard deviation of the lag-i coefficient entries.
    pub coeff_stds: Vec<f64>,
    /// Noise covariance is `noise_cov_scale * I`.
    pub noise_cov_scale: f64,
    pub t: usize,
    pub seed: u64,
}

impl Default for ArConfig {
    fn default() -> Self {
        Self {
            block_dim: 4,
            p: 3,
            coeff_stds: vec![0.1, 0.05, 0.03],
            noise_cov_scale: 0.01,
            t: 1000,
            seed: 0,
        }
    }
}

impl ArConfig {
    fn validate(&self) -> Result<()> {
        if self.p == 0 || self.block_dim == 0 {
            return Err(Error::Config("AR order and block dimension must be positive".into()));
        }
        if self.coeff_stds.len() != self.p {
            return Err(Error::Config(format!(
                "expected {} coefficient spreads, got {}",
                self.p,
                self.coeff_stds.len()
            )));
        }
        if self.coeff_stds.iter().any(|&s| !(s >= 0.0)) || !(self.noise_cov_scale >= 0.0) {
            return Err(Error::Config("AR spreads must be non-negative".into()));
        }
        if self.t <= self.p {
            return Err(Error::Config(format!("AR needs T > p = {}", self.p)));
        }
        Ok(())
    }
}

/// Lag matrices `phi_1..phi_p`, each `2 block_dim` square.
#[derive(Debug, Clone, PartialEq)]
pub struct ArCoefficients {
    pub phi: Vec<DMatrix<f64>>,
}

impl ArCoefficients {
    /// Top-left block of lag `i` (X on X).
    pub fn x_block_mut(&mut self, i: usize, block_dim: usize) -> nalgebra::DMatrixViewMut<'_, f64> {
        self.phi[i].view_mut((0, 0), (block_dim, block_dim))
    }
}

pub fn draw_ar_coefficients<R: Rng>(cfg: &ArConfig, rng: &mut R) -> ArCoefficients {
    let n = 2 * cfg.block_dim;
    let phi = cfg
        .coeff_stds
        .iter()
        .map(|&std| {
            let mut m = DMatrix::from_fn(n, n, |_, _| std * Distribution::<f64>::sample(&StandardNormal, rng));
            m.view_mut((cfg.block_dim, 0), (cfg.block_dim, cfg.block_dim)).fill(0.0);
            m
        })
        .collect();
    ArCoefficients { phi }
}

/// Runs the recursion. `initial` fills the first p columns (zeros if `None`).
pub fn simulate_ar(coeffs: &ArCoefficients, cfg: &ArConfig, initial: Option<&DMatrix<f64>>) -> Result<TimeSeriesMatrix> {
    cfg.validate()?;
    let n = 2 * cfg.block_dim;
    if coeffs.phi.len() != cfg.p || coeffs.phi.iter().any(|m| m.shape() != (n, n)) {
        return Err(Error::DimensionMismatch("coefficients do not match the AR config".into()));
    }
    let mut x = DMatrix::zeros(n, cfg.t);
    if let Some(init) = initial {
        if init.shape() != (n, cfg.p) {
            return Err(Error::DimensionMismatch(format!("initial block must be {n}x{}", cfg.p)));
        }
        x.columns_mut(0, cfg.p).copy_from(init);
    }
    let mut rng = stream_rng(cfg.seed, NOISE_STREAM);
    let noise_std = cfg.noise_cov_scale.sqrt();
    for t in cfg.p..cfg.t {
        let mut next = DVector::from_fn(n, |_, _| noise_std * Distribution::<f64>::sample(&StandardNormal, &mut rng));
        for (i, phi) in coeffs.phi.iter().enumerate() {
            next.gemv(1.0, phi, &x.column(t - 1 - i), 1.0);
        }
        if next.iter().any(|v| !(v.abs() <= AR_DIVERGENCE_LIMIT)) {
            return Err(Error::DivergenceDetected(format!("AR trajectory exceeded 1e6 at t = {t}")));
        }
        x.set_column(t, &next);
    }
    TimeSeriesMatrix::new(x)
}

/// Draws coefficients and simulates; rows `0..block_dim` are X, the rest Y.
pub fn gen_ar(cfg: &ArConfig) -> Result<TimeSeriesMatrix> {
    cfg.validate()?;
    let coeffs = draw_ar_coefficients(cfg, &mut stream_rng(cfg.seed, COEFF_STREAM));
    simulate_ar(&coeffs, cfg, None)
}
