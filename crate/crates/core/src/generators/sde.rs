//! Three planar diffusions where C evolves on its own, B follows C, and A
//! follows both, integrated with Euler-Maruyama.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::types::TimeSeriesMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdeConfig {
    pub alpha: f64,
    /// Diagonal of C's noise matrix.
    pub sigma_c: [f64; 2],
    /// Noise level shared by A and B.
    pub sigma_ab: f64,
    pub dt: f64,
    pub steps: usize,
    pub seed: u64,
    pub a0: [f64; 2],
    pub b0: [f64; 2],
    pub c0: [f64; 2],
}

impl Default for SdeConfig {
    fn default() -> Self {
        Self {
            alpha: 5.0,
            sigma_c: [0.01, 0.05],
            sigma_ab: 0.2,
            dt: 0.1,
            steps: 1000,
            seed: 0,
            a0: [1.0, 1.0],
            b0: [1.0, 1.0],
            c0: [1.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdeSeries {
    pub a: TimeSeriesMatrix,
    pub b: TimeSeriesMatrix,
    pub c: TimeSeriesMatrix,
}

fn g(x: [f64; 2]) -> [f64; 2] {
    [0.0, -10.0 * (x[1].powi(3) - x[1])]
}

fn h(x: [f64; 2]) -> [f64; 2] {
    [-(x[0].powi(3) - x[0]), -1.0]
}

/// Each output is 2 x steps; column 0 is the initial state.
pub fn gen_sde(cfg: &SdeConfig) -> Result<SdeSeries> {
    if !(cfg.dt > 0.0) || cfg.steps == 0 {
        return Err(Error::Config("SDE needs dt > 0 and steps >= 1".into()));
    }
    let mut rng = stream_rng(cfg.seed, 0);
    let sq = cfg.dt.sqrt();
    let (mut a, mut b, mut c) = (cfg.a0, cfg.b0, cfg.c0);
    let mut out = [DMatrix::zeros(2, cfg.steps), DMatrix::zeros(2, cfg.steps), DMatrix::zeros(2, cfg.steps)];

    for t in 0..cfg.steps {
        if t > 0 {
            let mut noise = [0.0; 6];
            for n in noise.iter_mut() {
                *n = StandardNormal.sample(&mut rng);
            }
            let (gc, hb, ha) = (g(c), h(b), h(a));
            let mut nc = c;
            let mut nb = b;
            let mut na = a;
            for i in 0..2 {
                nc[i] += gc[i] * cfg.dt + cfg.sigma_c[i] * sq * noise[i];
                nb[i] += (cfg.alpha * hb[i] - 10.0 * (b[i] - c[i])) * cfg.dt + cfg.sigma_ab * sq * noise[2 + i];
                na[i] += (cfg.alpha * ha[i] - 5.0 * (a[i] - b[i]) - 5.0 * (a[i] - c[i])) * cfg.dt
                    + cfg.sigma_ab * sq * noise[4 + i];
            }
            if [na, nb, nc].iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::DivergenceDetected(format!("SDE state non-finite at step {t}")));
            }
            (a, b, c) = (na, nb, nc);
        }
        for (m, s) in out.iter_mut().zip([a, b, c]) {
            m[(0, t)] = s[0];
            m[(1, t)] = s[1];
        }
    }
    let [ma, mb, mc] = out;
    Ok(SdeSeries {
        a: TimeSeriesMatrix::new(ma)?,
        b: TimeSeriesMatrix::new(mb)?,
        c: TimeSeriesMatrix::new(mc)?,
    })
}
