use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::TimeSeriesMatrix;

const ESCAPE_BOUND: f64 = 10.0;

/// Two coupled logistic maps. `c_xy` scales the influence of X on Y, `c_yx`
/// the influence of Y on X.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub r_x: f64,
    pub r_y: f64,
    pub c_xy: f64,
    pub c_yx: f64,
    pub x0: f64,
    pub y0: f64,
    pub t: usize,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            r_x: 3.8,
            r_y: 3.5,
            c_xy: 0.1,
            c_yx: 0.02,
            x0: 0.8,
            y0: 0.8,
            t: 1800,
        }
    }
}

/// Returns a 2 x T matrix (rows X, Y) whose first column is `(x0, y0)`.
pub fn gen_logistic(cfg: &LogisticConfig) -> Result<TimeSeriesMatrix> {
    if cfg.t == 0 {
        return Err(Error::Config("logistic map needs T >= 1".into()));
    }
    if !(0.0..=1.0).contains(&cfg.x0) || !(0.0..=1.0).contains(&cfg.y0) {
        return Err(Error::Config("initial values must lie in [0, 1]".into()));
    }
    let mut out = DMatrix::zeros(2, cfg.t);
    let (mut x, mut y) = (cfg.x0, cfg.y0);
    out[(0, 0)] = x;
    out[(1, 0)] = y;
    for t in 1..cfg.t {
        let nx = cfg.r_x * x * (1.0 - x) - cfg.c_yx * y * x;
        let ny = cfg.r_y * y * (1.0 - y) - cfg.c_xy * x * y;
        if !(nx.abs() <= ESCAPE_BOUND && ny.abs() <= ESCAPE_BOUND) {
            return Err(Error::DivergenceDetected(format!("logistic map escaped at t = {t}")));
        }
        x = nx;
        y = ny;
        out[(0, t)] = x;
        out[(1, t)] = y;
    }
    TimeSeriesMatrix::with_labels(out, vec!["X".into(), "Y".into()])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_by_hand() {
        let s = gen_logistic(&LogisticConfig { t: 2, ..Default::default() }).unwrap();
        // 3.8*0.8*0.2 - 0.02*0.64 and 3.5*0.8*0.2 - 0.1*0.64
        assert!((s.data()[(0, 1)] - 0.5952).abs() < 1e-12);
        assert!((s.data()[(1, 1)] - 0.4960).abs() < 1e-12);
    }

    #[test]
    fn uncoupled_r2_fixed_point() {
        let cfg = LogisticConfig { r_x: 2.0, r_y: 2.0, c_xy: 0.0, c_yx: 0.0, x0: 0.5, y0: 0.5, t: 5 };
        let s = gen_logistic(&cfg).unwrap();
        assert!(s.data().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn single_column() {
        let s = gen_logistic(&LogisticConfig { t: 1, ..Default::default() }).unwrap();
        assert_eq!(s.data().as_slice(), &[0.8, 0.8]);
    }

    #[test]
    fn default_trajectory_stays_bounded() {
        let s = gen_logistic(&LogisticConfig::default()).unwrap();
        assert_eq!(s.len(), 1800);
        assert!(s.data().iter().all(|&v| (0.0..=1.2).contains(&v)));
    }

    #[test]
    fn escape_is_reported() {
        let cfg = LogisticConfig { r_x: 6.0, x0: 0.5, ..Default::default() };
        assert!(matches!(gen_logistic(&cfg), Err(Error::DivergenceDetected(_))));
    }
}
