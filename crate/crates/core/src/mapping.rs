//! Lagged column-stochastic mapping between two affiliation series.
//!
//! Fits `Lambda` minimising `||G^Y_{1+tau:T} - Lambda G^X_{1:T-tau}||_F` over
//! column-stochastic matrices with plain projected gradient. The objective is
//! evaluated through the Gram matrices so an iteration costs O(K_Y K_X^2)
//! regardless of T.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qp::largest_eigenvalue;
use crate::simplex::project_in_place;
use crate::types::{
    validate_stochastic, AffiliationSeries, SegmentedAffiliationPair, StochasticMatrix,
    COLUMN_SUM_TOL, NONNEG_TOL,
};

pub const LAMBDA_REL_TOL: f64 = 1e-10;
pub const LAMBDA_MAX_ITERS: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaFit {
    pub lambda: StochasticMatrix,
    /// Frobenius norm of the training mismatch.
    pub residual: f64,
    pub tau: usize,
    pub pairs_used: usize,
    pub iterations: usize,
}

/// Sufficient statistics of the least-squares problem.
struct Normal {
    /// `A A'` (K_X x K_X) where A stacks the source columns.
    gram: DMatrix<f64>,
    /// `B A'` (K_Y x K_X) where B stacks the target columns.
    cross: DMatrix<f64>,
    /// `||B||_F^2`.
    target_sq: f64,
    pairs: usize,
}

impl Normal {
    fn new(kx: usize, ky: usize) -> Self {
        Self {
            gram: DMatrix::zeros(kx, kx),
            cross: DMatrix::zeros(ky, kx),
            target_sq: 0.0,
            pairs: 0,
        }
    }

    fn add(&mut self, source: &AffiliationSeries, target: &AffiliationSeries, tau: usize) {
        let n = source.len() - tau;
        let a = source.gamma().columns(0, n);
        let b = target.gamma().columns(tau, n);
        self.gram += &a * a.transpose();
        self.cross += &b * a.transpose();
        self.target_sq += b.norm_squared();
        self.pairs += n;
    }

    /// `||B - Lambda A||_F^2` expanded; clamped at zero against cancellation.
    fn objective(&self, lambda: &DMatrix<f64>) -> f64 {
        let lg = lambda * &self.gram;
        let quad = lg.dot(lambda);
        let lin = self.cross.dot(lambda);
        (self.target_sq - 2.0 * lin + quad).max(0.0)
    }
}

/// Fits `Lambda` with `gamma^Y_t ~ Lambda gamma^X_{t-tau}`. With `source ==
/// target` this is the self-dynamics model.
pub fn fit_lambda(source: &AffiliationSeries, target: &AffiliationSeries, tau: usize) -> Result<LambdaFit> {
    fit_lambda_traced(source, target, tau).map(|(fit, _)| fit)
}

/// Same as [`fit_lambda`], also returning the objective (squared residual)
/// after initialisation and after every iteration.
pub fn fit_lambda_traced(
    source: &AffiliationSeries,
    target: &AffiliationSeries,
    tau: usize,
) -> Result<(LambdaFit, Vec<f64>)> {
    if source.len() != target.len() {
        return Err(Error::DimensionMismatch(format!(
            "source length {} != target length {}",
            source.len(),
            target.len()
        )));
    }
    if source.len() <= tau {
        return Err(Error::InsufficientData(format!(
            "series of length {} cannot support tau = {tau}",
            source.len()
        )));
    }
    let mut normal = Normal::new(source.k(), target.k());
    normal.add(source, target, tau);
    solve(&normal, tau)
}

/// Fits one `Lambda` on the lagged pairs of every segment; pairs never cross
/// a segment boundary.
pub fn fit_lambda_segmented(pair: &SegmentedAffiliationPair) -> Result<LambdaFit> {
    let (x0, y0) = &pair.segments()[0];
    let mut normal = Normal::new(x0.k(), y0.k());
    for (x, y) in pair.segments() {
        normal.add(x, y, pair.tau());
    }
    solve(&normal, pair.tau()).map(|(fit, _)| fit)
}

fn solve(normal: &Normal, tau: usize) -> Result<(LambdaFit, Vec<f64>)> {
    let (ky, kx) = normal.cross.shape();
    let mut lambda = DMatrix::from_element(ky, kx, 1.0 / ky as f64);
    let l = largest_eigenvalue(&normal.gram);
    let mut objective = normal.objective(&lambda);
    let mut history = vec![objective];
    let mut iterations = 0;

    if ky > 1 && l > f64::MIN_POSITIVE {
        let step = 1.0 / l;
        let floor = normal.target_sq * f64::EPSILON * f64::EPSILON;
        let mut col = vec![0.0; ky];
        while iterations < LAMBDA_MAX_ITERS && objective > floor {
            iterations += 1;
            // gradient of 0.5 * objective
            let grad = &lambda * &normal.gram - &normal.cross;
            let mut next = &lambda - grad * step;
            for j in 0..kx {
                col.copy_from_slice(next.column(j).as_slice());
                project_in_place(&mut col);
                next.column_mut(j).copy_from_slice(&col);
            }
            let value = normal.objective(&next);
            lambda = next;
            history.push(value);
            let change = (objective - value).abs();
            objective = value;
            if change <= LAMBDA_REL_TOL * history[history.len() - 2] {
                break;
            }
        }
    }

    Ok((
        LambdaFit {
            lambda: validate_stochastic(&lambda)?,
            residual: objective.sqrt(),
            tau,
            pairs_used: normal.pairs,
            iterations,
        },
        history,
    ))
}

/// `Lambda gamma`: the predicted target affiliation for a source state.
pub fn predict(fit: &LambdaFit, source_state: &[f64]) -> Result<Vec<f64>> {
    let lambda = fit.lambda.matrix();
    if source_state.len() != lambda.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "state has {} entries, Lambda has {} columns",
            source_state.len(),
            lambda.ncols()
        )));
    }
    let sum: f64 = source_state.iter().sum();
    if source_state.iter().any(|&g| !g.is_finite() || g < -NONNEG_TOL) || (sum - 1.0).abs() > COLUMN_SUM_TOL {
        return Err(Error::InvalidInput("source state is not a stochastic vector".into()));
    }
    Ok((lambda * DVector::from_column_slice(source_state)).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn aff(k: usize, t: usize, v: &[f64]) -> AffiliationSeries {
        AffiliationSeries::new(DMatrix::from_column_slice(k, t, v)).unwrap()
    }

    fn cycle(t: usize) -> AffiliationSeries {
        AffiliationSeries::new(DMatrix::from_fn(3, t, |r, c| if c % 3 == r { 1.0 } else { 0.0 })).unwrap()
    }

    #[test]
    fn cyclic_source_gives_permutation() {
        let x = cycle(12);
        let fit = fit_lambda(&x, &x, 1).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!((fit.lambda.matrix() - expected).abs().max() < 1e-6);
        assert!(fit.residual < 1e-6);
        assert_eq!(fit.pairs_used, 11);
    }

    #[test]
    fn constant_target_copied_into_every_column() {
        let x = cycle(9);
        let c = [0.2, 0.5, 0.3];
        let y = aff(3, 9, &c.repeat(9));
        let fit = fit_lambda(&x, &y, 2).unwrap();
        for j in 0..3 {
            for i in 0..3 {
                assert!((fit.lambda.matrix()[(i, j)] - c[i]).abs() < 1e-6);
            }
        }
        assert!(fit.residual < 1e-6);
    }

    #[test]
    fn one_by_one_is_trivial() {
        let x = aff(1, 4, &[1.0; 4]);
        let fit = fit_lambda(&x, &x, 1).unwrap();
        assert_eq!(fit.lambda.matrix()[(0, 0)], 1.0);
        assert_eq!(fit.residual, 0.0);
    }

    #[test]
    fn tau_must_leave_a_pair() {
        let x = cycle(3);
        assert!(matches!(fit_lambda(&x, &x, 3), Err(Error::InsufficientData(_))));
        assert!(fit_lambda(&x, &x, 2).is_ok());
    }

    #[test]
    fn unused_source_state_keeps_uniform_column() {
        // source never visits state 2
        let x = aff(3, 4, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let fit = fit_lambda(&x, &x, 1).unwrap();
        for i in 0..3 {
            assert!((fit.lambda.matrix()[(i, 2)] - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn segmented_matches_single_and_duplicate() {
        let x = aff(2, 5, &[0.9, 0.1, 0.2, 0.8, 0.6, 0.4, 0.1, 0.9, 0.7, 0.3]);
        let y = aff(2, 5, &[0.3, 0.7, 0.8, 0.2, 0.5, 0.5, 0.9, 0.1, 0.2, 0.8]);
        let single = fit_lambda(&x, &y, 1).unwrap();
        let one = fit_lambda_segmented(&SegmentedAffiliationPair::new(vec![(x.clone(), y.clone())], 1).unwrap()).unwrap();
        assert_eq!(single, one);
        let two = fit_lambda_segmented(
            &SegmentedAffiliationPair::new(vec![(x.clone(), y.clone()), (x, y)], 1).unwrap(),
        )
        .unwrap();
        assert!((two.lambda.matrix() - single.lambda.matrix()).abs().max() < 1e-6);
        assert_eq!(two.pairs_used, 8);
    }

    #[test]
    fn short_segments_are_dropped() {
        let a = aff(2, 3, &[1.0, 0.0, 0.0, 1.0, 1.0, 0.0]);
        let b = aff(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let pair = SegmentedAffiliationPair::new(vec![(a.clone(), a), (b.clone(), b)], 2).unwrap();
        assert_eq!(fit_lambda_segmented(&pair).unwrap().pairs_used, 1);
    }

    #[test]
    fn predict_examples() {
        let x = cycle(7);
        let fit = fit_lambda(&x, &x, 1).unwrap();
        let col = predict(&fit, &[0.0, 1.0, 0.0]).unwrap();
        for i in 0..3 {
            assert!((col[i] - fit.lambda.matrix()[(i, 1)]).abs() < 1e-15);
        }
        let uniform = LambdaFit {
            lambda: StochasticMatrix::uniform(4, 2),
            residual: 0.0,
            tau: 1,
            pairs_used: 1,
            iterations: 0,
        };
        assert!(predict(&uniform, &[0.3, 0.7]).unwrap().iter().all(|v| (v - 0.25).abs() < 1e-15));
        let identity = LambdaFit {
            lambda: validate_stochastic(&DMatrix::identity(2, 2)).unwrap(),
            ..uniform
        };
        assert_eq!(predict(&identity, &[0.3, 0.7]).unwrap(), vec![0.3, 0.7]);
        assert!(predict(&identity, &[0.3, 0.3]).is_err());
        assert!(predict(&identity, &[1.0]).is_err());
    }

    #[test]
    fn trace_is_monotone() {
        let x = aff(3, 6, &[0.2, 0.3, 0.5, 0.7, 0.1, 0.2, 0.0, 0.5, 0.5, 0.4, 0.4, 0.2, 0.9, 0.05, 0.05, 0.3, 0.3, 0.4]);
        let y = aff(2, 6, &[0.5, 0.5, 0.9, 0.1, 0.2, 0.8, 0.6, 0.4, 0.3, 0.7, 0.0, 1.0]);
        let (_, trace) = fit_lambda_traced(&x, &y, 1).unwrap();
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }
}
