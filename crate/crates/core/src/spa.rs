//! Landmark representation: fitting landmarks and barycentric affiliations
//! (`min ||X - Sigma Gamma||_F` over simplex-valued columns of Gamma), the
//! reference-anchored representation `rho`, and reconstruction.

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qp::SimplexQp;
use crate::rng::stream_rng;
use crate::types::{AffiliationSeries, LandmarkSet, TimeSeriesMatrix};

/// Weight of the proximity term that selects, among equally good
/// representations, the one closest to the reference coordinate.
pub const RHO_EPSILON: f64 = 1e-6;
/// Ridge added to `Gamma Gamma'` in the landmark update.
pub const SIGMA_RIDGE: f64 = 1e-10;
/// Jitter applied to seeded landmarks, relative to each row's standard deviation.
const INIT_JITTER: f64 = 1e-3;
/// The landmark fit stops once the residual falls below this fraction of
/// `||X||_F`; with K > D the residual otherwise decays geometrically forever.
pub const EXACT_FIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spa1Config {
    pub k: usize,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub restarts: usize,
    pub seed: u64,
    pub fixed_landmarks: Option<LandmarkSet>,
}

impl Spa1Config {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            max_iters: 500,
            rel_tol: 1e-8,
            restarts: 5,
            seed,
            fixed_landmarks: None,
        }
    }

    pub fn with_fixed_landmarks(landmarks: LandmarkSet) -> Self {
        Self {
            k: landmarks.k(),
            fixed_landmarks: Some(landmarks),
            ..Self::new(1, 0)
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("K must be at least 1".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::Config("rel_tol must be positive".into()));
        }
        if self.max_iters == 0 || self.restarts == 0 {
            return Err(Error::Config("max_iters and restarts must be positive".into()));
        }
        if let Some(fixed) = &self.fixed_landmarks {
            if fixed.k() != self.k {
                return Err(Error::Config(format!(
                    "fixed landmark count {} differs from K = {}",
                    fixed.k(),
                    self.k
                )));
            }
            if fixed.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "landmarks have dimension {}, data has {dim}",
                    fixed.dim()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spa1Solution {
    pub landmarks: LandmarkSet,
    pub affiliations: AffiliationSeries,
    /// Frobenius residual `||X - Sigma Gamma||_F`.
    pub objective: f64,
    pub iterations_used: usize,
    /// Objective after initialisation and after every alternating sweep.
    pub objective_history: Vec<f64>,
}

/// Fits landmarks and affiliations, keeping the best of `cfg.restarts` seeded runs.
pub fn fit_spa1(data: &TimeSeriesMatrix, cfg: &Spa1Config) -> Result<Spa1Solution> {
    cfg.validate(data.dim())?;
    let x = data.data();

    if let Some(fixed) = &cfg.fixed_landmarks {
        let gamma = gamma_step(x, fixed.sigma(), None);
        let objective = residual_norm(x, fixed.sigma(), &gamma);
        return Ok(Spa1Solution {
            landmarks: fixed.clone(),
            affiliations: AffiliationSeries::new(gamma)?,
            objective,
            iterations_used: 1,
            objective_history: vec![objective],
        });
    }

    let runs: Vec<Result<Spa1Solution>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| single_run(x, cfg, r as u64))
        .collect();

    let mut best: Option<Spa1Solution> = None;
    let mut first_err = None;
    for run in runs {
        match run {
            Ok(sol) => {
                if best.as_ref().map_or(true, |b| sol.objective < b.objective) {
                    best = Some(sol);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.expect("at least one restart ran"))
}

fn single_run(x: &DMatrix<f64>, cfg: &Spa1Config, restart: u64) -> Result<Spa1Solution> {
    let mut rng = stream_rng(cfg.seed, restart);
    let mut sigma = initial_landmarks(x, cfg.k, &mut rng);
    let mut gamma = gamma_step(x, &sigma, None);
    let mut objective = residual_norm(x, &sigma, &gamma);
    let mut history = vec![objective];
    let mut iterations = 0;
    let floor = EXACT_FIT_TOL * x.norm();

    while iterations < cfg.max_iters {
        iterations += 1;
        if let Some(candidate) = sigma_step(x, &gamma, &sigma) {
            if residual_norm(x, &candidate, &gamma) <= objective {
                sigma = candidate;
            }
        }
        let candidate = gamma_step(x, &sigma, Some(&gamma));
        keep_better_columns(x, &sigma, &mut gamma, candidate);
        let next = residual_norm(x, &sigma, &gamma);
        history.push(next);
        let decrease = objective - next;
        objective = next;
        if objective <= floor || decrease <= cfg.rel_tol * history[history.len() - 2] {
            break;
        }
    }

    Ok(Spa1Solution {
        landmarks: LandmarkSet::new(sigma)?,
        affiliations: AffiliationSeries::new(gamma)?,
        objective,
        iterations_used: iterations,
        objective_history: history,
    })
}

/// K distinct data columns (with replacement only when T < K) plus small
/// Gaussian jitter scaled by each row's standard deviation.
fn initial_landmarks<R: Rng>(x: &DMatrix<f64>, k: usize, rng: &mut R) -> DMatrix<f64> {
    let (d, t) = x.shape();
    let mut picks: Vec<usize> = index::sample(rng, t, k.min(t)).into_vec();
    while picks.len() < k {
        picks.push(rng.random_range(0..t));
    }
    let scales: Vec<f64> = (0..d)
        .map(|r| {
            let row = x.row(r);
            let mean = row.mean();
            let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / t as f64;
            let std = var.sqrt();
            INIT_JITTER * if std > 0.0 { std } else { 1.0 }
        })
        .collect();
    let mut sigma = DMatrix::zeros(d, k);
    for (j, &col) in picks.iter().enumerate() {
        for r in 0..d {
            let z: f64 = StandardNormal.sample(rng);
            sigma[(r, j)] = x[(r, col)] + scales[r] * z;
        }
    }
    sigma
}

/// Least-squares landmark update with a small ridge. Landmarks that carry no
/// weight keep their previous position. Returns `None` when the update would
/// produce coincident landmarks or the solve fails.
fn sigma_step(x: &DMatrix<f64>, gamma: &DMatrix<f64>, previous: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let k = gamma.nrows();
    let mut gram = gamma * gamma.transpose();
    for i in 0..k {
        gram[(i, i)] += SIGMA_RIDGE;
    }
    let rhs = gamma * x.transpose();
    let chol = gram.cholesky()?;
    let mut sigma = chol.solve(&rhs).transpose();
    for j in 0..k {
        if gamma.row(j).iter().all(|&g| g == 0.0) {
            sigma.set_column(j, &previous.column(j));
        }
    }
    if sigma.iter().any(|v| !v.is_finite()) {
        return None;
    }
    LandmarkSet::new(sigma).ok().map(|l| l.sigma().clone())
}

/// Per-column simplex-constrained least squares, optionally warm-started.
fn gamma_step(x: &DMatrix<f64>, sigma: &DMatrix<f64>, warm: Option<&DMatrix<f64>>) -> DMatrix<f64> {
    let k = sigma.ncols();
    let t = x.ncols();
    let st = sigma.transpose();
    let qp = SimplexQp::from_factor(sigma, 0.0);
    let b_all = &st * x;
    let uniform = vec![1.0 / k as f64; k];
    let columns: Vec<Vec<f64>> = (0..t)
        .into_par_iter()
        .map(|c| {
            let b = b_all.column(c);
            let init = warm.map(|w| w.column(c).iter().cloned().collect::<Vec<_>>());
            qp.solve(b.as_slice(), init.as_deref().unwrap_or(&uniform))
        })
        .collect();
    DMatrix::from_fn(k, t, |r, c| columns[c][r])
}

fn column_error(x: &DMatrix<f64>, sigma: &DMatrix<f64>, gamma: &DMatrix<f64>, c: usize) -> f64 {
    (0..x.nrows())
        .map(|r| {
            let fit: f64 = (0..sigma.ncols()).map(|j| sigma[(r, j)] * gamma[(j, c)]).sum();
            (x[(r, c)] - fit).powi(2)
        })
        .sum()
}

fn keep_better_columns(x: &DMatrix<f64>, sigma: &DMatrix<f64>, current: &mut DMatrix<f64>, candidate: DMatrix<f64>) {
    for c in 0..x.ncols() {
        if column_error(x, sigma, &candidate, c) <= column_error(x, sigma, current, c) {
            current.set_column(c, &candidate.column(c));
        }
    }
}

fn residual_norm(x: &DMatrix<f64>, sigma: &DMatrix<f64>, gamma: &DMatrix<f64>) -> f64 {
    (0..x.ncols()).map(|c| column_error(x, sigma, gamma, c)).sum::<f64>().sqrt()
}

fn check_dims(data_dim: usize, landmarks: &LandmarkSet) -> Result<()> {
    if data_dim != landmarks.dim() {
        return Err(Error::DimensionMismatch(format!(
            "data dimension {data_dim} != landmark dimension {}",
            landmarks.dim()
        )));
    }
    Ok(())
}

/// Best barycentric coordinates of every column of `data` for fixed landmarks.
pub fn solve_gamma(data: &TimeSeriesMatrix, landmarks: &LandmarkSet) -> Result<AffiliationSeries> {
    check_dims(data.dim(), landmarks)?;
    AffiliationSeries::new(gamma_step(data.data(), landmarks.sigma(), None))
}

/// Among the coordinates that best represent `point`, the one closest to
/// `reference`. Realised as `||X - Sigma g||^2 + eps ||g - reference||^2`.
pub fn rho(point: &[f64], landmarks: &LandmarkSet, reference: &[f64]) -> Result<Vec<f64>> {
    check_dims(point.len(), landmarks)?;
    if reference.len() != landmarks.k() {
        return Err(Error::DimensionMismatch(format!(
            "reference has {} entries, expected {}",
            reference.len(),
            landmarks.k()
        )));
    }
    check_reference(reference)?;
    let sigma = landmarks.sigma();
    let st = sigma.transpose();
    let qp = SimplexQp::from_factor(sigma, RHO_EPSILON);
    let b = rho_linear(&st, &DVector::from_column_slice(point), reference);
    Ok(qp.solve(b.as_slice(), reference))
}

/// Sequential representation: `gamma_t = rho(X_t, gamma_{t-1})`, starting
/// from the uniform reference.
pub fn rho_series(data: &TimeSeriesMatrix, landmarks: &LandmarkSet) -> Result<AffiliationSeries> {
    check_dims(data.dim(), landmarks)?;
    let k = landmarks.k();
    let sigma = landmarks.sigma();
    let st = sigma.transpose();
    let qp = SimplexQp::from_factor(sigma, RHO_EPSILON);
    let mut reference = vec![1.0 / k as f64; k];
    let mut gamma = DMatrix::zeros(k, data.len());
    for (t, col) in data.data().column_iter().enumerate() {
        let b = rho_linear(&st, &col.into_owned(), &reference);
        let g = qp.solve(b.as_slice(), &reference);
        gamma.set_column(t, &DVector::from_column_slice(&g));
        reference = g;
    }
    AffiliationSeries::new(gamma)
}

fn rho_linear(st: &DMatrix<f64>, point: &DVector<f64>, reference: &[f64]) -> DVector<f64> {
    let mut b = st * point;
    for (bi, r) in b.iter_mut().zip(reference) {
        *bi += RHO_EPSILON * r;
    }
    b
}

fn check_reference(reference: &[f64]) -> Result<()> {
    let sum: f64 = reference.iter().sum();
    if reference.iter().any(|&r| !r.is_finite() || r < -crate::types::NONNEG_TOL)
        || (sum - 1.0).abs() > crate::types::COLUMN_SUM_TOL
    {
        return Err(Error::InvalidInput("reference is not a stochastic vector".into()));
    }
    Ok(())
}

/// `Sigma Gamma`.
pub fn reconstruct(landmarks: &LandmarkSet, affiliations: &AffiliationSeries) -> Result<TimeSeriesMatrix> {
    if landmarks.k() != affiliations.k() {
        return Err(Error::DimensionMismatch(format!(
            "{} landmarks but affiliations of size {}",
            landmarks.k(),
            affiliations.k()
        )));
    }
    TimeSeriesMatrix::new(landmarks.sigma() * affiliations.gamma())
}
