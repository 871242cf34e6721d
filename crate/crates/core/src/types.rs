//! Validated numerical containers shared by every stage of the analysis.
//!
//! All containers are immutable once built; constructors check the
//! invariants and either repair tiny floating-point violations (clipping,
//! renormalising) or fail.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allowed deviation of a column sum from one.
pub const COLUMN_SUM_TOL: f64 = 1e-8;
/// Entries down to `-NONNEG_TOL` are treated as numerical zeros and clipped.
pub const NONNEG_TOL: f64 = 1e-10;
/// Landmarks closer than this are considered duplicates.
pub const DUPLICATE_LANDMARK_TOL: f64 = 1e-12;

fn check_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if let Some(pos) = m.iter().position(|x| !x.is_finite()) {
        let (r, c) = (pos % m.nrows(), pos / m.nrows());
        return Err(Error::InvalidInput(format!(
            "{what} has a non-finite entry at ({r}, {c})"
        )));
    }
    Ok(())
}

/// A D x T matrix of observations; column t is the state at time t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesMatrix {
    data: DMatrix<f64>,
    labels: Option<Vec<String>>,
}

impl TimeSeriesMatrix {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::InvalidInput("time series must be non-empty".into()));
        }
        check_finite(&data, "time series")?;
        Ok(Self { data, labels: None })
    }

    pub fn with_labels(data: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != data.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} rows",
                labels.len(),
                data.nrows()
            )));
        }
        let mut ts = Self::new(data)?;
        ts.labels = Some(labels);
        Ok(ts)
    }

    /// Builds a series from per-time-step state vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let dim = columns.first().map(Vec::len).unwrap_or(0);
        if columns.iter().any(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch("ragged columns".into()));
        }
        let data = DMatrix::from_fn(dim, columns.len(), |r, c| columns[c][r]);
        Self::new(data)
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.data
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn len(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.ncols() == 0
    }

    /// Rows `start..end` as a new series.
    pub fn rows(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "row range {start}..{end} out of 0..{}",
                self.dim()
            )));
        }
        let data = self.data.rows(start, end - start).into_owned();
        let labels = self.labels.as_ref().map(|l| l[start..end].to_vec());
        Ok(Self { data, labels })
    }

    /// Columns `start..end` as a new series.
    pub fn columns(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.len() {
            return Err(Error::DimensionMismatch(format!(
                "column range {start}..{end} out of 0..{}",
                self.len()
            )));
        }
        Ok(Self {
            data: self.data.columns(start, end - start).into_owned(),
            labels: self.labels.clone(),
        })
    }

    /// First differences `X_{t+1} - X_t`; length shrinks by one.
    pub fn differenced(&self) -> Result<Self> {
        if self.len() < 2 {
            return Err(Error::InsufficientData(
                "differencing needs at least two time steps".into(),
            ));
        }
        let t = self.len();
        let data = self.data.columns(1, t - 1) - self.data.columns(0, t - 1);
        Ok(Self {
            data,
            labels: self.labels.clone(),
        })
    }
}

/// Landmark points as the columns of a D x K matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkSet {
    sigma: DMatrix<f64>,
}

impl LandmarkSet {
    pub fn new(sigma: DMatrix<f64>) -> Result<Self> {
        if sigma.nrows() == 0 || sigma.ncols() == 0 {
            return Err(Error::InvalidInput("landmark set must be non-empty".into()));
        }
        check_finite(&sigma, "landmark set")?;
        let k = sigma.ncols();
        for i in 0..k {
            for j in (i + 1)..k {
                let d = (sigma.column(i) - sigma.column(j)).norm();
                if d <= DUPLICATE_LANDMARK_TOL {
                    return Err(Error::InvalidInput(format!(
                        "landmarks {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(Self { sigma })
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let ts = TimeSeriesMatrix::from_columns(columns)?;
        Self::new(ts.into_inner())
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn k(&self) -> usize {
        self.sigma.ncols()
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }
}

/// Clips numerically-negative entries and renormalises one column in place.
/// Returns the pre-repair column sum when it is out of tolerance.
fn repair_column(col: &mut [f64], upper_clip: bool) -> std::result::Result<(), (f64, bool)> {
    for x in col.iter_mut() {
        if *x < -NONNEG_TOL || (upper_clip && *x > 1.0 + NONNEG_TOL) {
            return Err((*x, false));
        }
        if *x < 0.0 {
            *x = 0.0;
        }
        if upper_clip && *x > 1.0 {
            *x = 1.0;
        }
    }
    let sum: f64 = col.iter().sum();
    if (sum - 1.0).abs() > COLUMN_SUM_TOL {
        return Err((sum, true));
    }
    if sum != 1.0 {
        for x in col.iter_mut() {
            *x /= sum;
        }
    }
    Ok(())
}

/// K x T matrix whose columns are barycentric coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffiliationSeries {
    gamma: DMatrix<f64>,
}

impl AffiliationSeries {
    pub fn new(mut gamma: DMatrix<f64>) -> Result<Self> {
        if gamma.nrows() == 0 || gamma.ncols() == 0 {
            return Err(Error::InvalidInput("affiliation series must be non-empty".into()));
        }
        check_finite(&gamma, "affiliation series")?;
        let k = gamma.nrows();
        for (c, col) in gamma.as_mut_slice().chunks_mut(k).enumerate() {
            match repair_column(col, false) {
                Ok(()) => {}
                Err((sum, true)) => return Err(Error::NotColumnStochastic { column: c, sum }),
                Err((value, false)) => {
                    return Err(Error::InvalidInput(format!(
                        "affiliation column {c} has negative entry {value}"
                    )))
                }
            }
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn k(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn len(&self) -> usize {
        self.gamma.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.ncols() == 0
    }

    pub fn column(&self, t: usize) -> DVector<f64> {
        self.gamma.column(t).into_owned()
    }

    /// Columns `start..end` as a new series.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.len() {
            return Err(Error::DimensionMismatch(format!(
                "column range {start}..{end} out of 0..{}",
                self.len()
            )));
        }
        Ok(Self {
            gamma: self.gamma.columns(start, end - start).into_owned(),
        })
    }
}

/// A K_Y x K_X column-stochastic matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticMatrix {
    lambda: DMatrix<f64>,
}

impl StochasticMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.lambda
    }

    pub fn rows(&self) -> usize {
        self.lambda.nrows()
    }

    pub fn cols(&self) -> usize {
        self.lambda.ncols()
    }

    /// Uniform matrix with every entry `1 / rows`.
    pub fn uniform(rows: usize, cols: usize) -> Self {
        Self {
            lambda: DMatrix::from_element(rows, cols, 1.0 / rows as f64),
        }
    }
}

/// Validates (and minimally repairs) a column-stochastic matrix.
pub fn validate_stochastic(m: &DMatrix<f64>) -> Result<StochasticMatrix> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::InvalidInput("stochastic matrix must be non-empty".into()));
    }
    check_finite(m, "stochastic matrix")?;
    let mut lambda = m.clone();
    let k = lambda.nrows();
    for (c, col) in lambda.as_mut_slice().chunks_mut(k).enumerate() {
        if let Err((value, is_sum)) = repair_column(col, true) {
            if is_sum {
                return Err(Error::NotColumnStochastic { column: c, sum: value });
            }
            return Err(Error::NotColumnStochastic {
                column: c,
                sum: m.column(c).sum(),
            });
        }
    }
    Ok(StochasticMatrix { lambda })
}

/// Paired affiliation series split into independent segments (e.g. events
/// between stoppages) together with the time shift used to pair them.
#[derive(Debug, Clone)]
pub struct SegmentedAffiliationPair {
    segments: Vec<(AffiliationSeries, AffiliationSeries)>,
    tau: usize,
}

impl SegmentedAffiliationPair {
    /// Segments with `T_k <= tau` cannot supply a single lagged pair and are
    /// dropped. Fails if nothing is left.
    pub fn new(segments: Vec<(AffiliationSeries, AffiliationSeries)>, tau: usize) -> Result<Self> {
        let mut kept = Vec::with_capacity(segments.len());
        let mut shape: Option<(usize, usize)> = None;
        for (i, (x, y)) in segments.into_iter().enumerate() {
            if x.len() != y.len() {
                return Err(Error::DimensionMismatch(format!(
                    "segment {i}: source length {} != target length {}",
                    x.len(),
                    y.len()
                )));
            }
            match shape {
                None => shape = Some((x.k(), y.k())),
                Some(s) if s != (x.k(), y.k()) => {
                    return Err(Error::DimensionMismatch(format!(
                        "segment {i} has affiliation sizes ({}, {}), expected {:?}",
                        x.k(),
                        y.k(),
                        s
                    )))
                }
                _ => {}
            }
            if x.len() > tau {
                kept.push((x, y));
            }
        }
        if kept.is_empty() {
            return Err(Error::InsufficientData(format!(
                "no segment longer than tau = {tau}"
            )));
        }
        Ok(Self { segments: kept, tau })
    }

    pub fn segments(&self) -> &[(AffiliationSeries, AffiliationSeries)] {
        &self.segments
    }

    pub fn tau(&self) -> usize {
        self.tau
    }
}
