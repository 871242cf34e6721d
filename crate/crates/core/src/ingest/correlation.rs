use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::types::TimeSeriesMatrix;

/// Pearson correlation between every component of `x_{t-tau}` and every
/// component of `y_t`. Entry `(i, j)` pairs row i of x with row j of y.
pub fn pearson_lagged(x: &TimeSeriesMatrix, y: &TimeSeriesMatrix, tau: usize) -> Result<DMatrix<f64>> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < tau + 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 lagged pairs, have {}",
            x.len().saturating_sub(tau)
        )));
    }
    let n = x.len() - tau;
    let a = x.data().columns(0, n);
    let b = y.data().columns(tau, n);
    let centred = |m: nalgebra::DMatrixView<'_, f64>, what: &str| -> Result<DMatrix<f64>> {
        let mut out = m.into_owned();
        for (r, mut row) in out.row_iter_mut().enumerate() {
            let mean = row.mean();
            row.add_scalar_mut(-mean);
            let sd = (row.norm_squared() / (n - 1) as f64).sqrt();
            if !(sd > 0.0) {
                return Err(Error::DegenerateInput(format!("{what} row {r} has zero variance")));
            }
            row /= sd;
        }
        Ok(out)
    };
    let za = centred(a, "source")?;
    let zb = centred(b, "target")?;
    let mut c = za * zb.transpose() / (n - 1) as f64;
    c.apply(|v| *v = v.clamp(-1.0, 1.0));
    Ok(c)
}
