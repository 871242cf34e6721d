//! Accelerated projected gradient for small simplex-constrained quadratics
//! `min_g 0.5 g'Qg - b'g  s.t. g in simplex`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::simplex::project_in_place;

pub(crate) const GAMMA_STEP_TOL: f64 = 1e-10;
pub(crate) const GAMMA_MAX_ITERS: usize = 10_000;

/// Largest eigenvalue of a symmetric positive semi-definite matrix.
pub(crate) fn largest_eigenvalue(q: &DMatrix<f64>) -> f64 {
    if q.nrows() == 1 {
        return q[(0, 0)];
    }
    SymmetricEigen::new(q.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Hessian storage. `Factored` holds `Q = S'S + ridge I` through the
/// row-major `D x K` factor `S`, cheaper when `2D < K`.
enum Hessian {
    Dense(Vec<f64>),
    Factored { d: usize, s: Vec<f64>, ridge: f64 },
}

/// Quadratic over the simplex with a fixed Hessian; `b` varies per solve.
pub(crate) struct SimplexQp {
    k: usize,
    hessian: Hessian,
    inv_l: f64,
}

impl SimplexQp {
    pub(crate) fn new(q: &DMatrix<f64>) -> Self {
        let k = q.nrows();
        let mut rows = Vec::with_capacity(k * k);
        for r in 0..k {
            for c in 0..k {
                rows.push(q[(r, c)]);
            }
        }
        Self::with_hessian(k, largest_eigenvalue(q), Hessian::Dense(rows))
    }

    /// The quadratic with `Q = S'S + ridge I`.
    pub(crate) fn from_factor(s: &DMatrix<f64>, ridge: f64) -> Self {
        let (d, k) = s.shape();
        let mut q = s.transpose() * s;
        for i in 0..k {
            q[(i, i)] += ridge;
        }
        if 2 * d >= k {
            return Self::new(&q);
        }
        let mut rows = Vec::with_capacity(d * k);
        for r in 0..d {
            for c in 0..k {
                rows.push(s[(r, c)]);
            }
        }
        Self::with_hessian(k, largest_eigenvalue(&q), Hessian::Factored { d, s: rows, ridge })
    }

    fn with_hessian(k: usize, l: f64, hessian: Hessian) -> Self {
        // a zero Hessian makes every feasible point optimal; any step works
        let inv_l = if l > f64::MIN_POSITIVE { 1.0 / l } else { 1.0 };
        Self { k, hessian, inv_l }
    }

    /// Writes `Qy` into `out`; `tmp` holds `d` scratch entries.
    fn apply(&self, y: &[f64], out: &mut [f64], tmp: &mut [f64]) {
        let k = self.k;
        match &self.hessian {
            Hessian::Dense(q) => {
                for i in 0..k {
                    out[i] = q[i * k..(i + 1) * k].iter().zip(y).map(|(a, b)| a * b).sum();
                }
            }
            Hessian::Factored { d, s, ridge } => {
                for r in 0..*d {
                    tmp[r] = s[r * k..(r + 1) * k].iter().zip(y).map(|(a, b)| a * b).sum();
                }
                for i in 0..k {
                    out[i] = ridge * y[i];
                }
                for r in 0..*d {
                    for (o, a) in out.iter_mut().zip(&s[r * k..(r + 1) * k]) {
                        *o += a * tmp[r];
                    }
                }
            }
        }
    }

    /// FISTA with gradient-based restart, started from `init` (projected first).
    /// Stops when the max-norm iterate change drops below `GAMMA_STEP_TOL`.
    pub(crate) fn solve(&self, b: &[f64], init: &[f64]) -> Vec<f64> {
        let k = self.k;
        let mut x = init.to_vec();
        project_in_place(&mut x);
        if k == 1 {
            return x;
        }
        let mut y = x.clone();
        let mut x_new = vec![0.0; k];
        let mut qy = vec![0.0; k];
        let mut tmp = vec![0.0; k];
        let mut t = 1.0_f64;
        for _ in 0..GAMMA_MAX_ITERS {
            self.apply(&y, &mut qy, &mut tmp);
            for i in 0..k {
                x_new[i] = y[i] - self.inv_l * (qy[i] - b[i]);
            }
            project_in_place(&mut x_new);

            let mut change = 0.0_f64;
            let mut restart_dot = 0.0;
            for i in 0..k {
                let step = x_new[i] - x[i];
                change = change.max(step.abs());
                restart_dot += (y[i] - x_new[i]) * step;
            }
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            if restart_dot > 0.0 {
                t = 1.0;
                y.copy_from_slice(&x_new);
            } else {
                let beta = (t - 1.0) / t_next;
                for i in 0..k {
                    y[i] = x_new[i] + beta * (x_new[i] - x[i]);
                }
                t = t_next;
            }
            std::mem::swap(&mut x, &mut x_new);
            if change < GAMMA_STEP_TOL {
                break;
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_minimizer_found() {
        // min 0.5|g - c|^2 with c inside the simplex
        let q = DMatrix::identity(3, 3);
        let qp = SimplexQp::new(&q);
        let g = qp.solve(&[0.2, 0.3, 0.5], &[1.0, 0.0, 0.0]);
        for (a, b) in g.iter().zip([0.2, 0.3, 0.5]) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_hessian_keeps_feasible_start() {
        let qp = SimplexQp::new(&DMatrix::zeros(2, 2));
        let g = qp.solve(&[0.0, 0.0], &[0.25, 0.75]);
        assert_eq!(g, vec![0.25, 0.75]);
    }

    #[test]
    fn factored_and_dense_hessians_agree() {
        let s = DMatrix::from_row_slice(1, 4, &[0.0, 1.0, 2.5, 4.0]);
        let factored = SimplexQp::from_factor(&s, 1e-3);
        let mut q = s.transpose() * &s;
        q += DMatrix::identity(4, 4) * 1e-3;
        let dense = SimplexQp::new(&q);
        assert!(matches!(factored.hessian, Hessian::Factored { .. }));
        let b = [0.3, 1.9, 4.2, 7.5];
        let (gf, gd) = (factored.solve(&b, &[0.25; 4]), dense.solve(&b, &[0.25; 4]));
        for (a, c) in gf.iter().zip(&gd) {
            assert!((a - c).abs() < 1e-9, "{gf:?} vs {gd:?}");
        }
    }
}
