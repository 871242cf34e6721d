//! Euclidean projection onto the probability simplex.

use crate::error::{Error, Result};

/// Slack, in units of machine epsilon per entry, under which a non-negative
/// vector is treated as already summing to one. Makes the projection
/// bitwise idempotent.
const SUM_ULPS_PER_ENTRY: f64 = 8.0;

/// Projects `v` onto `{u : u >= 0, sum(u) = 1}`.
///
pub fn project_to_simplex(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::InvalidInput("cannot project an empty vector".into()));
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite entry at index {i}")));
    }
    let mut out = v.to_vec();
    project_in_place(&mut out);
    Ok(out)
}

/// In-place variant for finite, non-empty input. Used on solver hot paths.
pub(crate) fn project_in_place(v: &mut [f64]) {
    let k = v.len();
    if is_on_simplex(v) {
        return;
    }
    if k == 1 {
        v[0] = 1.0;
        return;
    }
    // Michelot's active-set iteration: drop entries at or below the current
    // threshold until the active set is stable. At most K passes, usually 2-3.
    let mut active_sum: f64 = v.iter().sum();
    let mut active = k;
    let mut theta = (active_sum - 1.0) / active as f64;
    let mut dropped = [false; 64];
    let mut dropped_heap = Vec::new();
    let dropped: &mut [bool] = if k <= dropped.len() {
        &mut dropped[..k]
    } else {
        dropped_heap.resize(k, false);
        &mut dropped_heap
    };
    loop {
        let mut changed = false;
        for (i, &x) in v.iter().enumerate() {
            if !dropped[i] && x <= theta {
                dropped[i] = true;
                active_sum -= x;
                active -= 1;
                changed = true;
            }
        }
        if !changed || active == 0 {
            break;
        }
        theta = (active_sum - 1.0) / active as f64;
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

fn is_on_simplex(v: &[f64]) -> bool {
    if v.iter().any(|&x| x < 0.0) {
        return false;
    }
    let sum: f64 = v.iter().sum();
    (sum - 1.0).abs() <= SUM_ULPS_PER_ENTRY * v.len() as f64 * f64::EPSILON
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dist2(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    }

    #[test]
    fn point_already_inside_is_unchanged() {
        assert_eq!(project_to_simplex(&[0.2, 0.8]).unwrap(), vec![0.2, 0.8]);
    }

    #[test]
    fn symmetric_excess_splits_evenly() {
        let p = project_to_simplex(&[0.6, 0.6]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn vertex_outside_matches_grid_minimizer() {
        // grid oracle over the 2-simplex at spacing 1e-4
        let v = [2.0, 0.0];
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..=10_000 {
            let a = i as f64 * 1e-4;
            let d = dist2(&v, &[a, 1.0 - a]);
            if d < best.0 {
                best = (d, a);
            }
        }
        let p = project_to_simplex(&v).unwrap();
        assert!((p[0] - best.1).abs() < 1e-4);
        assert_eq!(p, vec![1.0, 0.0]);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(
            project_to_simplex(&[f64::NAN, 1.0]),
            Err(Error::InvalidInput(_))
        ));
        assert!(project_to_simplex(&[]).is_err());
    }

    #[test]
    fn single_entry_is_one() {
        assert_eq!(project_to_simplex(&[-3.0]).unwrap(), vec![1.0]);
    }

    proptest! {
        #[test]
        fn idempotent_bitwise(v in prop::collection::vec(-5.0f64..5.0, 1..12)) {
            let once = project_to_simplex(&v).unwrap();
            let twice = project_to_simplex(&once).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn output_is_stochastic(v in prop::collection::vec(-50.0f64..50.0, 1..20)) {
            let p = project_to_simplex(&v).unwrap();
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        }

        #[test]
        fn fixed_points_inside_simplex(raw in prop::collection::vec(0.0f64..1.0, 1..10)) {
            let s: f64 = raw.iter().sum();
            prop_assume!(s > 1e-3);
            let v: Vec<f64> = raw.iter().map(|x| x / s).collect();
            let p = project_to_simplex(&v).unwrap();
            for (a, b) in p.iter().zip(&v) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
