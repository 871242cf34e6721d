//! One realisation: landmarks per variable, sequential reference-anchored
//! affiliations, then mappings and measures for every ordered pair.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mapping::{fit_lambda, LambdaFit};
use crate::measures::{build_report, DependencyReport};
use crate::rng::child_seed;
use crate::spa::{fit_spa1, rho_series, Spa1Config, Spa1Solution};
use crate::types::{AffiliationSeries, LandmarkSet, TimeSeriesMatrix};

/// How each variable is represented before fitting mappings.
#[derive(Debug, Clone)]
pub enum Representation {
    /// Fit K landmarks per variable with the given number of restarts.
    Fitted { k: usize, restarts: usize },
    /// Use the same fixed landmark set for every variable.
    Fixed(LandmarkSet),
}

/// Per-variable landmarks, affiliations and landmark-fit residuals.
#[derive(Debug, Clone)]
pub struct Represented {
    pub landmarks: Vec<LandmarkSet>,
    pub affiliations: Vec<AffiliationSeries>,
    pub objectives: Vec<f64>,
}

/// Affiliations follow the state sequentially: each one is the representation
/// of the current point closest to the previous affiliation.
pub fn represent(variables: &[TimeSeriesMatrix], repr: &Representation, seed: u64) -> Result<Represented> {
    let sols: Vec<(Spa1Solution, AffiliationSeries)> = variables
        .par_iter()
        .enumerate()
        .map(|(v, data)| {
            let cfg = match repr {
                Representation::Fitted { k, restarts } => Spa1Config {
                    restarts: *restarts,
                    ..Spa1Config::new(*k, child_seed(seed, v as u64))
                },
                Representation::Fixed(l) => Spa1Config::with_fixed_landmarks(l.clone()),
            };
            let sol = fit_spa1(data, &cfg)?;
            let gamma = rho_series(data, &sol.landmarks)?;
            Ok((sol, gamma))
        })
        .collect::<Result<_>>()?;
    let objectives = sols.iter().map(|(s, _)| s.objective).collect();
    let (landmarks, affiliations) = sols.into_iter().map(|(s, g)| (s.landmarks, g)).unzip();
    Ok(Represented { landmarks, affiliations, objectives })
}

/// All ordered-pair fits (diagonal included) at one time shift.
pub fn fit_all_pairs(affiliations: &[AffiliationSeries], tau: usize) -> Result<Vec<Vec<Option<LambdaFit>>>> {
    let n = affiliations.len();
    let flat: Vec<LambdaFit> = (0..n * n)
        .into_par_iter()
        .map(|idx| fit_lambda(&affiliations[idx / n], &affiliations[idx % n], tau))
        .collect::<Result<_>>()?;
    let mut it = flat.into_iter();
    Ok((0..n).map(|_| (0..n).map(|_| it.next()).collect()).collect())
}

/// Reports for every requested shift.
pub fn reports_for(affiliations: &[AffiliationSeries], names: &[String], taus: &[usize]) -> Result<Vec<DependencyReport>> {
    if affiliations.len() != names.len() {
        return Err(Error::DimensionMismatch("one name per variable required".into()));
    }
    taus.iter()
        .map(|&tau| build_report(&fit_all_pairs(affiliations, tau)?, names))
        .collect()
}
