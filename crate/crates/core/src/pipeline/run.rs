//! Experiment orchestration: data generation or loading, analysis of every
//! realisation, and aggregation into a summary.

use std::time::{Duration, Instant};

use log::{info, warn};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::analysis::{fit_all_pairs, represent, Representation};
use super::config::{Mode, RunConfig};
use crate::error::{Error, Result};
use crate::generators::{gen_ar, gen_logistic, gen_sde, ArConfig, LogisticConfig, SdeConfig};
use crate::ingest::{
    basketball_landmarks, classify_all, load_csv, reflect_half_court, segment_by, PhaseLabel, Segment,
};
use crate::mapping::{fit_lambda_segmented, LambdaFit};
use crate::measures::{build_report, DependencyReport};
use crate::rng::child_seed;
use crate::spa::rho_series;
use crate::types::{AffiliationSeries, SegmentedAffiliationPair, TimeSeriesMatrix};

pub const SCHEMA_VERSION: u32 = 1;
/// Attempts with fresh coefficient draws when an AR realisation diverges.
pub const AR_MAX_ATTEMPTS: u64 = 10;

/// Dependency results for one (time shift, data selection) combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub tau: usize,
    /// "full", "prefix=<L>", or an attacking phase in csv mode.
    pub label: String,
}

/// Statistics for the unordered pair `(from, to)`; deltas are `delta[from][to]`,
/// positive when `from` is the stronger influence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairStats {
    pub from: String,
    pub to: String,
    pub mean_delta_schatten: f64,
    pub mean_delta_rowvar: f64,
    pub delta_schatten: Vec<f64>,
    pub delta_rowvar: Vec<f64>,
    /// Realisations whose sign contradicts the known coupling, when there is one.
    pub incorrect_schatten: Option<usize>,
    pub incorrect_rowvar: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario: Scenario,
    /// Measures and deltas averaged over successful realisations.
    pub mean_report: DependencyReport,
    /// Mean mapping residual for every ordered pair.
    pub mean_residual: DMatrix<f64>,
    pub pairs: Vec<PairStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub crate_version: String,
    pub config: RunConfig,
    pub variable_names: Vec<String>,
    pub realisations_succeeded: usize,
    pub failures: usize,
    /// Landmark-fit residual per realisation and variable.
    pub landmark_residuals: Vec<Vec<f64>>,
    pub scenarios: Vec<ScenarioSummary>,
    #[serde(skip)]
    pub wall_clock: Duration,
}

/// Output of one realisation.
struct Realisation {
    landmark_residuals: Vec<f64>,
    /// One report and residual table per scenario, in scenario order.
    reports: Vec<(DependencyReport, DMatrix<f64>)>,
}

pub fn variable_names(cfg: &RunConfig) -> Vec<String> {
    let names: &[&str] = match cfg.mode {
        Mode::Logistic => &["X", "Y"],
        Mode::Sde => &["A", "B", "C"],
        Mode::Ar => &["X", "Y"],
        Mode::Csv => {
            return cfg.tracking.as_ref().map(|t| t.entity_list()).unwrap_or_default();
        }
    };
    names.iter().map(|s| s.to_string()).collect()
}

/// Expected sign of `delta[i][j]` (i < j) from the known coupling, if any.
fn expected_sign(mode: Mode, tau: usize, i: usize, j: usize) -> Option<f64> {
    match (mode, i, j) {
        // X drives Y more strongly than the reverse
        (Mode::Logistic, 0, 1) => Some(1.0),
        // C drives B and A, B drives A
        (Mode::Sde, _, _) => Some(-1.0),
        // Y drives X, with direct influence up to the AR order
        (Mode::Ar, 0, 1) if (1..=ArConfig::default().p).contains(&tau) => Some(-1.0),
        _ => None,
    }
}

fn scenarios(cfg: &RunConfig) -> Vec<Scenario> {
    let mut out = Vec::new();
    for &tau in &cfg.taus {
        out.push(Scenario { tau, label: "full".into() });
        for &len in cfg.prefix_lengths.iter().flatten() {
            out.push(Scenario { tau, label: format!("prefix={len}") });
        }
    }
    out
}

/// Generated variables of one synthetic realisation.
fn synthetic_variables(cfg: &RunConfig, data_seed: u64) -> Result<Vec<TimeSeriesMatrix>> {
    let t = cfg.t_or_default();
    let vars = match cfg.mode {
        Mode::Logistic => {
            let d = gen_logistic(&LogisticConfig { t, ..Default::default() })?;
            vec![d.rows(0, 1)?, d.rows(1, 2)?]
        }
        Mode::Sde => {
            let s = gen_sde(&SdeConfig { steps: t, seed: data_seed, sigma_ab: cfg.sigma_ab, ..Default::default() })?;
            vec![s.a, s.b, s.c]
        }
        Mode::Ar => {
            let base = ArConfig { t, ..Default::default() };
            let mut attempt = 0;
            let d = loop {
                let seed = if attempt == 0 { data_seed } else { child_seed(data_seed, attempt) };
                match gen_ar(&ArConfig { seed, ..base.clone() }) {
                    Ok(d) => break d,
                    Err(Error::DivergenceDetected(msg)) if attempt + 1 < AR_MAX_ATTEMPTS => {
                        warn!("AR draw {attempt} diverged ({msg}); redrawing");
                        attempt += 1;
                    }
                    Err(e) => return Err(e),
                }
            };
            // the zero start-up columns carry no dynamics
            let d = d.columns(base.p, d.len())?;
            vec![d.rows(0, base.block_dim)?, d.rows(base.block_dim, 2 * base.block_dim)?]
        }
        Mode::Csv => unreachable!("csv data is not generated"),
    };
    if cfg.difference_or_default() {
        vars.iter().map(TimeSeriesMatrix::differenced).collect()
    } else {
        Ok(vars)
    }
}

fn residual_table(fits: &[Vec<Option<LambdaFit>>]) -> DMatrix<f64> {
    let n = fits.len();
    DMatrix::from_fn(n, n, |i, j| fits[i][j].as_ref().map_or(0.0, |f| f.residual))
}

/// The analysed (possibly differenced) variables of synthetic realisation `index`.
pub fn realisation_variables(cfg: &RunConfig, index: u64) -> Result<Vec<TimeSeriesMatrix>> {
    if cfg.mode == Mode::Csv {
        return Err(Error::Config("csv mode has no generated realisations".into()));
    }
    synthetic_variables(cfg, child_seed(cfg.seed, 2 * index))
}

fn analyse_synthetic(cfg: &RunConfig, names: &[String], index: u64) -> Result<Realisation> {
    let spa_seed = child_seed(cfg.seed, 2 * index + 1);
    let vars = realisation_variables(cfg, index)?;
    let repr = Representation::Fitted { k: cfg.k_or_default(), restarts: cfg.restarts };
    let rep = represent(&vars, &repr, spa_seed)?;

    let mut reports = Vec::new();
    for sc in scenarios(cfg) {
        let affs: Vec<AffiliationSeries> = match sc.label.strip_prefix("prefix=") {
            None => rep.affiliations.clone(),
            Some(len) => {
                let len: usize = len.parse().expect("label built from an integer");
                rep.affiliations
                    .iter()
                    .map(|a| a.slice(0, len.min(a.len())))
                    .collect::<Result<_>>()?
            }
        };
        let fits = fit_all_pairs(&affs, sc.tau)?;
        reports.push((build_report(&fits, names)?, residual_table(&fits)));
    }
    Ok(Realisation { landmark_residuals: rep.objectives, reports })
}

fn phase_name(phase: PhaseLabel) -> &'static str {
    match phase {
        PhaseLabel::TeamAAttacking => "team_a_attacking",
        PhaseLabel::TeamBAttacking => "team_b_attacking",
        PhaseLabel::Transition => "transition",
    }
}

/// Mapping fits between all ordered entity pairs over the given segments.
fn tracking_fits(segments: &[Segment], ids: &[String], tau: usize) -> Result<Vec<Vec<Option<LambdaFit>>>> {
    let landmarks = basketball_landmarks();
    let n = ids.len();
    let flat: Vec<Result<LambdaFit>> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (a, b) = (ids[idx / n].as_str(), ids[idx % n].as_str());
            let mut pairs = Vec::new();
            for seg in segments {
                for run in seg.aligned_runs(&[a, b]) {
                    let ga = rho_series(&run[0], &landmarks)?;
                    let gb = rho_series(&run[1], &landmarks)?;
                    pairs.push((ga, gb));
                }
            }
            fit_lambda_segmented(&SegmentedAffiliationPair::new(pairs, tau)?)
        })
        .collect();
    let mut it = flat.into_iter();
    (0..n)
        .map(|_| (0..n).map(|_| it.next().expect("n*n results").map(Some)).collect())
        .collect()
}

fn analyse_tracking(cfg: &RunConfig, names: &[String]) -> Result<(Vec<Scenario>, Realisation)> {
    let tracking = cfg.tracking.as_ref().expect("validated");
    let path = cfg.csv_path.as_ref().expect("validated");
    let frames = load_csv(path, &tracking.columns)?;
    if frames.is_empty() {
        return Err(Error::EmptySelection("tracking file has no rows".into()));
    }
    // phases are judged on signed coordinates, the analysis uses reflected ones
    let labels = classify_all(&frames, &tracking.matchup);
    let reflected = reflect_half_court(&frames);

    let mut scs = Vec::new();
    let mut reports = Vec::new();
    for phase in [PhaseLabel::TeamAAttacking, PhaseLabel::TeamBAttacking] {
        let segments = match segment_by(&reflected, &labels, phase, tracking.resample_dt) {
            Ok(s) => s,
            Err(Error::EmptySelection(msg)) => {
                warn!("{msg}; skipping");
                continue;
            }
            Err(e) => return Err(e),
        };
        for &tau in &cfg.taus {
            let fits = match tracking_fits(&segments, names, tau) {
                Ok(f) => f,
                Err(Error::InsufficientData(msg)) => {
                    warn!("{} at tau = {tau}: {msg}; skipping", phase_name(phase));
                    continue;
                }
                Err(e) => return Err(e),
            };
            scs.push(Scenario { tau, label: phase_name(phase).into() });
            reports.push((build_report(&fits, names)?, residual_table(&fits)));
        }
    }
    if reports.is_empty() {
        return Err(Error::EmptySelection("no attacking phase long enough for the requested shifts".into()));
    }
    Ok((scs, Realisation { landmark_residuals: Vec::new(), reports }))
}

fn mean_matrix<'a>(ms: impl Iterator<Item = &'a DMatrix<f64>>, n: usize) -> DMatrix<f64> {
    let mut sum = DMatrix::zeros(n, n);
    let mut count = 0;
    for m in ms {
        sum += m;
        count += 1;
    }
    sum / count.max(1) as f64
}

fn aggregate(cfg: &RunConfig, names: &[String], scs: &[Scenario], runs: &[Realisation]) -> Result<Vec<ScenarioSummary>> {
    let n = names.len();
    let mut out = Vec::new();
    for (s, sc) in scs.iter().enumerate() {
        let reports: Vec<&DependencyReport> = runs.iter().map(|r| &r.reports[s].0).collect();
        let m_schatten = mean_matrix(reports.iter().map(|r| &r.m_schatten), n);
        let m_rowvar = mean_matrix(reports.iter().map(|r| &r.m_rowvar), n);
        let mut mean_report = DependencyReport::from_measures(names.to_vec(), m_schatten, m_rowvar, sc.tau)?;
        // averaged deltas, not deltas of averaged measures
        mean_report.delta_schatten = mean_matrix(reports.iter().map(|r| &r.delta_schatten), n);
        mean_report.delta_rowvar = mean_matrix(reports.iter().map(|r| &r.delta_rowvar), n);
        let mean_residual = mean_matrix(runs.iter().map(|r| &r.reports[s].1), n);

        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let ds: Vec<f64> = reports.iter().map(|r| r.delta_schatten[(i, j)]).collect();
                let dn: Vec<f64> = reports.iter().map(|r| r.delta_rowvar[(i, j)]).collect();
                let expected = if cfg.mode == Mode::Csv { None } else { expected_sign(cfg.mode, sc.tau, i, j) };
                let wrong = |v: &[f64]| expected.map(|e| v.iter().filter(|&&d| d * e <= 0.0).count());
                pairs.push(PairStats {
                    from: names[i].clone(),
                    to: names[j].clone(),
                    mean_delta_schatten: mean_report.delta_schatten[(i, j)],
                    mean_delta_rowvar: mean_report.delta_rowvar[(i, j)],
                    incorrect_schatten: wrong(&ds),
                    incorrect_rowvar: wrong(&dn),
                    delta_schatten: ds,
                    delta_rowvar: dn,
                });
            }
        }
        out.push(ScenarioSummary { scenario: sc.clone(), mean_report, mean_residual, pairs });
    }
    Ok(out)
}

/// Runs the configured experiment. Realisations that fail are logged,
/// counted and skipped; the run fails only if none succeeds.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let start = Instant::now();
    let names = variable_names(cfg);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;

    let (scs, results): (Vec<Scenario>, Vec<Result<Realisation>>) = if cfg.mode == Mode::Csv {
        let (scs, r) = pool.install(|| analyse_tracking(cfg, &names))?;
        (scs, vec![Ok(r)])
    } else {
        let results = pool.install(|| {
            (0..cfg.realisations as u64)
                .into_par_iter()
                .map(|r| analyse_synthetic(cfg, &names, r))
                .collect()
        });
        (scenarios(cfg), results)
    };

    let mut runs = Vec::new();
    let mut failures = 0;
    let mut first_err = None;
    for (idx, r) in results.into_iter().enumerate() {
        match r {
            Ok(run) => runs.push(run),
            Err(e) => {
                warn!("realisation {idx} failed: {e}");
                failures += 1;
                first_err.get_or_insert(e);
            }
        }
    }
    if runs.is_empty() {
        return Err(first_err.expect("at least one realisation ran"));
    }
    let scenarios = aggregate(cfg, &names, &scs, &runs)?;
    let wall_clock = start.elapsed();
    info!("{} realisations in {:.1?}", runs.len(), wall_clock);

    Ok(RunSummary {
        schema_version: SCHEMA_VERSION,
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        variable_names: names,
        realisations_succeeded: runs.len(),
        failures,
        landmark_residuals: runs.iter().map(|r| r.landmark_residuals.clone()).collect(),
        scenarios,
        wall_clock,
    })
}
