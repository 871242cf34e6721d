use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{CsvSchema, Matchup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Logistic,
    Sde,
    Ar,
    Csv,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "logistic" => Ok(Mode::Logistic),
            "sde" => Ok(Mode::Sde),
            "ar" => Ok(Mode::Ar),
            "csv" => Ok(Mode::Csv),
            other => Err(Error::Config(format!("unknown mode '{other}'"))),
        }
    }
}

/// Tracking-data settings read from the schema JSON in csv mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingConfig {
    #[serde(flatten)]
    pub columns: CsvSchema,
    #[serde(flatten)]
    pub matchup: Matchup,
    /// Seconds between resampled frames; the time shift is counted in these steps.
    #[serde(default = "default_resample_dt")]
    pub resample_dt: f64,
    /// Players to analyse; defaults to everyone listed in the matchup.
    #[serde(default)]
    pub entities: Option<Vec<String>>,
}

fn default_resample_dt() -> f64 {
    1.0
}

impl TrackingConfig {
    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read schema {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::SchemaError(format!("{}: {e}", path.display())))
    }

    pub fn entity_list(&self) -> Vec<String> {
        self.entities
            .clone()
            .unwrap_or_else(|| self.matchup.team_a.iter().chain(&self.matchup.team_b).cloned().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    /// Landmarks per variable; `None` picks the mode default.
    pub k: Option<usize>,
    pub taus: Vec<usize>,
    /// First-difference every series before analysis; `None` picks the mode default.
    pub difference_series: Option<bool>,
    pub realisations: usize,
    pub seed: u64,
    /// Series length (steps in sde mode); `None` picks the mode default.
    pub t: Option<usize>,
    pub prefix_lengths: Option<Vec<usize>>,
    pub output_dir: Option<PathBuf>,
    pub csv_path: Option<PathBuf>,
    pub tracking: Option<TrackingConfig>,
    /// Noise level of A and B in sde mode.
    pub sigma_ab: f64,
    pub restarts: usize,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            k: None,
            taus: vec![1],
            difference_series: None,
            realisations: 1,
            seed: 0,
            t: None,
            prefix_lengths: None,
            output_dir: None,
            csv_path: None,
            tracking: None,
            sigma_ab: 0.2,
            restarts: 5,
            jobs: None,
        }
    }

    pub fn k_or_default(&self) -> usize {
        self.k.unwrap_or(match self.mode {
            Mode::Csv => 7,
            _ => 10,
        })
    }

    pub fn difference_or_default(&self) -> bool {
        self.difference_series.unwrap_or(self.mode == Mode::Sde)
    }

    pub fn t_or_default(&self) -> usize {
        self.t.unwrap_or(match self.mode {
            Mode::Logistic => 1800,
            _ => 1000,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_or_default() < 2 {
            return Err(Error::Config("K must be at least 2".into()));
        }
        if self.taus.is_empty() {
            return Err(Error::Config("at least one time shift is required".into()));
        }
        if self.realisations == 0 {
            return Err(Error::Config("realisations must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        if !(self.sigma_ab >= 0.0) {
            return Err(Error::Config("noise level must be non-negative".into()));
        }
        if let Some(prefixes) = &self.prefix_lengths {
            if prefixes.is_empty() || prefixes.iter().any(|&l| l == 0) {
                return Err(Error::Config("prefix lengths must be positive".into()));
            }
        }
        match self.mode {
            Mode::Csv => {
                if self.csv_path.is_none() || self.tracking.is_none() {
                    return Err(Error::Config("csv mode needs --csv and --schema".into()));
                }
                if self.prefix_lengths.is_some() {
                    return Err(Error::Config("prefix sweep is not available in csv mode".into()));
                }
                let tracking = self.tracking.as_ref().expect("checked above");
                if !(tracking.resample_dt > 0.0) {
                    return Err(Error::SchemaError("resample_dt must be positive".into()));
                }
                if tracking.entity_list().len() < 2 {
                    return Err(Error::SchemaError("at least two entities are needed".into()));
                }
            }
            _ => {
                if self.t_or_default() < 3 {
                    return Err(Error::Config("series length must be at least 3".into()));
                }
            }
        }
        Ok(())
    }
}
