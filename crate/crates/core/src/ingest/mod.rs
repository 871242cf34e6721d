//! External data: tracking CSV loading and preprocessing, plus the lagged
//! correlation baseline.

mod correlation;
mod tracking;

pub use correlation::pearson_lagged;
pub use tracking::{
    basketball_landmarks, classify_phase, classify_all, load_csv, reflect_half_court, segment_by, CsvSchema, Matchup,
    PhaseLabel, Segment, TrackingFrame, BENCH_SENTINEL,
};
