//! Player-tracking preprocessing: CSV loading, bench removal, half-court
//! reflection, attack-phase labelling and event segmentation.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{LandmarkSet, TimeSeriesMatrix};

/// Coordinate assigned to players sitting on the bench.
pub const BENCH_SENTINEL: (f64, f64) = (-48.5, -27.5);

/// Column names of a tracking CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub time_col: String,
    pub entity_col: String,
    pub x_col: String,
    pub y_col: String,
    #[serde(default)]
    pub event_col: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingFrame {
    /// Seconds.
    pub time: f64,
    /// Entity id to `(x, y)` in feet.
    pub entities: BTreeMap<String, (f64, f64)>,
    pub event_id: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseLabel {
    TeamAAttacking,
    TeamBAttacking,
    Transition,
}

/// The two teams on court. Team B defends the half `x > half_boundary`,
/// team A the other one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matchup {
    pub team_a: Vec<String>,
    pub team_b: Vec<String>,
    #[serde(default)]
    pub half_boundary: f64,
}

/// Fixed court landmarks (feet, origin at centre court) used for all players.
pub fn basketball_landmarks() -> LandmarkSet {
    LandmarkSet::new(DMatrix::from_row_slice(
        2,
        7,
        &[
            48.5, 48.5, 0.0, 0.0, 20.0, 20.0, 40.0, //
            -27.5, 27.5, -27.5, 27.5, 15.0, -15.0, 0.0,
        ],
    ))
    .expect("court landmarks are distinct")
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::SchemaError(format!("missing column '{name}'")))
}

fn parse_field<T: std::str::FromStr>(record: &csv::StringRecord, idx: usize, row: usize, what: &str) -> Result<T> {
    let raw = record.get(idx).unwrap_or("").trim();
    raw.parse().map_err(|_| Error::ParseError {
        row,
        message: format!("cannot parse {what} from '{raw}'"),
    })
}

/// Loads a tracking CSV; rows are grouped into frames by (event, time) and
/// returned in time order. Bench rows are dropped.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Vec<TrackingFrame>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path.as_ref()).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::ParseError { row: 0, message: format!("{other:?}") },
    })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::ParseError { row: 1, message: e.to_string() })?
        .clone();
    let time_i = column_index(&headers, &schema.time_col)?;
    let ent_i = column_index(&headers, &schema.entity_col)?;
    let x_i = column_index(&headers, &schema.x_col)?;
    let y_i = column_index(&headers, &schema.y_col)?;
    let ev_i = schema.event_col.as_deref().map(|c| column_index(&headers, c)).transpose()?;

    // keyed by (event, time bits); times are non-negative in practice but the
    // key only needs to be consistent, ordering is restored below
    let mut frames: BTreeMap<(u64, u64), TrackingFrame> = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        // line 1 is the header
        let row = i + 2;
        let record = record.map_err(|e| Error::ParseError { row, message: e.to_string() })?;
        let time: f64 = parse_field(&record, time_i, row, "time")?;
        let x: f64 = parse_field(&record, x_i, row, "x")?;
        let y: f64 = parse_field(&record, y_i, row, "y")?;
        let event: u64 = match ev_i {
            Some(idx) => parse_field(&record, idx, row, "event id")?,
            None => 0,
        };
        if !(time.is_finite() && x.is_finite() && y.is_finite()) {
            return Err(Error::ParseError { row, message: "non-finite value".into() });
        }
        let entity = record.get(ent_i).unwrap_or("").trim().to_string();
        if entity.is_empty() {
            return Err(Error::ParseError { row, message: "empty entity id".into() });
        }
        let frame = frames.entry((event, time.to_bits())).or_insert_with(|| TrackingFrame {
            time,
            entities: BTreeMap::new(),
            event_id: event,
        });
        if (x, y) != BENCH_SENTINEL {
            frame.entities.insert(entity, (x, y));
        }
    }
    let mut out: Vec<TrackingFrame> = frames.into_values().collect();
    out.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.event_id.cmp(&b.event_id)));
    Ok(out)
}

/// Replaces every x by |x|.
pub fn reflect_half_court(frames: &[TrackingFrame]) -> Vec<TrackingFrame> {
    frames
        .iter()
        .map(|f| TrackingFrame {
            entities: f.entities.iter().map(|(k, &(x, y))| (k.clone(), (x.abs(), y))).collect(),
            ..f.clone()
        })
        .collect()
}

/// Labels a frame (signed, unreflected coordinates). Frames without exactly
/// ten listed players on court are transitions.
pub fn classify_phase(frame: &TrackingFrame, matchup: &Matchup) -> PhaseLabel {
    let on_court: Vec<f64> = matchup
        .team_a
        .iter()
        .chain(&matchup.team_b)
        .filter_map(|id| frame.entities.get(id).map(|&(x, _)| x))
        .collect();
    if on_court.len() != 10 {
        return PhaseLabel::Transition;
    }
    let in_b_half = on_court.iter().filter(|&&x| x > matchup.half_boundary).count();
    let in_a_half = on_court.iter().filter(|&&x| x < matchup.half_boundary).count();
    if in_b_half >= 9 {
        PhaseLabel::TeamAAttacking
    } else if in_a_half >= 9 {
        PhaseLabel::TeamBAttacking
    } else {
        PhaseLabel::Transition
    }
}

pub fn classify_all(frames: &[TrackingFrame], matchup: &Matchup) -> Vec<PhaseLabel> {
    frames.iter().map(|f| classify_phase(f, matchup)).collect()
}

/// A maximal run of equally labelled frames within one event, resampled.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub event_id: u64,
    pub frames: Vec<TrackingFrame>,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn entity_ids(&self) -> BTreeSet<String> {
        self.frames.iter().flat_map(|f| f.entities.keys().cloned()).collect()
    }

    /// Maximal runs in which every listed entity is present; each run yields
    /// one 2 x T_k series per entity, in the order given.
    pub fn aligned_runs(&self, ids: &[&str]) -> Vec<Vec<TimeSeriesMatrix>> {
        let mut runs = Vec::new();
        let mut start = None;
        for i in 0..=self.frames.len() {
            let present = i < self.frames.len() && ids.iter().all(|id| self.frames[i].entities.contains_key(*id));
            match (present, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    runs.push(
                        ids.iter()
                            .map(|id| {
                                let cols: Vec<Vec<f64>> = self.frames[s..i]
                                    .iter()
                                    .map(|f| {
                                        let (x, y) = f.entities[*id];
                                        vec![x, y]
                                    })
                                    .collect();
                                TimeSeriesMatrix::from_columns(&cols).expect("finite coordinates")
                            })
                            .collect(),
                    );
                    start = None;
                }
                _ => {}
            }
        }
        runs
    }
}

/// Keeps maximal runs of consecutive frames labelled `phase` with a constant
/// event id, and resamples each run every `resample_dt` seconds by picking
/// the nearest frame.
pub fn segment_by(frames: &[TrackingFrame], labels: &[PhaseLabel], phase: PhaseLabel, resample_dt: f64) -> Result<Vec<Segment>> {
    if labels.len() != frames.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} frames",
            labels.len(),
            frames.len()
        )));
    }
    if !(resample_dt > 0.0) {
        return Err(Error::Config("resample interval must be positive".into()));
    }
    let mut segments = Vec::new();
    let mut i = 0;
    while i < frames.len() {
        if labels[i] != phase {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < frames.len() && labels[i + 1] == phase && frames[i + 1].event_id == frames[start].event_id {
            i += 1;
        }
        segments.push(Segment {
            event_id: frames[start].event_id,
            frames: resample(&frames[start..=i], resample_dt),
        });
        i += 1;
    }
    if segments.is_empty() {
        return Err(Error::EmptySelection(format!("no frames labelled {phase:?}")));
    }
    Ok(segments)
}

fn resample(run: &[TrackingFrame], dt: f64) -> Vec<TrackingFrame> {
    let t0 = run[0].time;
    let t_end = run[run.len() - 1].time;
    let slack = 1e-9 * dt.max(1.0);
    let mut out = Vec::new();
    let mut j = 0;
    let mut k = 0u64;
    loop {
        let target = t0 + k as f64 * dt;
        if target > t_end + slack {
            break;
        }
        while j + 1 < run.len() && (run[j + 1].time - target).abs() < (run[j].time - target).abs() - slack {
            j += 1;
        }
        out.push(run[j].clone());
        k += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn frame(time: f64, event: u64, players: &[(&str, f64, f64)]) -> TrackingFrame {
        TrackingFrame {
            time,
            event_id: event,
            entities: players.iter().map(|&(id, x, y)| (id.to_string(), (x, y))).collect(),
        }
    }

    fn matchup() -> Matchup {
        Matchup {
            team_a: (0..5).map(|i| format!("a{i}")).collect(),
            team_b: (0..5).map(|i| format!("b{i}")).collect(),
            half_boundary: 0.0,
        }
    }

    fn ten(xs: [f64; 10]) -> TrackingFrame {
        let ids: Vec<String> = (0..5).map(|i| format!("a{i}")).chain((0..5).map(|i| format!("b{i}"))).collect();
        TrackingFrame {
            time: 0.0,
            event_id: 0,
            entities: ids.into_iter().zip(xs).map(|(id, x)| (id, (x, 0.0))).collect(),
        }
    }

    fn schema(event: bool) -> CsvSchema {
        CsvSchema {
            time_col: "t".into(),
            entity_col: "id".into(),
            x_col: "x".into(),
            y_col: "y".into(),
            event_col: event.then(|| "ev".into()),
        }
    }

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn rows_grouped_into_frames() {
        let f = write("t,id,x,y\n0.0,p1,1,2\n0.0,p2,3,4\n");
        let frames = load_csv(f.path(), &schema(false)).unwrap();
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0].entities.len(), 2);
        assert_eq!(frames[0].event_id, 0);
    }

    #[test]
    fn bench_rows_dropped() {
        let f = write("t,id,x,y,ev\n0.0,p1,-48.5,-27.5,3\n0.0,p2,3,4,3\n");
        let frames = load_csv(f.path(), &schema(true)).unwrap();
        assert!(!frames[0].entities.contains_key("p1"));
        assert_eq!(frames[0].event_id, 3);
    }

    #[test]
    fn bad_number_reports_row() {
        let f = write("t,id,x,y\n0.0,p1,1,2\n0.04,p1,abc,2\n");
        match load_csv(f.path(), &schema(false)) {
            Err(Error::ParseError { row, .. }) => assert_eq!(row, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_column_is_schema_error() {
        let f = write("t,id,x\n0.0,p1,1\n");
        assert!(matches!(load_csv(f.path(), &schema(false)), Err(Error::SchemaError(_))));
    }

    #[test]
    fn rows_sorted_by_time() {
        let f = write("t,id,x,y\n0.08,p1,1,2\n0.0,p1,3,4\n0.04,p1,5,6\n");
        let frames = load_csv(f.path(), &schema(false)).unwrap();
        let times: Vec<f64> = frames.iter().map(|f| f.time).collect();
        assert_eq!(times, vec![0.0, 0.04, 0.08]);
    }

    #[test]
    fn reflection() {
        let frames = vec![frame(0.0, 0, &[("p", -30.0, 5.0), ("q", 30.0, -5.0)])];
        let once = reflect_half_court(&frames);
        assert_eq!(once[0].entities["p"], (30.0, 5.0));
        assert_eq!(once[0].entities["q"], (30.0, -5.0));
        assert_eq!(reflect_half_court(&once), once);
    }

    #[test]
    fn phase_rules() {
        let m = matchup();
        assert_eq!(classify_phase(&ten([10.0; 10]), &m), PhaseLabel::TeamAAttacking);
        assert_eq!(classify_phase(&ten([-10.0; 10]), &m), PhaseLabel::TeamBAttacking);
        let mut split = [10.0; 10];
        split[..5].fill(-10.0);
        assert_eq!(classify_phase(&ten(split), &m), PhaseLabel::Transition);
        let mut nine = [10.0; 10];
        nine[0] = -1.0;
        assert_eq!(classify_phase(&ten(nine), &m), PhaseLabel::TeamAAttacking);
        let mut missing = ten([10.0; 10]);
        missing.entities.remove("b4");
        assert_eq!(classify_phase(&missing, &m), PhaseLabel::Transition);
    }

    #[test]
    fn segments_split_on_label_and_event() {
        use PhaseLabel::*;
        let frames: Vec<TrackingFrame> = (0..6).map(|i| frame(i as f64, 0, &[("p", i as f64, 0.0)])).collect();
        let labels = [TeamAAttacking, TeamAAttacking, TeamBAttacking, TeamAAttacking, TeamAAttacking, TeamAAttacking];
        let segs = segment_by(&frames, &labels, TeamAAttacking, 1.0).unwrap();
        assert_eq!(segs.iter().map(Segment::len).collect::<Vec<_>>(), vec![2, 3]);

        let mut frames2 = frames.clone();
        for f in frames2.iter_mut().skip(4) {
            f.event_id = 1;
        }
        let segs = segment_by(&frames2, &[TeamAAttacking; 6], TeamAAttacking, 1.0).unwrap();
        assert_eq!(segs.iter().map(Segment::len).collect::<Vec<_>>(), vec![4, 2]);
        assert!(matches!(
            segment_by(&frames, &[Transition; 6], TeamAAttacking, 1.0),
            Err(Error::EmptySelection(_))
        ));
    }

    #[test]
    fn resampling() {
        let frames: Vec<TrackingFrame> = (0..11).map(|i| frame(i as f64 * 0.04, 0, &[("p", i as f64, 0.0)])).collect();
        let labels = [PhaseLabel::TeamAAttacking; 11];
        let same = segment_by(&frames, &labels, PhaseLabel::TeamAAttacking, 0.04).unwrap();
        assert_eq!(same[0].frames, frames);
        let coarse = segment_by(&frames, &labels, PhaseLabel::TeamAAttacking, 0.2).unwrap();
        let xs: Vec<f64> = coarse[0].frames.iter().map(|f| f.entities["p"].0).collect();
        assert_eq!(xs, vec![0.0, 5.0, 10.0]);
    }

    #[test]
    fn aligned_runs_split_on_absence() {
        let frames = vec![
            frame(0.0, 0, &[("p", 1.0, 0.0), ("q", 2.0, 0.0)]),
            frame(1.0, 0, &[("p", 1.0, 0.0), ("q", 2.0, 0.0)]),
            frame(2.0, 0, &[("p", 1.0, 0.0)]),
            frame(3.0, 0, &[("p", 1.0, 0.0), ("q", 2.0, 0.0)]),
        ];
        let seg = Segment { event_id: 0, frames };
        let runs = seg.aligned_runs(&["p", "q"]);
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[0][0].len(), 2);
        assert_eq!(runs[1][1].len(), 1);
        assert_eq!(seg.aligned_runs(&["p"]).len(), 1);
    }

    #[test]
    fn court_landmarks() {
        let l = basketball_landmarks();
        assert_eq!((l.dim(), l.k()), (2, 7));
        assert_eq!(l.sigma()[(0, 6)], 40.0);
    }
}
