//! Report files: `report.json` plus CSV tables of the measures and deltas.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use super::run::{RunSummary, ScenarioSummary};
use crate::error::{Error, Result};
use crate::measures::DependencyReport;

pub const TABLES: [&str; 4] = ["m_schatten.csv", "m_rowvar.csv", "delta_schatten.csv", "delta_rowvar.csv"];

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidInput(format!("csv output: {other:?}")),
    }
}

fn write_table(path: &Path, names: &[String], m: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["from\\to".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for (i, name) in names.iter().enumerate() {
        let mut row = vec![name.clone()];
        row.extend((0..names.len()).map(|j| m[(i, j)].to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the four tables of `report` into `dir`.
pub fn write_tables(report: &DependencyReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let names = &report.variable_names;
    for (file, m) in TABLES
        .iter()
        .zip([&report.m_schatten, &report.m_rowvar, &report.delta_schatten, &report.delta_rowvar])
    {
        write_table(&dir.join(file), names, m)?;
    }
    Ok(())
}

fn scenario_dir(s: &ScenarioSummary) -> String {
    format!("tau{}_{}", s.scenario.tau, s.scenario.label.replace('=', ""))
}

/// Writes `report.json` and the tables of `report` into `dir`. When the
/// summary holds several scenarios, each one also gets its tables under
/// `scenarios/<tau>_<label>/`. Existing files are overwritten.
pub fn emit_report(report: &DependencyReport, summary: &RunSummary, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let json = serde_json::json!({
        "schema_version": summary.schema_version,
        "report": report,
        "summary": summary,
    });
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(&json)? + "\n")?;
    write_tables(report, dir)?;
    if summary.scenarios.len() > 1 {
        for s in &summary.scenarios {
            write_tables(&s.mean_report, &dir.join("scenarios").join(scenario_dir(s)))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::DependencyReport;

    #[test]
    fn tables_have_headers_and_are_antisymmetric() {
        let names = vec!["X".to_string(), "Y".to_string()];
        let m = DMatrix::from_row_slice(2, 2, &[5.0, 2.92, 2.45, 6.0]);
        let r = DependencyReport::from_measures(names, m.clone(), m, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_tables(&r, dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("delta_schatten.csv")).unwrap();
        let rows: Vec<Vec<String>> = text.lines().map(|l| l.split(',').map(String::from).collect()).collect();
        assert_eq!(rows[0], vec!["from\\to", "X", "Y"]);
        let d01: f64 = rows[1][2].parse().unwrap();
        let d10: f64 = rows[2][1].parse().unwrap();
        assert_eq!(d01, -d10);
        assert_eq!(rows.len(), 3);
    }
}
