//! Output files: trajectory CSV, summary JSON, grid CSV. Every file is
//! written to a temporary sibling and renamed into place.

use std::io::Write;
use std::path::Path;

use safeguard_core::scenario::Scenario;
use safeguard_core::sim::{GridValues, TrajectoryLog};
use serde::Serialize;

/// Round-trip formatting: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn trajectory_csv(scenario: &Scenario, log: &TrajectoryLog) -> Vec<u8> {
    let obstacles = scenario.obstacles.len();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend(scenario.state_labels());
    header.extend(scenario.control_labels());
    header.push("delta".into());
    header.push("V".into());
    header.extend((1..=obstacles).map(|i| format!("h_{i}")));
    header.extend((1..=obstacles).map(|i| format!("cbc_{i}")));
    header.extend(["qp_status", "active_set", "min_margin"].map(String::from));
    w.write_record(&header).expect("in-memory write");

    for row in &log.rows {
        let mut rec = vec![num(row.t)];
        rec.extend(row.state.iter().map(|v| num(*v)));
        rec.extend(row.u.iter().map(|v| num(*v)));
        rec.push(num(row.delta));
        rec.push(num(row.v));
        rec.extend(row.h.iter().map(|v| num(*v)));
        rec.extend(row.cbc.iter().map(|v| num(*v)));
        rec.push(row.status.as_str().into());
        rec.push(
            row.active_set
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(";"),
        );
        rec.push(num(row.min_margin));
        w.write_record(&rec).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// `summary.json`; `min_h` is `null` when there are no obstacles.
#[derive(Debug, Serialize)]
pub struct SummaryFile<'a> {
    #[serde(flatten)]
    pub summary: &'a safeguard_core::sim::RunSummary,
    /// Wall-clock seconds.
    pub runtime: f64,
    pub exit_code: i32,
}

pub fn grid_csv(grid: &GridValues) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "y", "value"]).expect("in-memory write");
    for (x, y, v) in grid.iter() {
        w.write_record([num(x), num(y), num(v)]).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Contour polylines as `(polyline, x, y)` rows.
pub fn polylines_csv(lines: &[Vec<(f64, f64)>]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["polyline", "x", "y"]).expect("in-memory write");
    for (k, line) in lines.iter().enumerate() {
        for (x, y) in line {
            w.write_record([k.to_string(), num(*x), num(*y)]).expect("in-memory write");
        }
    }
    w.into_inner().expect("in-memory flush")
}
