//! CSV input and output.
//!
//! The generic schema is `id,timestamp,lat,lon` with a header row.
//! Coordinates are written with Rust's shortest round-trip formatting, padded
//! to at least nine fractional digits, so a write/read cycle is bit-exact.

use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geo::{GpsPoint, Trajectory};

/// Porto taxi traces are sampled four times per minute.
pub const PORTO_SAMPLE_INTERVAL_S: i64 = 15;

const MIN_FRACTION_DIGITS: usize = 9;

#[derive(Debug, Deserialize)]
struct Row {
    id: String,
    timestamp: i64,
    lat: f64,
    lon: f64,
}

fn parse_err(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

/// Reads trajectories in the generic schema, grouped by id in order of first
/// appearance, each sorted by timestamp.
pub fn load_csv(path: &Path) -> Result<Vec<Trajectory>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(path)?);
    let headers = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<(u64, GpsPoint)>> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row: Row = record
            .deserialize(Some(&headers))
            .map_err(|e| parse_err(path, line, e.to_string()))?;
        let point = GpsPoint::new(row.lat, row.lon, row.timestamp).map_err(|_| {
            parse_err(
                path,
                line,
                format!("coordinate out of range: lat {}, lon {}", row.lat, row.lon),
            )
        })?;
        groups
            .entry(row.id.clone())
            .or_insert_with(|| {
                order.push(row.id.clone());
                Vec::new()
            })
            .push((line, point));
    }

    order
        .into_iter()
        .map(|id| {
            let mut rows = groups.remove(&id).expect("grouped id");
            rows.sort_by_key(|(_, p)| p.t);
            if let Some(w) = rows.windows(2).find(|w| w[0].1.t == w[1].1.t) {
                return Err(parse_err(
                    path,
                    w[1].0,
                    format!("duplicate timestamp {} in trajectory {id:?}", w[1].1.t),
                ));
            }
            Trajectory::new(id, rows.into_iter().map(|(_, p)| p).collect())
        })
        .collect()
}

/// Formats a coordinate so that parsing it back yields the identical `f64`.
pub fn format_coord(x: f64) -> String {
    let mut s = format!("{x}");
    let frac = match s.find('.') {
        Some(dot) => s.len() - dot - 1,
        None => {
            s.push('.');
            0
        }
    };
    for _ in frac..MIN_FRACTION_DIGITS {
        s.push('0');
    }
    s
}

pub fn write_csv<'a, I>(path: &Path, trajectories: I) -> Result<()>
where
    I: IntoIterator<Item = &'a Trajectory>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let io_err = |e: csv::Error| Error::Format(format!("{}: {e}", path.display()));
    w.write_record(["id", "timestamp", "lat", "lon"]).map_err(io_err)?;
    for t in trajectories {
        for p in t.points() {
            w.write_record([
                t.id(),
                &p.t.to_string(),
                &format_coord(p.lat),
                &format_coord(p.lon),
            ])
            .map_err(io_err)?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Result of reading a Porto taxi file.
#[derive(Debug, Default)]
pub struct PortoLoad {
    pub trajectories: Vec<Trajectory>,
    /// Trips that were empty, too short, or unparseable.
    pub skipped: usize,
}

/// Reads the public Porto taxi layout: a `TRIP_ID` column and a `POLYLINE`
/// column holding `[[lon, lat], ...]`. Timestamps are synthesized at the
/// dataset's 15 s sampling interval starting from 0.
pub fn load_porto(path: &Path) -> Result<PortoLoad> {
    let mut reader = csv::Reader::from_reader(open(path)?);
    let headers = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| parse_err(path, 1, format!("missing {name} column")))
    };
    let (id_col, poly_col) = (column("TRIP_ID")?, column("POLYLINE")?);

    let mut out = PortoLoad::default();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let id = record.get(id_col).unwrap_or_default().trim().to_string();
        let polyline = record.get(poly_col).unwrap_or_default();
        match parse_polyline(&id, polyline) {
            Ok(t) => out.trajectories.push(t),
            Err(e) => {
                log::warn!("{}:{line}: skipping trip {id:?}: {e}", path.display());
                out.skipped += 1;
            }
        }
    }
    Ok(out)
}

fn parse_polyline(id: &str, polyline: &str) -> Result<Trajectory> {
    let pairs: Vec<[f64; 2]> =
        serde_json::from_str(polyline).map_err(|e| Error::Format(e.to_string()))?;
    let points = pairs
        .iter()
        .zip((0..).map(|i| i * PORTO_SAMPLE_INTERVAL_S))
        .map(|(&[lon, lat], t)| GpsPoint::new(lat, lon, t))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(id, points)
}
