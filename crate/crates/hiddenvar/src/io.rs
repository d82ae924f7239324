//! File formats. CSV files have a header row and LF endings; floats are
//! written in shortest round-trip form so reading them back is bit-exact.
//! JSON keys follow struct field order.

use std::fs;
use std::path::{Path, PathBuf};

use hiddenvar_core::grid::AngularGrid;
use hiddenvar_core::polarizer::TransferProfile;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Sidecar of a profile CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileHeader {
    pub grid: usize,
    pub epsilon: Option<f64>,
    pub provenance: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct ProfileRow {
    lambda: f64,
    value: f64,
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    let file = fs::File::create(path).map_err(|e| CliError::write(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::write(path, source),
        other => CliError::Input(format!("{}: {other:?}", path.display())),
    }
}

/// Write `rows` with a header taken from the field names of `T`.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::write(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::write(path, e))
}

/// Parse JSON; syntax and type errors carry `path:line:column`.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::json(path, &e))
}

/// Line of the first occurrence of `"key"` in a JSON file, for diagnostics
/// about values that parse but fail validation.
pub fn line_of_key(path: &Path, key: &str) -> Option<u64> {
    let text = fs::read_to_string(path).ok()?;
    let needle = format!("\"{key}\"");
    text.lines()
        .position(|l| l.contains(&needle))
        .map(|i| i as u64 + 1)
}

pub fn write_profile(
    csv_path: &Path,
    profile: &TransferProfile,
    header: &ProfileHeader,
) -> Result<(), CliError> {
    let grid = profile.grid();
    let rows: Vec<ProfileRow> = profile
        .values()
        .iter()
        .enumerate()
        .map(|(j, &value)| ProfileRow {
            lambda: grid.node(j),
            value,
        })
        .collect();
    write_csv(csv_path, &rows)?;
    write_json(&sidecar_path(csv_path), header)
}

/// Read a profile CSV and its sidecar, if present.
pub fn read_profile(csv_path: &Path) -> Result<(TransferProfile, Option<ProfileHeader>), CliError> {
    let file = fs::File::open(csv_path).map_err(|e| CliError::read(csv_path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| CliError::at_line(csv_path, 1, e))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["lambda", "value"] {
        return Err(CliError::at_line(
            csv_path,
            1,
            "expected header `lambda,value`",
        ));
    }
    let mut rows = Vec::new();
    for record in reader.deserialize::<ProfileRow>() {
        let row = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            CliError::at_line(csv_path, line, csv_message(&e))
        })?;
        rows.push(row);
    }
    let n = rows.len();
    let grid =
        AngularGrid::new(n).map_err(|e| CliError::Input(format!("{}: {e}", csv_path.display())))?;
    for (j, row) in rows.iter().enumerate() {
        let line = j as u64 + 2;
        let node = grid.node(j);
        if (row.lambda - node).abs() > 1e-9 * (1.0 + node) {
            return Err(CliError::at_line(
                csv_path,
                line,
                format!(
                    "lambda {} is not grid node {j} ({node}) of a {n}-point grid",
                    row.lambda
                ),
            ));
        }
        if !(0.0..=1.0).contains(&row.value) {
            return Err(CliError::at_line(
                csv_path,
                line,
                format!("value {} outside [0, 1]", row.value),
            ));
        }
    }
    let profile = TransferProfile::from_values(grid, rows.into_iter().map(|r| r.value).collect())?;
    let side = sidecar_path(csv_path);
    let header = if side.exists() {
        let h: ProfileHeader = read_json(&side)?;
        if h.grid != n {
            return Err(CliError::Input(format!(
                "{}: header says grid {} but {} has {n} rows",
                side.display(),
                h.grid,
                csv_path.display()
            )));
        }
        Some(h)
    } else {
        None
    };
    Ok((profile, header))
}

fn csv_message(e: &csv::Error) -> String {
    match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => {
            format!("expected {expected_len} fields, found {len}")
        }
        _ => e.to_string(),
    }
}

/// Parse an angle: a number of radians, or a multiple or fraction of `pi`
/// such as `pi/4` or `3pi/8`. With `degrees`, plain numbers are degrees.
pub fn parse_angle(s: &str, degrees: bool) -> Result<f64, String> {
    let t = s.trim();
    if let Some(pos) = t.find("pi") {
        let coef = t[..pos].trim().trim_end_matches('*');
        let rest = t[pos + 2..].trim();
        let c = if coef.is_empty() {
            1.0
        } else if coef == "-" {
            -1.0
        } else {
            coef.parse::<f64>()
                .map_err(|_| format!("bad angle `{s}`"))?
        };
        let d = if rest.is_empty() {
            1.0
        } else {
            let den = rest
                .strip_prefix('/')
                .ok_or_else(|| format!("bad angle `{s}`"))?;
            den.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad angle `{s}`"))?
        };
        return Ok(c * std::f64::consts::PI / d);
    }
    let v: f64 = t.parse().map_err(|_| format!("bad angle `{s}`"))?;
    if !v.is_finite() {
        return Err(format!("bad angle `{s}`"));
    }
    Ok(if degrees { v.to_radians() } else { v })
}

pub fn parse_angles(s: &str, degrees: bool) -> Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|a| parse_angle(a, degrees)).collect()
}
