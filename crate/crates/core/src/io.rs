//! Record CSV schema and sidecar metadata.
//!
//! The canonical record schema is a CSV with header
//! `setting_a,setting_b,outcome_a,outcome_b`. Settings are `X`/`P` or
//! numeric analyzer angles in radians; outcomes are decimal reals. A
//! sidecar JSON (`<file>.meta.json`) carries the resolved generator config
//! and a `units` flag; `units = "particles"` triggers Schwinger
//! normalization downstream.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::distributions::{Quadrature, SampleRecord};
use crate::error::{Error, Result};

pub const RECORD_HEADER: &str = "setting_a,setting_b,outcome_a,outcome_b";

/// Outcome units of a record file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    #[default]
    Quadrature,
    Particles,
}

/// Sidecar metadata emitted next to every simulated record file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub units: Units,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo_intensity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jx_mean: Option<f64>,
    /// Resolved generator configuration, echoed for reproducibility.
    pub config: serde_json::Value,
}

impl Sidecar {
    pub fn path_for(record_path: &Path) -> PathBuf {
        let mut name = record_path.file_name().unwrap_or_default().to_os_string();
        name.push(".meta.json");
        record_path.with_file_name(name)
    }

    pub fn write(&self, record_path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(Self::path_for(record_path), text)?;
        Ok(())
    }

    pub fn read(record_path: &Path) -> Result<Option<Sidecar>> {
        let path = Self::path_for(record_path);
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(path)?;
        Ok(Some(serde_json::from_str(&text)?))
    }
}

/// Parse a record CSV; schema errors carry the 1-based line number.
pub fn read_records(path: &Path) -> Result<Vec<SampleRecord>> {
    let text = fs::read_to_string(path)?;
    parse_records(&text)
}

pub fn parse_records(text: &str) -> Result<Vec<SampleRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == RECORD_HEADER => {}
        Some((_, header)) => {
            return Err(Error::Schema {
                line: 1,
                msg: format!("expected header {RECORD_HEADER:?}, got {:?}", header.trim()),
            })
        }
        None => return Err(Error::Schema { line: 1, msg: "empty file".into() }),
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(Error::Schema {
                line: line_no,
                msg: format!("expected 4 fields, got {}", parts.len()),
            });
        }
        let setting_a: Quadrature = parts[0]
            .parse()
            .map_err(|msg| Error::Schema { line: line_no, msg })?;
        let setting_b: Quadrature = parts[1]
            .parse()
            .map_err(|msg| Error::Schema { line: line_no, msg })?;
        let outcome_a: f64 = parts[2]
            .trim()
            .parse()
            .map_err(|e| Error::Schema { line: line_no, msg: format!("outcome_a: {e}") })?;
        let outcome_b: f64 = parts[3]
            .trim()
            .parse()
            .map_err(|e| Error::Schema { line: line_no, msg: format!("outcome_b: {e}") })?;
        let record = SampleRecord::new(setting_a, setting_b, outcome_a, outcome_b)
            .map_err(|e| Error::Schema { line: line_no, msg: e.to_string() })?;
        records.push(record);
    }
    Ok(records)
}

pub fn write_records(path: &Path, records: &[SampleRecord]) -> Result<()> {
    let mut out = String::with_capacity(records.len() * 32 + 64);
    out.push_str(RECORD_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.setting_a, r.setting_b, r.outcome_a, r.outcome_b
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Hex SHA-256 of a file's bytes, recorded in reports for provenance.
pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.csv");
        let records = vec![
            SampleRecord::new(Quadrature::X, Quadrature::X, 0.5, -0.25).unwrap(),
            SampleRecord::new(Quadrature::P, Quadrature::P, -1.5, 2.0).unwrap(),
        ];
        write_records(&path, &records).unwrap();
        let back = read_records(&path).unwrap();
        assert_eq!(back, records);
    }

    #[test]
    fn angle_settings_map_to_quadratures() {
        let text = format!("{RECORD_HEADER}\n0,1.5707963267948966,0.1,0.2\n");
        let records = parse_records(&text).unwrap();
        assert_eq!(records[0].setting_a, Quadrature::X);
        assert_eq!(records[0].setting_b, Quadrature::P);
    }

    #[test]
    fn schema_errors_carry_line_numbers() {
        let text = format!("{RECORD_HEADER}\nX,X,1.0,2.0\nX,Q,1.0,2.0\n");
        match parse_records(&text).unwrap_err() {
            Error::Schema { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
        match parse_records("wrong,header\n").unwrap_err() {
            Error::Schema { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn sidecar_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.csv");
        let sidecar = Sidecar {
            units: Units::Particles,
            lo_intensity: Some(1e6),
            jx_mean: Some(5e5),
            config: serde_json::json!({"kind": "schwinger", "seed": 7}),
        };
        sidecar.write(&path).unwrap();
        let back = Sidecar::read(&path).unwrap().unwrap();
        assert_eq!(back, sidecar);
        assert!(Sidecar::read(&dir.path().join("other.csv")).unwrap().is_none());
    }
}
