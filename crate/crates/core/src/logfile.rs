//! On-disk sensor-log format: UTF-8 CSV with one synchronized record per row.
//!
//! Schema is fixed: header `t_us,theta_x_rad,theta_y_rad,quality,r_raw_cm`,
//! decimal point `.`, no thousands separators. Floats are written with
//! shortest round-trip precision, so `parse(format(r)) == r` bit-exactly.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::types::SensorRecord;

/// Header line of a sensor log.
pub const LOG_HEADER: &str = "t_us,theta_x_rad,theta_y_rad,quality,r_raw_cm";
/// Header line of a ground-truth sidecar file.
pub const TRUTH_HEADER: &str = "t_us,truth_x_m";

const LOG_FIELDS: usize = 5;

/// Errors raised while reading or writing sensor logs. Line numbers are
/// 1-based and count the header.
#[derive(Debug, Error)]
pub enum LogError {
    #[error("line 1: expected header `{LOG_HEADER}`, found `{found}`")]
    BadHeader { found: String },
    #[error("missing header line")]
    MissingHeader,
    #[error("line {line}: expected {LOG_FIELDS} fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: field `{field}`: invalid number `{value}`")]
    InvalidNumber {
        line: usize,
        field: &'static str,
        value: String,
    },
    #[error("line {line}: field `{field}`: must be finite")]
    NonFinite { line: usize, field: &'static str },
    #[error("line {line}: field `quality`: value {value} out of range [0, 255]")]
    QualityOutOfRange { line: usize, value: i64 },
    #[error("line {line}: field `r_raw_cm`: must be >= 0, got {value}")]
    NegativeRange { line: usize, value: f64 },
    #[error("line {line}: non-monotonic timestamp {t_us} us (previous record at {prev_us} us)")]
    NonMonotonicTimestamp { line: usize, t_us: u64, prev_us: u64 },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl LogError {
    /// Line the error points at, when it is tied to one.
    pub fn line(&self) -> Option<usize> {
        match self {
            LogError::BadHeader { .. } | LogError::MissingHeader => Some(1),
            LogError::FieldCount { line, .. }
            | LogError::InvalidNumber { line, .. }
            | LogError::NonFinite { line, .. }
            | LogError::QualityOutOfRange { line, .. }
            | LogError::NegativeRange { line, .. }
            | LogError::NonMonotonicTimestamp { line, .. } => Some(*line),
            LogError::Io(_) => None,
        }
    }
}

fn parse_f64(raw: &str, field: &'static str, line: usize) -> Result<f64, LogError> {
    let value: f64 = raw.parse().map_err(|_| LogError::InvalidNumber {
        line,
        field,
        value: raw.to_string(),
    })?;
    if !value.is_finite() {
        return Err(LogError::NonFinite { line, field });
    }
    Ok(value)
}

/// Parses one data row of the log. `line_no` is the 1-based file line used
/// in diagnostics; monotonicity across rows is the reader's job.
pub fn parse_record(line: &str, line_no: usize) -> Result<SensorRecord, LogError> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != LOG_FIELDS {
        return Err(LogError::FieldCount {
            line: line_no,
            found: fields.len(),
        });
    }

    let t_us: u64 = fields[0].parse().map_err(|_| LogError::InvalidNumber {
        line: line_no,
        field: "t_us",
        value: fields[0].to_string(),
    })?;
    let theta_x_rad = parse_f64(fields[1], "theta_x_rad", line_no)?;
    let theta_y_rad = parse_f64(fields[2], "theta_y_rad", line_no)?;

    let quality_raw: i64 = fields[3].parse().map_err(|_| LogError::InvalidNumber {
        line: line_no,
        field: "quality",
        value: fields[3].to_string(),
    })?;
    let quality: u8 = quality_raw
        .try_into()
        .map_err(|_| LogError::QualityOutOfRange {
            line: line_no,
            value: quality_raw,
        })?;

    let r_raw_cm = parse_f64(fields[4], "r_raw_cm", line_no)?;
    if r_raw_cm < 0.0 {
        return Err(LogError::NegativeRange {
            line: line_no,
            value: r_raw_cm,
        });
    }

    SensorRecord::from_values(t_us, theta_x_rad, theta_y_rad, quality, r_raw_cm)
        .map_err(|e| match e {
            // from_values re-checks what we already validated; only the
            // finiteness paths can fire here and they map 1:1.
            crate::types::TypeError::NonFinite { field, .. } => {
                LogError::NonFinite { line: line_no, field }
            }
            crate::types::TypeError::NegativeRange { value } => {
                LogError::NegativeRange { line: line_no, value }
            }
            crate::types::TypeError::TimestampMismatch { .. } => {
                unreachable!("single-row records share one timestamp")
            }
        })
}

/// Formats one record as a log row (no trailing newline).
pub fn format_record(record: &SensorRecord) -> String {
    format!(
        "{},{},{},{},{}",
        record.t_us(),
        record.flow.theta_x_rad,
        record.flow.theta_y_rad,
        record.flow.quality,
        record.range.r_raw_cm
    )
}

/// Reads a full log: header check, per-row parsing, strict timestamp
/// monotonicity across rows.
pub fn read_log<R: BufRead>(reader: R) -> Result<Vec<SensorRecord>, LogError> {
    let mut lines = reader.lines();
    match lines.next() {
        None => return Err(LogError::MissingHeader),
        Some(header) => {
            let header = header?;
            if header.trim_end_matches('\r') != LOG_HEADER {
                return Err(LogError::BadHeader { found: header });
            }
        }
    }

    let mut records = Vec::new();
    let mut prev_us: Option<u64> = None;
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        let record = parse_record(line.trim_end_matches('\r'), line_no)?;
        if let Some(prev) = prev_us {
            if record.t_us() <= prev {
                return Err(LogError::NonMonotonicTimestamp {
                    line: line_no,
                    t_us: record.t_us(),
                    prev_us: prev,
                });
            }
        }
        prev_us = Some(record.t_us());
        records.push(record);
    }
    Ok(records)
}

pub fn read_log_file<P: AsRef<Path>>(path: P) -> Result<Vec<SensorRecord>, LogError> {
    read_log(BufReader::new(File::open(path)?))
}

pub fn write_log<W: Write>(mut writer: W, records: &[SensorRecord]) -> io::Result<()> {
    writeln!(writer, "{LOG_HEADER}")?;
    for record in records {
        writeln!(writer, "{}", format_record(record))?;
    }
    Ok(())
}

pub fn write_log_file<P: AsRef<Path>>(path: P, records: &[SensorRecord]) -> io::Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    write_log(&mut writer, records)?;
    writer.flush()
}

/// One ground-truth displacement point emitted by the simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthPoint {
    pub t_us: u64,
    pub x_m: f64,
}

pub fn write_truth<W: Write>(mut writer: W, points: &[TruthPoint]) -> io::Result<()> {
    writeln!(writer, "{TRUTH_HEADER}")?;
    for p in points {
        writeln!(writer, "{},{}", p.t_us, p.x_m)?;
    }
    Ok(())
}

pub fn write_truth_file<P: AsRef<Path>>(path: P, points: &[TruthPoint]) -> io::Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    write_truth(&mut writer, points)?;
    writer.flush()
}
