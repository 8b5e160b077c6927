//! File helpers that attach the offending path to every error.

use std::fs;
use std::path::Path;

use edgediff_core::graph::{parse_edge_list, Graph};
use edgediff_core::schedule::{read_schedule_csv, ScheduleFile};

use crate::error::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

pub fn read_graph(path: &Path) -> Result<Graph, CliError> {
    parse_edge_list(&read_text(path)?).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

pub fn read_schedule(path: &Path) -> Result<ScheduleFile, CliError> {
    read_schedule_csv(&read_text(path)?).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

/// One positive value per line; blank lines and `#` comments are skipped.
pub fn read_gamma(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| CliError::Input {
            path: path.to_path_buf(),
            msg: format!("line {}: not a number: {line}", k + 1),
        })?;
        out.push(v);
    }
    Ok(out)
}

/// Writes a CSV preceded by a format comment line.
pub fn write_csv(
    path: &Path,
    tag: &str,
    header: &[String],
    rows: &[Vec<String>],
) -> Result<(), CliError> {
    let mut buf = format!("# {tag}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let to_io = |e: csv::Error| CliError::io(path, e.into());
        w.write_record(header).map_err(to_io)?;
        for r in rows {
            w.write_record(r).map_err(to_io)?;
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    fs::write(path, buf).map_err(|e| CliError::io(path, e))
}
