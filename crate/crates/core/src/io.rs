//! Shared file plumbing: CSV tables with checked headers and JSON documents.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: u64, msg: String },
    #[error("{path}: expected columns `{expected}`, found `{found}`")]
    Columns { path: PathBuf, expected: String, found: String },
    #[error("{path}: {msg}")]
    Json { path: PathBuf, msg: String },
    #[error("{path}: {msg}")]
    Invalid { path: PathBuf, msg: String },
}

impl IoError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io { path: path.to_path_buf(), source }
    }

    pub(crate) fn invalid(path: &Path, msg: impl Into<String>) -> Self {
        IoError::Invalid { path: path.to_path_buf(), msg: msg.into() }
    }
}

/// A numeric CSV table read with a fixed header.
pub struct Table {
    pub path: PathBuf,
    pub header: Vec<String>,
    /// `(line number, values)` for every data row.
    pub rows: Vec<(u64, Vec<f64>)>,
}

/// Reads a numeric CSV whose header must equal one of `accepted` exactly.
pub fn read_table(path: &Path, accepted: &[&[&str]]) -> Result<Table, IoError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header: Vec<String> = rdr.headers().map_err(|e| csv_error(path, e))?.iter().map(str::to_string).collect();
    if !accepted.iter().any(|cols| cols.len() == header.len() && cols.iter().zip(&header).all(|(a, b)| a == b)) {
        let expected = accepted.iter().map(|c| c.join(",")).collect::<Vec<_>>().join("` or `");
        return Err(IoError::Columns { path: path.to_path_buf(), expected, found: header.join(",") });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let mut vals = Vec::with_capacity(rec.len());
        for field in rec.iter() {
            let v: f64 = field.parse().map_err(|_| IoError::Parse {
                path: path.to_path_buf(),
                line,
                msg: format!("not a number: `{field}`"),
            })?;
            vals.push(v);
        }
        rows.push((line, vals));
    }
    Ok(Table { path: path.to_path_buf(), header, rows })
}

fn csv_error(path: &Path, e: csv::Error) -> IoError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => IoError::Io { path: path.to_path_buf(), source },
        other => IoError::Parse { path: path.to_path_buf(), line, msg: format!("{other:?}") },
    }
}

/// Writes a CSV with the given header; values are formatted with `Display`,
/// which is the shortest round-tripping representation for `f64`.
pub fn write_table<R, I>(path: &Path, header: &[&str], rows: I) -> Result<(), IoError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let file = File::create(path).map_err(|e| IoError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut put = |s: &str| w.write_all(s.as_bytes()).map_err(|e| IoError::io(path, e));
    put(&header.join(","))?;
    put("\n")?;
    for row in rows {
        let line: Vec<String> = row.into_iter().collect();
        put(&line.join(","))?;
        put("\n")?;
    }
    w.flush().map_err(|e| IoError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| IoError::Json { path: path.to_path_buf(), msg: e.to_string() })?;
    std::fs::write(path, text + "\n").map_err(|e| IoError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| IoError::Json {
        path: path.to_path_buf(),
        msg: format!("line {} column {}: {e}", e.line(), e.column()),
    })
}

pub(crate) fn create_dir(path: &Path) -> Result<(), IoError> {
    std::fs::create_dir_all(path).map_err(|e| IoError::io(path, e))
}

#[inline]
pub(crate) fn num(v: f64) -> String {
    format!("{v}")
}
