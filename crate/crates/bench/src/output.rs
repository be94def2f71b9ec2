//! Files and CSV output.

use std::io::Write;
use std::path::Path;

use maqd_core::design::DecoderDesign;
use serde::Serialize;

use crate::{BenchError, Result};

/// Writes through a temporary file so readers never see half a file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents).map_err(|e| BenchError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| BenchError::io(path, e))
}

pub fn read_design(path: &Path) -> Result<DecoderDesign> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    Ok(DecoderDesign::from_text(&text)?)
}

/// CSV text with a header row.
pub fn csv_string<T: Serialize>(records: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| BenchError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes CSV to `path`, or to stdout if `None`.
pub fn emit_csv<T: Serialize>(records: &[T], path: Option<&Path>) -> Result<()> {
    let text = csv_string(records)?;
    match path {
        Some(p) => write_atomic(p, &text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| BenchError::io(Path::new("<stdout>"), e)),
    }
}

/// Drops the named columns, e.g. wall-clock times before comparing runs.
pub fn strip_columns(csv_text: &str, columns: &[&str]) -> String {
    let mut lines = csv_text.lines();
    let Some(header) = lines.next() else {
        return String::new();
    };
    let keep: Vec<bool> = header.split(',').map(|c| !columns.contains(&c)).collect();
    let filter = |l: &str| {
        l.split(',')
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(f, _)| f)
            .collect::<Vec<_>>()
            .join(",")
    };
    std::iter::once(header)
        .chain(lines)
        .map(|l| filter(l) + "\n")
        .collect()
}
