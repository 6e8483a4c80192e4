//! File plumbing: reading inputs, atomic writes and exit-code mapping.

use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use ceqaoa_core::rl::RlLaw;
use ceqaoa_core::{Error, ProblemInstance};

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Display) -> Self {
        Failure { code, message: message.to_string() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CapExceeded { .. } => 4,
            Error::Io(_) => 1,
            _ => 2,
        };
        Failure::new(code, e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(1, e)
    }
}

pub fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))
}

/// Writes `text` to `path` through a sibling temp file, or to stdout.
pub fn emit(path: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    let Some(path) = path else {
        std::io::stdout().write_all(text.as_bytes())?;
        return Ok(());
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Failure::new(1, e.error))?;
    Ok(())
}

pub fn emit_json<T: Serialize>(path: Option<&PathBuf>, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::new(1, e))?;
    text.push('\n');
    emit(path, &text)
}

/// Header plus rows, comma-separated, LF line endings. Cells never contain
/// commas or quotes (numbers and dash-joined labels).
pub fn csv_table<R: AsRef<[String]>>(header: &[&str], rows: &[R]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.as_ref().join(","));
        out.push('\n');
    }
    out
}

pub fn rl_law_csv(inst: &ProblemInstance, law: &RlLaw) -> Result<String, Failure> {
    let rows: Vec<[String; 4]> = (0..inst.dim())
        .map(|i| {
            [
                inst.string(i).label(),
                inst.energies()[i].to_string(),
                law.probs[i].to_string(),
                law.std_errors[i].to_string(),
            ]
        })
        .collect();
    Ok(csv_table(&["string", "energy", "probability", "std_error"], &rows))
}
