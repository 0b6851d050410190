//! Exit statuses and report output.

use std::fs;
use std::path::Path;

use cevian_core::forge::ForgeError;
use cevian_core::semilinear::SemilinearError;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Why a command did not succeed, mapped to a stable exit status.
#[derive(Debug)]
pub enum Failure {
    /// The question was answered negatively; the report has been printed.
    Negative,
    /// Unreadable input or a schema violation.
    Input(String),
    /// An arrangement grew beyond the cell cap.
    CellCap(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Negative => 1,
            Failure::Input(_) => 2,
            Failure::CellCap(_) => 3,
        }
    }

    pub fn message(&self) -> Option<String> {
        match self {
            Failure::Negative => None,
            Failure::Input(m) => Some(format!("error: {m}")),
            Failure::CellCap(m) => Some(format!("error: {m}")),
        }
    }
}

impl From<SemilinearError> for Failure {
    fn from(e: SemilinearError) -> Self {
        match e {
            SemilinearError::CellCapExceeded { .. } => Failure::CellCap(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<ForgeError> for Failure {
    fn from(e: ForgeError) -> Self {
        match e {
            ForgeError::CellCap(_) => Failure::CellCap(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

pub fn to_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

/// Writes an artifact to `out`, or prints it when no path is given.
pub fn emit_artifact<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let text = to_pretty(value);
    match out {
        Some(path) => fs::write(path, text + "\n").map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Prints a report. When the artifact went to stdout the report goes to
/// stderr instead.
pub fn say(text: &str, artifact_on_stdout: bool) {
    if artifact_on_stdout {
        eprintln!("{text}");
    } else {
        println!("{text}");
    }
}
