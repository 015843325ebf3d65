//! Input loading, the output envelope and exit codes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// A failure that stops the run before any verdict exists.
#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }
}

impl From<localgamma::Error> for CliError {
    fn from(e: localgamma::Error) -> Self {
        CliError { code: e.code(), message: e.to_string() }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Parses `arg` as inline JSON when it starts with `{`, `[` or a quote, otherwise
/// reads it as a file path.
pub fn load<T: DeserializeOwned>(what: &str, arg: &str) -> CliResult<T> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') || trimmed.starts_with('"') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| CliError::new("io_error", format!("{what}: cannot read {arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::new("schema_violation", format!("{what}: {e}")))
}

#[derive(Serialize)]
pub struct Envelope<'a, R: Serialize> {
    pub command: &'a str,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub report: R,
}

/// Pass/fail verdict plus the report to emit.
pub struct Outcome {
    pub passed: bool,
    pub json: serde_json::Value,
    pub csv: Option<Vec<Vec<String>>>,
}

pub fn envelope<R: Serialize>(command: &str, passed: bool, tolerance: Option<f64>, report: R) -> CliResult<serde_json::Value> {
    let env = Envelope {
        command,
        status: if passed { "pass" } else { "fail" },
        code: (!passed).then_some("tolerance_exceeded"),
        tolerance,
        report,
    };
    serde_json::to_value(env).map_err(|e| CliError::new("serialization", e.to_string()))
}

pub fn write_output(path: Option<&PathBuf>, body: &str) -> CliResult<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| CliError::new("io_error", e.to_string()))?;
            }
            fs::write(p, body).map_err(|e| CliError::new("io_error", format!("cannot write {}: {e}", p.display())))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes()).map_err(|e| CliError::new("io_error", e.to_string()))
        }
    }
}

pub fn csv_string(rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(r).map_err(|e| CliError::new("serialization", e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::new("serialization", e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::new("serialization", e.to_string()))
}

pub fn report_error(e: &CliError) {
    let line = serde_json::json!({"status": "error", "code": e.code, "message": e.message});
    eprintln!("{line}");
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::new("io_error", format!("cannot create {}: {e}", dir.display())))
}
