//! CSV and JSON emission with a reproducibility header.
//!
//! Every CSV starts with a comment line carrying the SHA-256 of the
//! canonically re-serialized config (output path excluded, seed override
//! already applied) and the seed, so identical physics configs produce
//! byte-identical files wherever the results are written.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] crate::config::ConfigError),
    #[error("config error: {0}")]
    Usage(String),
    #[error("solver failure: {0}")]
    Solver(#[from] qtm::QtmError),
    #[error("physics check failed: {0}")]
    Physics(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Solver(_) | CliError::Io(_) | CliError::Json(_) => 3,
            CliError::Physics(_) => 4,
        }
    }
}

/// SHA-256 over the canonical serialization of the config with the output
/// path stripped, so relocating results never changes the hash.
pub fn config_hash(cfg: &RunConfig) -> String {
    let mut canon = cfg.clone();
    canon.output = None;
    let text = serde_json::to_string(&canon).expect("config serialization cannot fail");
    let digest = Sha256::digest(text.as_bytes());
    let mut hex = String::with_capacity(64);
    for byte in digest {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

/// Accumulates a CSV document: header comment, column row, data rows.
/// Numbers are written via `Display`, i.e. the shortest decimal that
/// round-trips the exact double, which keeps bodies byte-stable.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(cfg: &RunConfig, columns: &[&str]) -> Self {
        let mut text = String::new();
        let _ = writeln!(
            text,
            "# schema=1 config_sha256={} seed={}",
            config_hash(cfg),
            cfg.seed
        );
        let _ = writeln!(text, "{}", columns.join(","));
        Self { text }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match cell {
                Cell::F(v) => {
                    let _ = write!(self.text, "{v}");
                }
                Cell::I(v) => {
                    let _ = write!(self.text, "{v}");
                }
                Cell::B(v) => {
                    let _ = write!(self.text, "{v}");
                }
            }
        }
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

pub enum Cell {
    F(f64),
    I(i64),
    B(bool),
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}
