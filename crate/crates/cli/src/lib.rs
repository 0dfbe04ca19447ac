//! Batch commands and the local session service behind the `patrolscope` binary.

pub mod commands;
pub mod server;

use std::fmt;
use std::path::{Path, PathBuf};

use patrolscope_core::Error;
use serde_json::{json, Value};

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_ANALYSIS: i32 = 3;

/// Anything that stops a command.
#[derive(Debug)]
pub enum Failure {
    Io { path: PathBuf, message: String },
    Core(Error),
}

impl Failure {
    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        Failure::Io {
            path: path.to_owned(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Io { .. } => EXIT_IO,
            Failure::Core(e) if e.is_validation() => EXIT_VALIDATION,
            Failure::Core(_) => EXIT_ANALYSIS,
        }
    }

    pub fn diagnostic(&self) -> Value {
        let mut d = match self {
            Failure::Io { path, message } => json!({
                "code": "Io",
                "message": message,
                "path": path.display().to_string(),
            }),
            Failure::Core(e) => e.diagnostic(),
        };
        d.as_object_mut()
            .expect("diagnostics are objects")
            .insert("level".into(), json!("error"));
        d
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Io { path, message } => write!(f, "{}: {message}", path.display()),
            Failure::Core(e) => e.fmt(f),
        }
    }
}
