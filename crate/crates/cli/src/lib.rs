//! Command-line front end: argument handling, document loading, output
//! formatting and the expectation runner for annotated documents.

pub mod commands;
pub mod config;
pub mod corpus;
pub mod render;

use std::path::Path;

use recspec::syntax::{parse_document, Document};
use thiserror::Error;

pub use config::{Cli, Command, Format, RunConfig};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Semantic(String),
}

impl CliError {
    /// 1 for input that cannot be read or parsed, 2 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Parse(_) | CliError::Usage(_) => 1,
            CliError::Semantic(_) => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    /// The property under test failed; the output says why.
    Fails,
}

/// What a command prints, plus a short verdict such as `states 1` or
/// `holds` that annotated documents are checked against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub output: String,
    pub verdict: String,
    pub status: Status,
}

impl Report {
    pub fn success(output: impl Into<String>, verdict: impl Into<String>) -> Report {
        Report {
            output: output.into(),
            verdict: verdict.into(),
            status: Status::Success,
        }
    }

    pub fn fails(output: impl Into<String>, verdict: impl Into<String>) -> Report {
        Report {
            status: Status::Fails,
            ..Report::success(output, verdict)
        }
    }

    pub fn is_success(&self) -> bool {
        self.status == Status::Success
    }

    pub fn exit_code(&self) -> u8 {
        match self.status {
            Status::Success => 0,
            Status::Fails => 3,
        }
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn parse(path: &Path, text: &str) -> Result<Document, CliError> {
    parse_document(text).map_err(|e| CliError::Parse(format!("{}:{e}", path.display())))
}

pub fn load(path: &Path) -> Result<Document, CliError> {
    parse(path, &read(path)?)
}

pub fn execute(config: &RunConfig) -> Result<Report, CliError> {
    match &config.command {
        Command::Universe => commands::run(config, &Document::default()),
        Command::Corpus { document } => corpus::run(document),
        _ => {
            let path = config.input().expect("every other command reads a document");
            commands::run(config, &load(path)?)
        }
    }
}
