//! Expectations embedded in a document as `#! <command> <args> -> <verdict>`.
//!
//! The command line is parsed like a normal invocation with the document
//! inserted as its first argument, and the expected text is compared with
//! the command's verdict.

use std::fmt::Write;
use std::path::Path;

use clap::Parser;
use recspec::syntax::Document;

use crate::{commands, CliError, Cli, Report, RunConfig};

pub fn run(path: &Path) -> Result<Report, CliError> {
    let text = crate::read(path)?;
    let doc = crate::parse(path, &text)?;
    let mut out = String::new();
    let (mut met, mut total) = (0, 0);
    for (i, line) in text.lines().enumerate() {
        let Some(directive) = line.trim_start().strip_prefix("#!") else {
            continue;
        };
        let directive = directive.trim();
        total += 1;
        let problem = match check(path, &doc, directive) {
            Ok((expected, got)) if expected == got => None,
            Ok((_, got)) => Some(format!("got `{got}`")),
            Err(e) => Some(format!("error: {e}")),
        };
        match problem {
            None => {
                met += 1;
                writeln!(out, "ok    line {}: {directive}", i + 1)
            }
            Some(p) => writeln!(out, "FAIL  line {}: {directive} ({p})", i + 1),
        }
        .expect("writing to a string");
    }
    writeln!(out, "{met} of {total} expectations met").expect("writing to a string");
    let verdict = format!("{met}/{total}");
    Ok(if met == total {
        Report::success(out, verdict)
    } else {
        Report::fails(out, verdict)
    })
}

/// Runs one directive, returning the expected and the actual verdict.
fn check(path: &Path, doc: &Document, directive: &str) -> Result<(String, String), CliError> {
    let (command, expected) = directive
        .rsplit_once("->")
        .ok_or_else(|| CliError::Usage("expected `<command> <args> -> <verdict>`".into()))?;
    let mut words = command.split_whitespace();
    let name = words.next().ok_or_else(|| CliError::Usage("missing command".into()))?;
    let mut argv = vec!["recspec".to_string(), name.to_string()];
    if name != "universe" {
        argv.push(path.display().to_string());
    }
    argv.extend(words.map(str::to_string));
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.kind().to_string()))?;
    let config = RunConfig::try_from(cli)?;
    let report = commands::run(&config, doc)?;
    Ok((expected.trim().to_string(), report.verdict))
}
