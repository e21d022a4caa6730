use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use recspec_cli::{execute, Cli, RunConfig};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // help and version requests are not errors
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match RunConfig::try_from(cli).and_then(|config| execute(&config)) {
        Ok(report) => {
            let _ = std::io::stdout().write_all(report.output.as_bytes());
            ExitCode::from(report.exit_code())
        }
        Err(e) => {
            eprintln!("recspec: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
