//! `samplan`: design, evaluate, simulate and reproduce acceptance-sampling plans.

mod args;
mod commands;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::{Outcome, UsageError, EXIT_USAGE};

fn run(cli: &Cli) -> Result<Outcome, UsageError> {
    match &cli.command {
        Command::Design(a) => commands::design_cmd(a),
        Command::Oc(a) => commands::oc_cmd(a),
        Command::Simulate(a) => commands::simulate_cmd(a),
        Command::Reproduce(a) => commands::reproduce_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let bytes = match output::render(&outcome, cli.format) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: cannot render output: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let mut stderr = std::io::stderr();
    output::write_warnings(&outcome, cli.format, &mut stderr);

    let target = match &cli.command {
        Command::Reproduce(a) => a.output.as_deref(),
        _ => None,
    };
    let written = match target {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| format!("--output {}: {e}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(&bytes).and_then(|()| out.flush()).map_err(|e| format!("cannot write output: {e}"))
        }
    };
    if let Err(msg) = written {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    ExitCode::from(outcome.exit)
}
