//! `negcert`: simulate homodyne data, turn it into characteristic-function
//! constraints, certify a lower bound on Wigner negativity, reconstruct the
//! optimal Wigner function and evaluate the witness.
//!
//! Settings come from one JSON file (`--config`); command-line flags
//! override the matching keys, and the effective configuration is embedded
//! in every output file.
//!
//! Exit codes: 0 certified, 10 no certification, 20 positive bound with a
//! large certificate residual, above 20 on errors.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

/// Exit code for command-line misuse.
const EXIT_USAGE: u8 = 64;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = commands::configure_threads() {
        eprintln!("negcert: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    match commands::dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("negcert: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
