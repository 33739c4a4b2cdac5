use std::process::ExitCode;

use clap::Parser;
use hroots_cli::{error_json, run, Cli, JobSpec, EXIT_OK, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Help and version are not errors.
            if !e.use_stderr() {
                print!("{e}");
                return ExitCode::from(EXIT_OK as u8);
            }
            eprint!("{}", error_json("usage", e.to_string().trim()));
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let job = match JobSpec::from_cli(cli) {
        Ok(j) => j,
        Err(m) => {
            eprint!("{}", error_json("usage", &m));
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let out = run(&job, &mut std::io::stdin().lock());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    ExitCode::from(out.code as u8)
}
