use std::io::{self, Write};
use std::process::ExitCode;

use ordnoise_cli::{run, CliError};

fn main() -> ExitCode {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut err = io::stderr();
    match run(std::env::args_os(), &mut out, &mut err) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(e)) if !e.use_stderr() => {
            // --help and --version
            let _ = write!(out, "{e}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let _ = out.flush();
            let _ = writeln!(err, "{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
