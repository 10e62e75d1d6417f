use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use cohcast::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = run(&cli, &mut out, &mut err);
    let _ = out.flush();
    ExitCode::from(code)
}
