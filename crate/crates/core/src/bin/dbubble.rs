use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use double_bubble::cli::{execute, CommandRequest, ExitStatus};

fn main() -> ExitCode {
    let request = match CommandRequest::try_parse() {
        Ok(r) => r,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                ExitStatus::Validation.code()
            } else {
                0
            });
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let report = execute(&request, &mut out);
    let _ = out.flush();
    if !report.summary.is_empty() {
        eprintln!("{}", report.summary);
    }
    for path in &report.artifacts {
        eprintln!("wrote {}", path.display());
    }
    ExitCode::from(report.exit.code())
}
