use std::process::ExitCode;

use clap::Parser;

use fracheat_cli::{run, RunConfig};

fn main() -> ExitCode {
    let flags = RunConfig::parse();
    let code = match RunConfig::resolve(flags).map_err(Into::into).and_then(|cfg| run(&cfg)) {
        Ok(out) => {
            if out.passed {
                println!("{}", out.path.display());
            } else {
                eprintln!("checks failed; report: {}", out.path.display());
            }
            out.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
