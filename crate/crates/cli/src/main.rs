use std::process::ExitCode;

use clap::Parser;
use commfolio_cli::args::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = cli.flags.resolve().and_then(|cfg| execute(cli.command, &cfg));
    match outcome {
        Ok(reports) => {
            for r in reports {
                println!("{}", r.summary());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
