use clap::Parser;
use swarm_sacrifice_cli::{run_cli, Cli};

fn main() -> std::process::ExitCode {
    match run_cli(Cli::parse()) {
        Ok(outcome) => {
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            for line in &outcome.summary {
                println!("{line}");
            }
            std::process::ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::from(2)
        }
    }
}
