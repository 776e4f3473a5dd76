use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hypex::experiments::{self, default_config, ExperimentId};
use hypex::Error;

#[derive(Parser)]
#[command(name = "hypex", about = "ILF controller experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its artifacts.
    Run {
        experiment: String,
        /// key = value overrides
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Print the effective configuration and exit.
        #[arg(long)]
        print_config: bool,
    },
    /// List experiment ids.
    List,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::Io(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run { experiment, config, out, seed, print_config } = cli.command else {
        for id in ExperimentId::ALL {
            println!("{:<26} {}", id.as_str(), id.description());
        }
        return ExitCode::SUCCESS;
    };
    let result = (|| {
        let id: ExperimentId = experiment.parse()?;
        let mut cfg = default_config(id);
        if let Some(path) = &config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            cfg.apply_text(&text)?;
        }
        if let Some(s) = seed {
            if !cfg.contains("seed") {
                return Err(Error::Config(format!("{id} takes no seed")));
            }
            cfg.set("seed", s)?;
        }
        if print_config {
            print!("{}", cfg.to_text());
            return Ok(None);
        }
        let dir = out.join(id.as_str());
        let summary = experiments::run(id, &cfg, &dir)?;
        print!("{}", summary.summary_text());
        println!("artifacts in {}", dir.display());
        Ok(Some(summary.passed()))
    })();
    match result {
        Ok(None) | Ok(Some(true)) => ExitCode::SUCCESS,
        Ok(Some(false)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
