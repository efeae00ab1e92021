use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "invsq-nls", version, about = "Numerical laboratory for the inverse-square NLS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Output directory; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Evolve even when the coupling is outside the admissible range.
        #[arg(long)]
        override_admissibility: bool,
    },
    /// List the registered experiments.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = invsq_nls::lab::configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(invsq_nls::EXIT_CONFIG);
    }
    match cli.command {
        Command::Run { config, out, override_admissibility } => {
            ExitCode::from(invsq_nls::run_config(&config, out.as_deref(), override_admissibility))
        }
        Command::List => {
            print!("{}", invsq_nls::list());
            ExitCode::SUCCESS
        }
    }
}
