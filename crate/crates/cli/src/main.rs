use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tfdlab::{load_config, CliError, Overrides};

#[derive(Parser)]
#[command(
    name = "tfdlab",
    version,
    about = "Thermofield-double fidelity dynamics of chaotic spectra under energy dephasing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dephased SYK ensemble: observable curves per gamma plus times.csv
    Syk(RunArgs),
    /// GUE form factor: Monte Carlo vs the analytic finite-d/asymptotic forms
    Gue(RunArgs),
    /// Characteristic times swept over the n_list of Majorana counts
    Times(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config file)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write SVG quick-look plots
    #[arg(long)]
    plot: bool,
    /// Worker thread count (overrides TFDLAB_THREADS and the config file)
    #[arg(long)]
    threads: Option<usize>,
}

fn run(cmd: &Command) -> Result<(), CliError> {
    let (args, f): (&RunArgs, fn(&tfdlab::RunConfig) -> Result<(), CliError>) = match cmd {
        Command::Syk(a) => (a, tfdlab::run_syk),
        Command::Gue(a) => (a, tfdlab::run_gue),
        Command::Times(a) => (a, tfdlab::run_times),
    };
    let overrides = Overrides {
        out_dir: args.out.clone(),
        plot: args.plot,
        threads: args.threads,
    };
    let cfg = load_config(&args.config, &overrides)?;
    f(&cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tfdlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
