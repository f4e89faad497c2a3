use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pvstab_cli::commands::DEFAULT_SEED;
use pvstab_cli::{cmd_classify, cmd_modes, cmd_roots, cmd_sweep, cmd_validate, parse_scenario, CliError, Outcome};

/// Stability analysis of plasma-vacuum interfaces.
#[derive(Debug, Parser)]
#[command(name = "pvstab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Scenario file with [state], [sweep] and [analysis] blocks.
    scenario: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the random states drawn by `validate`.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form verdict per state, as JSON lines.
    Classify(Common),
    /// Direction scan and located unstable roots, as CSV.
    Roots(Common),
    /// Growing mode sequences at the most unstable root, as JSON lines.
    Modes(Common),
    /// Verdict map over the [sweep] grid, as CSV.
    Sweep(Common),
    /// Criterion against numerics on random states, as JSON lines.
    Validate(Common),
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let (Command::Classify(c) | Command::Roots(c) | Command::Modes(c) | Command::Sweep(c) | Command::Validate(c)) =
        &cli.command;
    if c.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(c.jobs)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let scenario = parse_scenario(&c.scenario)?;
    let mut out: Box<dyn Write> = match &c.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let outcome = match &cli.command {
        Command::Classify(_) => cmd_classify(&scenario, &mut out),
        Command::Roots(_) => cmd_roots(&scenario, &mut out),
        Command::Modes(_) => cmd_modes(&scenario, &mut out),
        Command::Sweep(_) => cmd_sweep(&scenario, &mut out),
        Command::Validate(_) => cmd_validate(&scenario, c.seed, &mut out),
    }?;
    out.flush()?;
    Ok(outcome)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => {
            eprintln!("pvstab: {}", outcome.message);
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("pvstab: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
