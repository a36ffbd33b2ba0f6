use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kslab::config::Mode;
use kslab::{run, Overrides};

/// Dynamical entropy of classical and finite-dimensional quantum systems.
#[derive(Parser)]
#[command(name = "kslab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report.json / report.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the search seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides k_max from the config.
    #[arg(long)]
    kmax: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Optional config (seed and tolerance overrides are honored).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy sequence of a classical system (fixed partition or search).
    Classical(RunArgs),
    /// Multiplicity-free quantum pipeline (fixed family or search).
    QuantumMf(RunArgs),
    /// General state-space pipeline (explicit measure/partition or search).
    QuantumGeneral(RunArgs),
    /// State-space pipeline over all atomic barycentric measures.
    HPrime(RunArgs),
    /// Closed-form entropy of a classical system.
    Oracle(RunArgs),
    /// Runs the invariant ledger.
    Verify(VerifyArgs),
}

fn main() -> ExitCode {
    kslab::init_thread_pool();
    let cli = Cli::parse();
    let (mode, config, overrides) = match cli.command {
        Command::Classical(a) => (Mode::Classical, Some(a.config), args_overrides(a.out, a.seed, a.kmax)),
        Command::QuantumMf(a) => (Mode::QuantumMf, Some(a.config), args_overrides(a.out, a.seed, a.kmax)),
        Command::QuantumGeneral(a) => (Mode::QuantumGeneral, Some(a.config), args_overrides(a.out, a.seed, a.kmax)),
        Command::HPrime(a) => (Mode::HPrime, Some(a.config), args_overrides(a.out, a.seed, a.kmax)),
        Command::Oracle(a) => (Mode::Oracle, Some(a.config), args_overrides(a.out, a.seed, a.kmax)),
        Command::Verify(a) => (Mode::Verify, a.config, args_overrides(a.out, a.seed, None)),
    };

    let result = match config {
        Some(path) => run(mode, &path, &overrides),
        None => run_verify_without_config(&overrides),
    };
    match result {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn args_overrides(out: Option<PathBuf>, seed: Option<u64>, k_max: Option<usize>) -> Overrides {
    Overrides { out, seed, k_max }
}

fn run_verify_without_config(overrides: &Overrides) -> anyhow::Result<kslab::Outcome> {
    let seed = overrides.seed.unwrap_or(0);
    let tol = kslab_core::Tolerances::DEFAULT;
    let rows = kslab_core::verify::run_all(seed, &tol);
    print!("{}", kslab_core::verify::render_ledger(&rows));
    if let Some(dir) = &overrides.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(
            dir.join("verify.json"),
            serde_json::to_string_pretty(&rows)? + "\n",
        )?;
    }
    if rows.iter().all(|r| r.pass) {
        Ok(kslab::Outcome::Success)
    } else {
        anyhow::bail!(
            "{} invariant rows failed",
            rows.iter().filter(|r| !r.pass).count()
        )
    }
}
