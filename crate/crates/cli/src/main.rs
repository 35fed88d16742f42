use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hyperdisp_cli::{execute, write_outputs, CliError, Command, ExperimentConfig, RunOptions, EXIT_NON_CONVERGED};

#[derive(Parser)]
#[command(name = "hyperdisp", version, about = "Dispersion experiments for chains of semiclassical Fourier integral operators")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized steps; overrides `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Record wall-clock time per row. Output is then no longer reproducible.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Plane-wave residuals of the leading-order ansatz.
    Propagate,
    /// Chain norms against the trivial and dispersion bounds.
    Norm,
    /// Momentum-block decomposition and the Cotlar-Stein constant.
    Cotlar,
    /// All of the above in one results file.
    Sweep,
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Validation("--config PATH is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.threads == Some(0) {
        return Err(CliError::Validation("--threads must be at least 1".into()));
    }
    let command = match cli.command {
        Cmd::Propagate => Command::Propagate,
        Cmd::Norm => Command::Norm,
        Cmd::Cotlar => Command::Cotlar,
        Cmd::Sweep => Command::Sweep,
    };
    let opts = RunOptions {
        threads: cli.threads,
        timing: cli.timing,
    };
    let out = execute(&cfg, command, opts)?;
    let dir = cli.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    for file in write_outputs(&cfg, command, &out, &dir)? {
        println!("{}", file.display());
    }
    let stalled = out.non_converged();
    if stalled > 0 {
        eprintln!("warning: {stalled} rows did not converge (see the `converged` column)");
        return Ok(EXIT_NON_CONVERGED);
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
