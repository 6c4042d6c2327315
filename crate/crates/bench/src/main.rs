use std::path::PathBuf;
use std::process::ExitCode;

use ale_bench::{emit_csv, parse_config, run_experiment_with_threads, ExperimentKind, Result};
use clap::{Parser, Subcommand};

/// LMS vs PSO adaptive line enhancer experiments.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    /// TOML config with dotted keys; defaults apply to anything omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for CSV and metadata files.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,

    /// Base seed, overriding run.base_seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Seeds per sweep point, overriding run.n_seeds.
    #[arg(long, global = true)]
    seeds: Option<usize>,

    /// Worker threads; 0 uses every core. Does not change the output.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Global best cost per iteration for several swarm sizes.
    ParticleSweep,
    /// LMS residual MSE across step sizes.
    StepSweep,
    /// Residual MSE of both algorithms across SNR.
    MseVsSnr,
    /// BER of both algorithms across SNR with AWGN only.
    BerAwgn,
    /// BER of both algorithms across SNR with nonlinear impairments.
    BerNonlinear,
    /// All five experiments.
    RunAll,
}

impl Command {
    fn kinds(&self) -> Vec<ExperimentKind> {
        match self {
            Command::ParticleSweep => vec![ExperimentKind::ParticleSweep],
            Command::StepSweep => vec![ExperimentKind::StepSweep],
            Command::MseVsSnr => vec![ExperimentKind::MseVsSnr],
            Command::BerAwgn => vec![ExperimentKind::BerAwgn],
            Command::BerNonlinear => vec![ExperimentKind::BerNonlinear],
            Command::RunAll => ExperimentKind::ALL.to_vec(),
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|source| ale_bench::BenchError::Io { path: path.clone(), source })?,
        None => String::new(),
    };
    for kind in cli.command.kinds() {
        let mut spec = parse_config(&text, kind)?;
        if let Some(seed) = cli.seed {
            spec.base_seed = seed;
        }
        if let Some(n) = cli.seeds {
            spec.n_seeds = n;
        }
        spec.validate()?;
        let table = run_experiment_with_threads(&spec, cli.threads)?;
        let path = emit_csv(&table, &cli.out)?;
        eprintln!("{kind}: {} rows -> {}", table.rows.len(), path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
