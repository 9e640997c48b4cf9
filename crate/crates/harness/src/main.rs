use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use platelab_harness::output::write_atomic;
use platelab_harness::{run_recon, run_sweep, run_synth, run_timesim, run_verify, ExperimentConfig, HarnessError};

/// Forward, time-domain and inverse experiments for the damped plate equation.
///
/// Exit codes: 0 success, 1 validation error, 2 oracle failure, 3 numerical
/// guard abort.
#[derive(Parser)]
#[command(name = "platelab", version)]
struct Cli {
    /// Experiment configuration (JSON); built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; falls back to the config's output_dir, then ./platelab-out.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overwrite an existing dataset.
    #[arg(long, global = true)]
    force: bool,
    /// Worker threads for the data-parallel kernels.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Replace the config's seed list with this single seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize boundary data and store it as a dataset.
    Synth,
    /// Reconstruct the source from a stored dataset.
    Recon {
        /// Dataset directory; defaults to the output directory.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Time-domain decay, energy and observability runs.
    Timesim,
    /// Stability sweep over damping, band limit, noise and seed.
    Sweep,
    /// Run the oracle suite and print a JSON report.
    Verify,
}

fn set_threads(n: usize) -> Result<(), HarnessError> {
    if n == 0 {
        return Err(HarnessError::Config("--threads must be positive".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    log::warn!("built without the parallel feature; --threads {n} ignored");
    Ok(())
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    if let Some(n) = cli.threads {
        set_threads(n)?;
    }
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seeds = vec![s];
    }
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("platelab-out"));
    match cli.command {
        Command::Synth => {
            let m = run_synth(&cfg, &out, cli.force)?;
            println!(
                "wrote {} frequencies x {} points to {}",
                m.frequencies.len(),
                m.geometry.n_sphere,
                out.display()
            );
        }
        Command::Recon { dataset } => {
            let dir = dataset.unwrap_or_else(|| out.clone());
            let s = run_recon(&dir, &cfg, &out)?;
            println!("{}", serde_json::to_string(&s).expect("summary serializes"));
        }
        Command::Timesim => {
            let s = run_timesim(&cfg, &out)?;
            println!(
                "{} decay series, {} energy rows, {} observability rows in {}",
                s.decay.len(),
                s.energy.len(),
                s.observability.len(),
                out.join("results").display()
            );
        }
        Command::Sweep => {
            let s = run_sweep(&cfg, &out)?;
            let failed = s.rows.iter().filter(|r| r.outcome.is_err()).count();
            println!(
                "{} cells ({failed} failed), trends {}",
                s.rows.len(),
                if s.all_trends_pass() { "pass" } else { "not all pass" }
            );
        }
        Command::Verify => {
            let report = run_verify()?;
            let json = report.to_json();
            print!("{json}");
            if cli.out.is_some() {
                write_atomic(&Path::new(&out).join("results").join("verify.json"), json.as_bytes())?;
            }
            if !report.all_pass() {
                return Err(HarnessError::Oracle(report.failures().join(", ")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
