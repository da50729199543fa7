use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ahmc::experiment::{compare, run_experiment, ExperimentConfig};
use ahmc::Result;

/// Hamiltonian Monte Carlo with online tuning of step size and trajectory length.
#[derive(Parser)]
#[command(name = "ahmc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Number of independent chains (overrides the config).
        #[arg(long)]
        chains: Option<usize>,
        /// Master seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; 0 uses every core.
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate ESS per leapfrog step across finished runs.
    Compare {
        #[arg(required = true, num_args = 2..)]
        dirs: Vec<PathBuf>,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            chains,
            seed,
            workers,
            out,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(c) = chains {
                cfg.chains = c;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let base = config.parent().unwrap_or(Path::new("."));
            let out_dir = out
                .or_else(|| cfg.output.as_ref().map(|o| base.join(o)))
                .unwrap_or_else(|| PathBuf::from("ahmc_out"));
            cfg.output = None;
            let outcome = run_experiment(&cfg, base, &out_dir)?;
            for c in &outcome.chains {
                println!(
                    "chain {}: median ESS/L {} acceptance {}",
                    c.chain,
                    c.report.ess_per_leapfrog.median,
                    c.report.acceptance_rate.unwrap_or(f64::NAN)
                );
            }
            println!("wrote {}", outcome.out_dir.display());
            Ok(())
        }
        Command::Compare { dirs, out } => {
            let table = compare(&dirs)?.to_csv();
            match out {
                Some(path) => std::fs::write(&path, table).map_err(|e| ahmc::Error::io(&path, e))?,
                None => print!("{table}"),
            }
            Ok(())
        }
    }
}
