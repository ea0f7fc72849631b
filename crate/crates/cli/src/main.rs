use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use neim_cli::{cmd_report, cmd_snapshots, cmd_train, Experiment, RunConfig};

#[derive(Parser)]
#[command(name = "neim", version, about = "Hyper-reduction experiments on 1-D finite-difference problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the full problem at every training parameter and write the snapshot CSV.
    Snapshots(Common),
    /// Build the POD basis, DEIM and the neural expansion from the snapshots.
    Train(Common),
    /// Evaluate the trained surrogates over the test sweep.
    Report(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,
    /// JSON file overriding configuration fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also train the constant-vector twin of the expansion.
    #[arg(long)]
    exact_neim: bool,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let fallback = self.experiment.unwrap_or(Experiment::Exp1);
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path, fallback)?,
            None => RunConfig::defaults(fallback),
        };
        if let Some(e) = self.experiment {
            if e != cfg.experiment {
                bail!("--experiment {} conflicts with the configuration file ({})", e.name(), cfg.experiment.name());
            }
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        cfg.exact_mode |= self.exact_neim;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Snapshots(c) => {
            let path = cmd_snapshots(&c.resolve()?)?;
            println!("wrote {}", path.display());
        }
        Command::Train(c) => {
            let cfg = c.resolve()?;
            let trained = cmd_train(&cfg)?;
            for (name, model) in [("neim", &trained.file.neim), ("neim_exact", &trained.file.neim_exact)] {
                if let Some(m) = model {
                    let last = m.log().max_errors().last().copied().unwrap_or(0.0);
                    println!("{name}: {} modes, final max error {last:e}, stopped by {:?}", m.num_modes(), m.log().termination);
                }
            }
            println!("wrote {}", cfg.model_path().display());
        }
        Command::Report(c) => {
            let cfg = c.resolve()?;
            let report = cmd_report(&cfg)?;
            for row in &report.summary {
                println!("{:<10} {:>3} {:e}", row.method, row.mode_count, row.avg_abs_error);
            }
            println!("wrote {}", cfg.errors_path().display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
