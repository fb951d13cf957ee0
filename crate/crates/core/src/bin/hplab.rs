//! Command-line front end for the experiment suite.
//!
//! ```text
//! hplab list                                   enumerate experiments
//! hplab run <id> [--config F] [--out D] [--seed N]
//! hplab all [--out D] [--seed N]               run every experiment
//! ```
//!
//! Exit status: 0 when every evaluated criterion passes, 1 when any fails,
//! 2 on configuration or runtime errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hplab::experiments::{
    registry, run_all, run_experiment, write_record_csv, write_record_json, ExperimentConfig,
    ExperimentRecord,
};

#[derive(Parser)]
#[command(
    name = "hplab",
    about = "Numerical experiments on weighted Hardy-space sequence models",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment by id.
    Run {
        /// Experiment id (see `hplab list`).
        id: String,
        /// JSON configuration file (parameter and threshold overrides).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory for the CSV/JSON records.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed override for randomized experiments.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List experiment ids with their formula coverage.
    List,
    /// Run the whole suite in registry order.
    All {
        /// Directory for the per-experiment records and summary.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed override applied to every experiment.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn print_record(r: &ExperimentRecord) {
    println!("== {} ({} ms)", r.experiment, r.wall_ms);
    for c in &r.criteria {
        println!(
            "  [{}] {}: value {:.6e} vs threshold {:.6e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        );
    }
    println!(
        "  => {}",
        if r.pass { "PASS" } else { "FAIL" }
    );
}

fn run() -> Result<bool, Box<dyn std::error::Error>> {
    match Cli::parse().command {
        Command::List => {
            for d in registry() {
                println!("{:16} {}", d.id, d.summary);
                println!("{:16} formulas: {}", "", d.formula_ids.join(", "));
            }
            Ok(true)
        }
        Command::Run {
            id,
            config,
            out,
            seed,
        } => {
            let cfg = match config {
                Some(p) => ExperimentConfig::from_path(&p)?,
                None => ExperimentConfig::default(),
            };
            if let Some(cfg_id) = &cfg.experiment {
                if cfg_id != &id {
                    return Err(format!(
                        "config names experiment `{cfg_id}` but the command line says `{id}`"
                    )
                    .into());
                }
            }
            let seed = seed.or(cfg.seed);
            let out = out.or(cfg.out_dir);
            let record = run_experiment(&id, Some(&cfg.params), seed)?;
            print_record(&record);
            if let Some(dir) = &out {
                let jp = write_record_json(&record, dir)?;
                let cp = write_record_csv(&record, dir)?;
                println!("  wrote {} and {}", jp.display(), cp.display());
            }
            Ok(record.pass)
        }
        Command::All { out, seed } => {
            let records = run_all(out.as_deref(), seed)?;
            for r in &records {
                print_record(r);
            }
            let pass = records.iter().all(|r| r.pass);
            println!(
                "suite: {} of {} experiments pass",
                records.iter().filter(|r| r.pass).count(),
                records.len()
            );
            if let Some(dir) = &out {
                println!("records in {}", dir.display());
            }
            Ok(pass)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
