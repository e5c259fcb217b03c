use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use udar::runner::{self, BatchOptions, RunOptions, SweepAxis};

#[derive(Parser)]
#[command(name = "udar", version, about = "Bistatic OFDM micro-Doppler drone simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario file.
    Simulate {
        scenario: PathBuf,
        /// Output directory (also UDAR_OUTPUT_DIR).
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Run a sweep over a scenario and write a manifest.
    Batch {
        scenario: PathBuf,
        /// `key=start:stop:step` or `key=v0,v1,...`; repeatable.
        #[arg(long = "sweep")]
        sweeps: Vec<String>,
        /// Concurrent items (also UDAR_WORKERS).
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Signature metrics of an I/Q file, as JSON on stdout.
    Metrics { iqfile: PathBuf },
    /// Range-Doppler map of an I/Q file.
    Rdmap {
        iqfile: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write a CSV next to the map.
        #[arg(long)]
        csv: bool,
    },
    /// Check a scenario without simulating.
    Validate { scenario: PathBuf },
}

fn run(cli: Cli) -> udar::Result<()> {
    match cli.command {
        Command::Simulate { scenario, output_dir } => {
            let out = runner::run_scenario(&scenario, &RunOptions { output_dir }.with_env())?;
            for f in out.files() {
                println!("{}", f.display());
            }
        }
        Command::Batch { scenario, sweeps, workers, output_dir } => {
            let sweeps = sweeps.iter().map(|s| SweepAxis::parse_arg(s)).collect::<udar::Result<_>>()?;
            let opts = BatchOptions { workers, output_dir, sweeps }.with_env()?;
            let m = runner::batch_generate(&scenario, &opts)?;
            println!("{} items, {} failed", m.items.len(), m.failed.len());
            for item in m.items.iter().filter(|i| !i.ok) {
                eprintln!("item {}: {}", item.index, item.error.as_deref().unwrap_or("failed"));
            }
            if !m.failed.is_empty() {
                return Err(udar::Error::InvalidConfig(format!("{} batch item(s) failed", m.failed.len())));
            }
        }
        Command::Metrics { iqfile } => {
            println!("{}", runner::metrics_to_json(&runner::metrics_from_iq(&iqfile)?)?);
        }
        Command::Rdmap { iqfile, output, csv } => {
            for f in runner::rdmap_from_iq(&iqfile, output.as_deref(), csv)? {
                println!("{}", f.display());
            }
        }
        Command::Validate { scenario } => {
            let s = runner::validate_scenario(&scenario)?;
            println!(
                "ok: {} propeller(s), range bin {:.4} m, Doppler bin {:.3} Hz, unambiguous Doppler {:.1} Hz",
                s.n_propellers, s.range_bin_m, s.doppler_bin_hz, s.unambiguous_doppler_hz
            );
            for w in &s.warnings {
                println!("warning: {w}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
