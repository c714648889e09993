//! Command-line front end: `describe`, `tables` and `sweep`.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use pscm::sim::{
    self, describe, planned_rate, run_sweep_with, shaping_table, write_results, ExperimentConfig,
};

#[derive(Parser)]
#[command(
    name = "pscm",
    version,
    about = "Probabilistically shaped QAM link-level simulator: enumerative sphere shaping, \
             LDPC coding, prior-aware demapping and AWGN Monte Carlo BLER sweeps"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the solved code-block layout, rates, shaping probabilities and
    /// constellation table for a config
    Describe {
        /// JSON experiment config
        #[arg(long)]
        config: PathBuf,
    },
    /// Emit the ESS amplitude-probability tables over a k_sh grid
    Tables {
        /// QAM order (16, 64 or 256)
        #[arg(long, default_value_t = 16)]
        order: usize,
        /// Shaper output length in amplitude bits (default: 256 for QAM-16,
        /// 1024 for QAM-64)
        #[arg(long = "n-sh")]
        n_sh: Option<usize>,
        /// Comma-separated k_sh values (default: the published grid)
        #[arg(long = "k-sh", value_delimiter = ',')]
        k_sh: Vec<usize>,
    },
    /// Run the Monte Carlo BLER sweep described by a JSON config
    Sweep {
        /// JSON experiment config
        #[arg(long)]
        config: PathBuf,
        /// Override the config's master seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's worker count
        #[arg(long)]
        workers: Option<usize>,
        /// Output CSV path (JSON sidecar lands next to it)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("cannot parse {}: {e}", path.display()))
}

fn run() -> Result<(), String> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Describe { config } => {
            let cfg = load_config(&config)?;
            print!("{}", describe(&cfg).map_err(|e| e.to_string())?);
        }
        Cmd::Tables { order, n_sh, k_sh } => {
            let n_sh = n_sh.unwrap_or(match order {
                64 => 1024,
                _ => 256,
            });
            let k_list: Vec<usize> = if k_sh.is_empty() {
                match order {
                    64 => vec![300, 400, 500, 600, 700, 800, 900, 1000, 1024],
                    _ => vec![40, 80, 120, 160, 200, 240, 256],
                }
            } else {
                k_sh
            };
            print!(
                "{}",
                shaping_table(order, n_sh, &k_list).map_err(|e| e.to_string())?
            );
        }
        Cmd::Sweep {
            config,
            seed,
            workers,
            out,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            if let Some(o) = out {
                cfg.out = Some(o);
            }
            let out_path = cfg.out.clone().unwrap_or_else(|| PathBuf::from("results.csv"));
            let rate = planned_rate(&cfg).map_err(|e| e.to_string())?;
            eprintln!(
                "pscm sweep: mode={:?} R={rate} seed={} workers={} -> {}",
                cfg.mode,
                cfg.seed,
                cfg.workers,
                out_path.display()
            );
            let result = run_sweep_with(&cfg, |rec| {
                eprintln!(
                    "  ebno={:>6.2} dB  bler={:.3e} [{:.3e}, {:.3e}]  trials={}  ({:.1}s)",
                    rec.ebno_db, rec.bler, rec.ci_lo, rec.ci_hi, rec.trials, rec.wall_time_s
                );
            })
            .map_err(|e| e.to_string())?;
            match result.ebno_at_10pct_bler {
                Some(x) => eprintln!("  Eb/N0 at 10% BLER: {x:.3} dB"),
                None => eprintln!("  Eb/N0 at 10% BLER: not bracketed by the grid"),
            }
            write_results(&result.records, &out_path, &cfg).map_err(|e| e.to_string())?;
            println!("{}", sim::records_to_csv(&result.records).trim_end());
        }
    }
    Ok(())
}

fn main() {
    if let Err(message) = run() {
        eprintln!("error: {message}");
        std::process::exit(1);
    }
}
