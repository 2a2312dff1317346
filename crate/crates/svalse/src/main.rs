use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use svalse::commands::{cmd_benchmark, cmd_estimate, cmd_simulate, EstimateOptions, SNAPSHOTS_FILE};
use svalse::config::{Preset, RunConfig};
use svalse::{CliError, Result};

#[derive(Parser)]
#[command(name = "svalse", version, about = "Gridless sequential Bayesian DOA estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write snapshots.csv and truth.csv for the configured scenario.
    Simulate {
        #[arg(short, long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(short, long)]
        out_dir: Option<PathBuf>,
    },
    /// Estimate DOAs from a snapshot file and write tracks.csv.
    Estimate {
        #[arg(short, long)]
        config: PathBuf,
        /// Snapshot CSV; defaults to `scenario.snapshots`, then `<out_dir>/snapshots.csv`.
        #[arg(short, long)]
        input: Option<PathBuf>,
        /// Estimate every snapshot on its own instead of sequentially.
        #[arg(long)]
        no_sequential: bool,
        /// Also write doa.svg (DOA vs time over a beamforming heatmap).
        #[arg(long)]
        plot: bool,
        /// Truth CSV to overlay on the plot.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(short, long)]
        out_dir: Option<PathBuf>,
    },
    /// Monte Carlo comparison of SVALSE and per-step VALSE over the SNR list.
    Benchmark {
        #[arg(short, long)]
        config: PathBuf,
        /// Worker threads; 0 uses all cores. Results do not depend on it.
        #[arg(short = 'j', long, default_value_t = 0)]
        threads: usize,
        #[arg(short, long)]
        out_dir: Option<PathBuf>,
    },
    /// Print a canned configuration (fig4, fig6 or scenario1).
    Preset {
        #[arg(value_parser = parse_preset)]
        name: Preset,
    },
}

fn parse_preset(s: &str) -> std::result::Result<Preset, String> {
    match s {
        "fig4" => Ok(Preset::Fig4),
        "fig6" => Ok(Preset::Fig6),
        "scenario1" => Ok(Preset::Scenario1),
        _ => Err(format!("unknown preset {s:?} (fig4, fig6, scenario1)")),
    }
}

fn load(config: &PathBuf, out_dir: Option<PathBuf>) -> Result<(RunConfig, PathBuf)> {
    let cfg = RunConfig::load(config)?;
    let dir = out_dir.unwrap_or_else(|| cfg.output_dir.clone());
    Ok((cfg, dir))
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, out_dir } => {
            let (cfg, dir) = load(&config, out_dir)?;
            report(&cmd_simulate(&cfg, &dir)?);
        }
        Command::Estimate { config, input, no_sequential, plot, truth, out_dir } => {
            let (cfg, dir) = load(&config, out_dir)?;
            let snapshots = input.or_else(|| cfg.scenario.snapshots.clone()).unwrap_or_else(|| dir.join(SNAPSHOTS_FILE));
            let opts = EstimateOptions { snapshots, sequential: !no_sequential, truth, plot };
            report(&cmd_estimate(&cfg, &opts, &dir)?);
        }
        Command::Benchmark { config, threads, out_dir } => {
            let (cfg, dir) = load(&config, out_dir)?;
            let (out, paths) = cmd_benchmark(&cfg, threads, &dir)?;
            println!("method  snr_db  gospa  dist  miss  false  rmse");
            for r in &out.summary {
                let rmse = r.rmse.map_or("-".to_string(), |v| format!("{v:.3}"));
                println!(
                    "{:<7} {:>6} {:>6.3} {:>5.3} {:>5.3} {:>6.3} {rmse}",
                    r.method.as_str(),
                    r.snr_db,
                    r.gospa.total,
                    r.gospa.dist,
                    r.gospa.miss,
                    r.gospa.false_
                );
            }
            report(&paths);
        }
        Command::Preset { name } => print!("{}", RunConfig::preset(name).to_toml()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(CliError::exit_code(&e) as u8)
        }
    }
}
