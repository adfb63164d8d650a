use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use evosim::experiments::{preset, run_experiment, ExperimentSpec, SweepParam};
use evosim::io::{parse_config, render_config, render_plot, write_timeseries};

#[derive(Parser)]
#[command(
    name = "evosim",
    version,
    about = "Evolving mutation rates against a drifting target"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its time series.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one of the eight preset experiments.
    Experiment {
        id: u32,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Multiplies run length and sample interval.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Master seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Replaces the sweep grid.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        /// Overrides the number of runs (per sweep value).
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Sweep one parameter of a config file.
    Sweep {
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        runs: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render CSV columns as an SVG with one panel per column.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        columns: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: &Path) -> anyhow::Result<evosim::SimConfig> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}

fn execute(spec: ExperimentSpec, out: &Path) -> anyhow::Result<()> {
    let result = run_experiment(&spec)?;
    for path in result.write_csv(out)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run { config, out, seed } => {
            let mut cfg = load_config(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let result = evosim::run(&cfg)?;
            let mut metadata = vec![format!("evosim {}", evosim::VERSION), "name = run".into()];
            metadata.extend(render_config(&cfg).lines().map(str::to_string));
            let path = out.join("run_timeseries.csv");
            write_timeseries(&result.samples, &path, &metadata)?;
            println!("{}", path.display());
            eprintln!(
                "births {} final fitness {:.4} genome length {:.4} mutation rate {:.6} last novel birth {}",
                result.births,
                result.final_fitness,
                result.final_genome_length,
                result.final_mutation_rate,
                result.last_novel_birth.map_or("-".to_string(), |b| b.to_string()),
            );
        }
        Command::Experiment {
            id,
            out,
            scale,
            seed,
            values,
            runs,
        } => {
            let Ok(id) = u8::try_from(id) else {
                bail!("experiment id must be 1..=8, got {id}");
            };
            let mut spec = preset(id)?.scaled(scale)?.with_seed(seed);
            if let Some(values) = values {
                spec = spec.with_values(values)?;
            }
            if let Some(runs) = runs {
                spec = spec.with_runs(runs);
            }
            execute(spec, &out)?;
        }
        Command::Sweep {
            param,
            values,
            config,
            runs,
            out,
        } => {
            let param: SweepParam = param.parse()?;
            let cfg = load_config(&config)?;
            execute(ExperimentSpec::custom_sweep(cfg, param, values, runs), &out)?;
        }
        Command::Plot { csv, columns, out } => {
            let columns: Vec<&str> = columns.iter().map(String::as_str).collect();
            render_plot(&csv, &columns, &out)?;
            println!("{}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
