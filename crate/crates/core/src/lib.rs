//! Steady-state genetic algorithm with variable-length bitstring genomes,
//! genome-encoded mutation rates, tournament selection, and an era-wise
//! drifting target, plus an experiment harness for parameter sweeps.

pub mod bitgenome;
pub mod bits;
pub mod config;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod io;
pub mod metrics;
pub mod rng;

pub use bitgenome::{decode_mutation_rate, phenotype, random_genome, Genome};
pub use bits::BitString;
pub use config::SimConfig;
pub use engine::{run, run_observed, Observer, Population, SimState, Target};
pub use error::{Error, Result};
pub use metrics::{aggregate_runs, AggregateResult, EraRecord, MetricsSample, RunResult};

/// Crate version, echoed into CSV metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
