//! Population statistics, per-era fitness increase, and cross-run
//! aggregation.

use crate::bitgenome::{decode_mutation_rate, Genome};
use crate::engine::{Population, PopulationStats};
use crate::error::{Error, Result};

/// Population averages at one point of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsSample {
    pub births: u64,
    pub mean_fitness: f64,
    pub mean_genome_length: f64,
    pub mean_mutation_rate: f64,
    /// Absent when no era has been observed for this sample.
    pub mean_fitness_increase: Option<f64>,
    pub sd_fitness: f64,
    pub sd_genome_length: f64,
    pub sd_mutation_rate: f64,
}

impl MetricsSample {
    pub fn from_stats(births: u64, stats: &PopulationStats, increase: Option<f64>) -> Self {
        MetricsSample {
            births,
            mean_fitness: stats.mean_fitness,
            mean_genome_length: stats.mean_genome_length,
            mean_mutation_rate: stats.mean_mutation_rate,
            mean_fitness_increase: increase,
            sd_fitness: stats.sd_fitness,
            sd_genome_length: stats.sd_genome_length,
            sd_mutation_rate: stats.sd_mutation_rate,
        }
    }
}

/// Mean population fitness at the start and end of one era. The start is
/// measured after the re-evaluation that opened the era.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EraRecord {
    /// 1-based.
    pub era_index: u64,
    pub fitness_at_start: f64,
    pub fitness_at_end: f64,
}

impl EraRecord {
    pub fn increase(&self) -> f64 {
        era_fitness_increase(self)
    }
}

/// Everything a single run reports.
#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub run_length: u64,
    pub sample_interval: u64,
    /// Children actually born; below `run_length` only for early-stopped runs.
    pub births: u64,
    pub samples: Vec<MetricsSample>,
    pub era_records: Vec<EraRecord>,
    pub last_novel_birth: Option<u64>,
    pub final_fitness: f64,
    pub final_mutation_rate: f64,
    pub final_genome_length: f64,
}

impl RunResult {
    /// Sample births expected for a complete run: 0, every interval, and
    /// `run_length` itself.
    pub fn full_grid(run_length: u64, sample_interval: u64) -> Vec<u64> {
        let mut grid: Vec<u64> = (0..=run_length).step_by(sample_interval as usize).collect();
        if grid.last() != Some(&run_length) {
            grid.push(run_length);
        }
        grid
    }

    /// Samples on the complete grid. An early-stopped run has its final
    /// sample carried forward over the births it never reached.
    pub fn padded_samples(&self) -> Vec<MetricsSample> {
        let grid = Self::full_grid(self.run_length, self.sample_interval);
        if self.births >= self.run_length {
            return self.samples.clone();
        }
        let last = self
            .samples
            .last()
            .expect("runs always sample birth 0")
            .clone();
        let mut out: Vec<MetricsSample> = self
            .samples
            .iter()
            .filter(|s| s.births % self.sample_interval == 0)
            .cloned()
            .collect();
        let reached = out.len();
        out.extend(grid[reached..].iter().map(|&births| MetricsSample {
            births,
            ..last.clone()
        }));
        out
    }

    /// `last_novel_birth`, or `run_length` when it never happened.
    pub fn last_novel_or_ceiling(&self) -> u64 {
        self.last_novel_birth.unwrap_or(self.run_length)
    }

    pub fn ended_with_nonzero_rate(&self) -> bool {
        self.last_novel_birth.is_none()
    }
}

/// Arithmetic means of fitness, genome length, and decoded mutation rate
/// over every slot, computed by a direct scan.
pub fn population_means(pop: &Population) -> (f64, f64, f64) {
    let s = population_stats_scan(pop);
    (s.mean_fitness, s.mean_genome_length, s.mean_mutation_rate)
}

/// Two-pass floating-point statistics; the reference for the engine's
/// incremental sums.
pub fn population_stats_scan(pop: &Population) -> PopulationStats {
    let code_length = pop.code_length();
    let n = pop.len() as f64;
    let fit: Vec<f64> = pop.fitnesses().iter().map(|&f| f64::from(f)).collect();
    let len: Vec<f64> = pop.genomes().iter().map(|g| g.len() as f64).collect();
    let rate: Vec<f64> = pop
        .genomes()
        .iter()
        .map(|g| decode_mutation_rate(g, code_length))
        .collect();
    let mean_sd = |xs: &[f64]| {
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
        (m, v.sqrt())
    };
    let (mean_fitness, sd_fitness) = mean_sd(&fit);
    let (mean_genome_length, sd_genome_length) = mean_sd(&len);
    let (mean_mutation_rate, sd_mutation_rate) = mean_sd(&rate);
    PopulationStats {
        mean_fitness,
        mean_genome_length,
        mean_mutation_rate,
        sd_fitness,
        sd_genome_length,
        sd_mutation_rate,
    }
}

/// Increase of the current mean fitness over the mean recorded at the most
/// recent target change.
pub fn fitness_increase_per_birth(
    current_mean_fitness: f64,
    mean_fitness_at_last_change: f64,
) -> f64 {
    current_mean_fitness - mean_fitness_at_last_change
}

pub fn era_fitness_increase(record: &EraRecord) -> f64 {
    record.fitness_at_end - record.fitness_at_start
}

/// Mean era increase over a window of eras; `None` for an empty window.
pub fn window_mean_increase(records: &[EraRecord]) -> Option<f64> {
    if records.is_empty() {
        None
    } else {
        Some(records.iter().map(era_fitness_increase).sum::<f64>() / records.len() as f64)
    }
}

/// Number of phenotype bits: genome length minus the mutation code.
pub fn versatility(g: &Genome, code_length: usize) -> usize {
    g.len() - code_length
}

/// Pointwise means across runs plus summary statistics of their finals.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateResult {
    pub num_runs: usize,
    pub samples: Vec<MetricsSample>,
    pub mean_final_fitness: f64,
    pub mean_final_mutation_rate: f64,
    pub mean_final_genome_length: f64,
    /// Runs that never reached an all-zero mutation rate count as
    /// `run_length`.
    pub mean_last_novel_birth: f64,
    pub fraction_runs_nonzero_rate: f64,
}

/// Averages runs that share a sample grid. Early-stopped runs are compared
/// on their padded grid (see [`RunResult::padded_samples`]).
pub fn aggregate_runs(results: &[RunResult]) -> Result<AggregateResult> {
    if results.is_empty() {
        return Err(Error::InvalidArgument("no runs to aggregate".into()));
    }
    let padded: Vec<Vec<MetricsSample>> = results.iter().map(RunResult::padded_samples).collect();
    let grid: Vec<u64> = padded[0].iter().map(|s| s.births).collect();
    for (i, run) in padded.iter().enumerate().skip(1) {
        if run.len() != grid.len() || run.iter().zip(&grid).any(|(s, &b)| s.births != b) {
            return Err(Error::InvalidArgument(format!(
                "run {i} has a different sample grid than run 0"
            )));
        }
    }

    let n = results.len() as f64;
    let mean_of = |f: &dyn Fn(&MetricsSample) -> f64, k: usize| {
        padded.iter().map(|run| f(&run[k])).sum::<f64>() / n
    };
    let samples = grid
        .iter()
        .enumerate()
        .map(|(k, &births)| {
            let increases: Vec<f64> = padded
                .iter()
                .filter_map(|run| run[k].mean_fitness_increase)
                .collect();
            MetricsSample {
                births,
                mean_fitness: mean_of(&|s| s.mean_fitness, k),
                mean_genome_length: mean_of(&|s| s.mean_genome_length, k),
                mean_mutation_rate: mean_of(&|s| s.mean_mutation_rate, k),
                mean_fitness_increase: (!increases.is_empty())
                    .then(|| increases.iter().sum::<f64>() / increases.len() as f64),
                sd_fitness: mean_of(&|s| s.sd_fitness, k),
                sd_genome_length: mean_of(&|s| s.sd_genome_length, k),
                sd_mutation_rate: mean_of(&|s| s.sd_mutation_rate, k),
            }
        })
        .collect();

    let mean = |f: fn(&RunResult) -> f64| results.iter().map(f).sum::<f64>() / n;
    Ok(AggregateResult {
        num_runs: results.len(),
        samples,
        mean_final_fitness: mean(|r| r.final_fitness),
        mean_final_mutation_rate: mean(|r| r.final_mutation_rate),
        mean_final_genome_length: mean(|r| r.final_genome_length),
        mean_last_novel_birth: mean(|r| r.last_novel_or_ceiling() as f64),
        fraction_runs_nonzero_rate: mean(|r| f64::from(u8::from(r.ended_with_nonzero_rate()))),
    })
}
