//! Experiment presets, multi-run orchestration, and parameter sweeps.
//!
//! Run `i` of an experiment with master seed `m` uses
//! [`derive_seed`]`(m, i)`. In a sweep the ordinal is global:
//! `value_index * num_runs + run`. Runs execute on a rayon pool capped by
//! `EVOSIM_THREADS` (0 or unset means all available cores) and are merged
//! in ordinal order.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::config::SimConfig;
use crate::engine::run;
use crate::error::{Error, Result};
use crate::io::config_file::render_config;
use crate::io::csv_out::{sweep_csv, timeseries_csv, write_file};
use crate::io::format_real;
use crate::metrics::{aggregate_runs, AggregateResult, RunResult};
use crate::rng::derive_seed;

/// A configuration field that a sweep can vary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    PopSize,
    RunLength,
    EraLength,
    TargetChangeRate,
    TournamentSize,
    MutationCodeLength,
    SampleInterval,
}

impl SweepParam {
    pub const ALL: [SweepParam; 7] = [
        SweepParam::PopSize,
        SweepParam::RunLength,
        SweepParam::EraLength,
        SweepParam::TargetChangeRate,
        SweepParam::TournamentSize,
        SweepParam::MutationCodeLength,
        SweepParam::SampleInterval,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::PopSize => "pop_size",
            SweepParam::RunLength => "run_length",
            SweepParam::EraLength => "era_length",
            SweepParam::TargetChangeRate => "target_change_rate",
            SweepParam::TournamentSize => "tournament_size",
            SweepParam::MutationCodeLength => "mutation_code_length",
            SweepParam::SampleInterval => "sample_interval",
        }
    }

    /// Sets this field of `cfg` to `value` and re-validates.
    pub fn apply(self, cfg: &mut SimConfig, value: f64) -> Result<()> {
        let mut next = cfg.clone();
        self.apply_unchecked(&mut next, value)?;
        next.validate()?;
        *cfg = next;
        Ok(())
    }

    fn apply_unchecked(self, cfg: &mut SimConfig, value: f64) -> Result<()> {
        let whole = || -> Result<u64> {
            if value.fract() == 0.0 && value >= 0.0 && value <= u64::MAX as f64 {
                Ok(value as u64)
            } else {
                Err(Error::InvalidArgument(format!(
                    "{} needs a nonnegative integer, got {value}",
                    self.name()
                )))
            }
        };
        match self {
            SweepParam::PopSize => cfg.pop_size = whole()? as usize,
            SweepParam::RunLength => cfg.run_length = whole()?,
            SweepParam::EraLength => cfg.era_length = whole()?,
            SweepParam::TargetChangeRate => cfg.target_change_rate = value,
            SweepParam::TournamentSize => cfg.tournament_size = whole()? as usize,
            SweepParam::MutationCodeLength => cfg.mutation_code_length = whole()? as usize,
            SweepParam::SampleInterval => cfg.sample_interval = whole()?,
        }
        Ok(())
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        // the population parameter goes by both names
        let s = if s == "population_size" {
            "pop_size"
        } else {
            s
        };
        SweepParam::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown sweep parameter {s:?} (expected one of {})",
                    SweepParam::ALL.map(|p| p.name()).join(", ")
                ))
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

/// A reproducible experiment protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    /// 1 to 8 for the presets, `None` for ad-hoc sweeps.
    pub id: Option<u8>,
    /// `seed` is the master seed.
    pub base_config: SimConfig,
    pub sweep: Option<Sweep>,
    pub num_runs: usize,
    /// Factor already applied to the run length (see [`ExperimentSpec::scaled`]).
    pub scale: f64,
}

fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

/// The protocol of experiment `id` (1 to 8) at full scale.
pub fn preset(id: u8) -> Result<ExperimentSpec> {
    let base = SimConfig::baseline();
    let long = |run_length: u64| SimConfig {
        run_length,
        sample_interval: 10_000,
        ..base.clone()
    };
    let sweep = |param, values| Some(Sweep { param, values });
    let (base_config, sweep, num_runs) = match id {
        1 => (base.clone(), None, 100),
        2 => (long(10_000_000), None, 10),
        3 => (
            SimConfig {
                era_length: 10_000_000,
                target_change_rate: 0.0,
                stop_on_zero_mutation: true,
                ..long(10_000_000)
            },
            None,
            10,
        ),
        4 => (
            long(1_000_000),
            sweep(SweepParam::TargetChangeRate, grid(0.0, 0.2, 0.02)),
            10,
        ),
        5 => (
            long(1_000_000),
            sweep(SweepParam::EraLength, grid(100.0, 1000.0, 100.0)),
            10,
        ),
        6 => (
            long(1_000_000),
            sweep(SweepParam::TournamentSize, grid(100.0, 1000.0, 100.0)),
            10,
        ),
        7 => (
            long(1_000_000),
            sweep(SweepParam::PopSize, grid(1000.0, 3000.0, 250.0)),
            10,
        ),
        8 => (
            long(1_000_000),
            sweep(SweepParam::MutationCodeLength, grid(5.0, 15.0, 1.0)),
            10,
        ),
        other => {
            return Err(Error::InvalidArgument(format!(
                "experiment id must be 1..=8, got {other}"
            )))
        }
    };
    Ok(ExperimentSpec {
        id: Some(id),
        base_config,
        sweep,
        num_runs,
        scale: 1.0,
    })
}

fn scale_count(value: u64, scale: f64) -> u64 {
    ((value as f64 * scale).round() as u64).max(1)
}

impl ExperimentSpec {
    /// Ad-hoc sweep over `param` starting from `base_config`.
    pub fn custom_sweep(
        base_config: SimConfig,
        param: SweepParam,
        values: Vec<f64>,
        num_runs: usize,
    ) -> Self {
        ExperimentSpec {
            id: None,
            base_config,
            sweep: Some(Sweep { param, values }),
            num_runs,
            scale: 1.0,
        }
    }

    /// Multiplies `run_length` and `sample_interval` by `scale` (rounded,
    /// at least 1). An `era_length` tied to `run_length` follows it. The
    /// number of runs is unchanged.
    pub fn scaled(mut self, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "scale must be positive, got {scale}"
            )));
        }
        let cfg = &mut self.base_config;
        let tied = cfg.era_length == cfg.run_length;
        cfg.run_length = scale_count(cfg.run_length, scale);
        cfg.sample_interval = scale_count(cfg.sample_interval, scale);
        if tied {
            cfg.era_length = cfg.run_length;
        }
        cfg.validate()?;
        self.scale *= scale;
        Ok(self)
    }

    pub fn with_seed(mut self, master_seed: u64) -> Self {
        self.base_config.seed = master_seed;
        self
    }

    pub fn with_runs(mut self, num_runs: usize) -> Self {
        self.num_runs = num_runs;
        self
    }

    /// Replaces the sweep grid; an error for presets without a sweep.
    pub fn with_values(mut self, values: Vec<f64>) -> Result<Self> {
        match &mut self.sweep {
            Some(s) => s.values = values,
            None => {
                return Err(Error::InvalidArgument(format!(
                    "{} does not sweep a parameter",
                    self.name()
                )))
            }
        }
        Ok(self)
    }

    pub fn master_seed(&self) -> u64 {
        self.base_config.seed
    }

    /// File-name stem: `experiment3` or `sweep_era_length`.
    pub fn name(&self) -> String {
        match (self.id, &self.sweep) {
            (Some(id), _) => format!("experiment{id}"),
            (None, Some(s)) => format!("sweep_{}", s.param),
            (None, None) => "custom".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_runs == 0 {
            return Err(Error::InvalidArgument("num_runs must be positive".into()));
        }
        self.base_config.validate()?;
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(Error::InvalidArgument("sweep has no values".into()));
            }
            for &v in &s.values {
                s.param.apply(&mut self.base_config.clone(), v)?;
            }
        }
        Ok(())
    }

    /// `#` metadata lines echoed atop every CSV.
    pub fn metadata(&self) -> Vec<String> {
        let mut lines = vec![
            format!("evosim {}", crate::VERSION),
            format!("name = {}", self.name()),
            format!("master_seed = {}", self.master_seed()),
            format!("num_runs = {}", self.num_runs),
            format!("scale = {}", self.scale),
        ];
        if let Some(s) = &self.sweep {
            lines.push(format!("swept_parameter = {}", s.param));
            let values: Vec<String> = s.values.iter().map(|v| format_real(*v)).collect();
            lines.push(format!("sweep_values = {}", values.join(",")));
        }
        lines.extend(render_config(&self.base_config).lines().map(str::to_string));
        lines
    }
}

/// Summary of all runs at one sweep value.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    /// Runs whose rate never hit zero count as `run_length`.
    pub mean_last_novel_birth: f64,
    pub fraction_runs_nonzero_rate: f64,
    pub mean_final_fitness: f64,
    pub mean_final_mutation_rate: f64,
}

impl SweepPoint {
    fn from_aggregate(value: f64, agg: &AggregateResult) -> Self {
        SweepPoint {
            value,
            mean_last_novel_birth: agg.mean_last_novel_birth,
            fraction_runs_nonzero_rate: agg.fraction_runs_nonzero_rate,
            mean_final_fitness: agg.mean_final_fitness,
            mean_final_mutation_rate: agg.mean_final_mutation_rate,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Series {
        runs: Vec<RunResult>,
        aggregate: AggregateResult,
    },
    Sweep {
        points: Vec<SweepPoint>,
        /// `runs[k]` are the runs at sweep value `k`.
        runs: Vec<Vec<RunResult>>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub outcome: Outcome,
}

/// Worker count from `EVOSIM_THREADS`; 0, unset, or unparsable means all
/// available cores.
pub fn thread_count() -> usize {
    std::env::var("EVOSIM_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn run_all(configs: Vec<SimConfig>) -> Result<Vec<RunResult>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .map_err(|e| Error::InvalidState(format!("cannot start worker pool: {e}")))?;
    pool.install(|| configs.par_iter().map(run).collect())
}

/// Executes every run of `spec` and aggregates them.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let master = spec.master_seed();
    let outcome = match &spec.sweep {
        None => {
            let configs = (0..spec.num_runs)
                .map(|i| SimConfig {
                    seed: derive_seed(master, i as u64),
                    ..spec.base_config.clone()
                })
                .collect();
            let runs = run_all(configs)?;
            let aggregate = aggregate_runs(&runs)?;
            Outcome::Series { runs, aggregate }
        }
        Some(sweep) => {
            let mut configs = Vec::with_capacity(sweep.values.len() * spec.num_runs);
            for (k, &value) in sweep.values.iter().enumerate() {
                let mut cfg = spec.base_config.clone();
                sweep.param.apply(&mut cfg, value)?;
                for i in 0..spec.num_runs {
                    let ordinal = (k * spec.num_runs + i) as u64;
                    configs.push(SimConfig {
                        seed: derive_seed(master, ordinal),
                        ..cfg.clone()
                    });
                }
            }
            let mut flat = run_all(configs)?.into_iter();
            let mut points = Vec::with_capacity(sweep.values.len());
            let mut runs = Vec::with_capacity(sweep.values.len());
            for &value in &sweep.values {
                let group: Vec<RunResult> = flat.by_ref().take(spec.num_runs).collect();
                points.push(SweepPoint::from_aggregate(value, &aggregate_runs(&group)?));
                runs.push(group);
            }
            Outcome::Sweep { points, runs }
        }
    };
    Ok(ExperimentResult {
        spec: spec.clone(),
        outcome,
    })
}

/// Runs a sweep and returns only its points.
pub fn sweep(spec: &ExperimentSpec) -> Result<Vec<SweepPoint>> {
    if spec.sweep.is_none() {
        return Err(Error::InvalidArgument(format!(
            "{} has no swept parameter",
            spec.name()
        )));
    }
    match run_experiment(spec)?.outcome {
        Outcome::Sweep { points, .. } => Ok(points),
        Outcome::Series { .. } => unreachable!("sweep specs produce sweep outcomes"),
    }
}

const RUNS_HEADER: &str =
    "run,param_value,seed,births,last_novel_birth,final_fitness,final_genome_length,final_mutation_rate";

fn runs_csv(result: &ExperimentResult, metadata: &[String]) -> String {
    let mut out: String = metadata.iter().map(|l| format!("# {l}\n")).collect();
    out.push_str(RUNS_HEADER);
    out.push('\n');
    let rows: Vec<(Option<f64>, &RunResult)> = match &result.outcome {
        Outcome::Series { runs, .. } => runs.iter().map(|r| (None, r)).collect(),
        Outcome::Sweep { points, runs } => points
            .iter()
            .zip(runs)
            .flat_map(|(p, group)| group.iter().map(move |r| (Some(p.value), r)))
            .collect(),
    };
    for (i, (value, r)) in rows.into_iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            i,
            value.map(format_real).unwrap_or_default(),
            r.seed,
            r.births,
            r.last_novel_birth
                .map(|b| b.to_string())
                .unwrap_or_default(),
            format_real(r.final_fitness),
            format_real(r.final_genome_length),
            format_real(r.final_mutation_rate),
        ));
    }
    out
}

impl ExperimentResult {
    /// Writes `<name>_timeseries.csv` (series) or `<name>_sweep.csv`
    /// (sweeps), plus `<name>_runs.csv` with one row per run, into `dir`.
    pub fn write_csv(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let metadata = self.spec.metadata();
        let name = self.spec.name();
        let main = match &self.outcome {
            Outcome::Series { aggregate, .. } => (
                dir.join(format!("{name}_timeseries.csv")),
                timeseries_csv(&aggregate.samples, &metadata)?,
            ),
            Outcome::Sweep { points, .. } => (
                dir.join(format!("{name}_sweep.csv")),
                sweep_csv(points, &metadata),
            ),
        };
        let runs = (
            dir.join(format!("{name}_runs.csv")),
            runs_csv(self, &metadata),
        );
        for (path, text) in [&main, &runs] {
            write_file(path, text)?;
        }
        Ok(vec![main.0, runs.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(seed: u64) -> SimConfig {
        SimConfig {
            pop_size: 30,
            run_length: 400,
            era_length: 40,
            target_change_rate: 0.2,
            tournament_size: 6,
            mutation_code_length: 6,
            seed,
            sample_interval: 100,
            stop_on_zero_mutation: false,
        }
    }

    #[test]
    fn preset_values() {
        let p1 = preset(1).unwrap();
        assert_eq!(
            (
                p1.base_config.run_length,
                p1.num_runs,
                p1.base_config.sample_interval
            ),
            (1000, 100, 1)
        );
        assert!(p1.sweep.is_none());
        let p2 = preset(2).unwrap();
        assert_eq!(
            (
                p2.base_config.run_length,
                p2.num_runs,
                p2.base_config.sample_interval
            ),
            (10_000_000, 10, 10_000)
        );
        let p3 = preset(3).unwrap();
        assert_eq!(p3.base_config.target_change_rate, 0.0);
        assert_eq!(p3.base_config.era_length, 10_000_000);
        assert!(p3.base_config.stop_on_zero_mutation);
        let p4 = preset(4).unwrap();
        assert_eq!(p4.base_config.run_length, 1_000_000);
        let s = p4.sweep.unwrap();
        assert_eq!(s.param, SweepParam::TargetChangeRate);
        assert_eq!(s.values.len(), 11);
        assert!((s.values[4] - 0.08).abs() < 1e-12 && (s.values[10] - 0.2).abs() < 1e-12);
        assert_eq!(
            preset(7).unwrap().sweep.unwrap().values,
            vec![1000.0, 1250.0, 1500.0, 1750.0, 2000.0, 2250.0, 2500.0, 2750.0, 3000.0]
        );
        assert_eq!(preset(8).unwrap().sweep.unwrap().values.len(), 11);
        assert!(preset(0).is_err());
        assert!(preset(9).is_err());
    }

    #[test]
    fn scaling() {
        let p2 = preset(2).unwrap().scaled(0.1).unwrap();
        assert_eq!(p2.base_config.run_length, 1_000_000);
        assert_eq!(p2.base_config.sample_interval, 1000);
        assert_eq!(p2.num_runs, 10);
        assert_eq!(p2.base_config.era_length, 100);
        let p3 = preset(3).unwrap().scaled(0.1).unwrap();
        assert_eq!(p3.base_config.era_length, 1_000_000);
        let p1 = preset(1).unwrap().scaled(0.5).unwrap();
        assert_eq!(p1.base_config.sample_interval, 1);
        assert!(preset(1).unwrap().scaled(0.0).is_err());
    }

    #[test]
    fn sweep_param_names() {
        assert_eq!(
            "era_length".parse::<SweepParam>().unwrap(),
            SweepParam::EraLength
        );
        assert_eq!(
            "population_size".parse::<SweepParam>().unwrap(),
            SweepParam::PopSize
        );
        assert!("pop_sz".parse::<SweepParam>().is_err());
        let mut cfg = SimConfig::baseline();
        assert!(SweepParam::TournamentSize.apply(&mut cfg, 2.5).is_err());
        assert!(SweepParam::TournamentSize.apply(&mut cfg, 1.0).is_err());
        SweepParam::TargetChangeRate.apply(&mut cfg, 0.08).unwrap();
        assert_eq!(cfg.target_change_rate, 0.08);
    }

    #[test]
    fn experiment_is_deterministic() {
        let spec = ExperimentSpec {
            id: None,
            base_config: tiny(7),
            sweep: None,
            num_runs: 4,
            scale: 1.0,
        };
        let a = run_experiment(&spec).unwrap();
        let b = run_experiment(&spec).unwrap();
        assert_eq!(a, b);
        let Outcome::Series { runs, aggregate } = &a.outcome else {
            panic!()
        };
        let seeds: Vec<u64> = runs.iter().map(|r| r.seed).collect();
        assert_eq!(seeds, (0..4).map(|i| derive_seed(7, i)).collect::<Vec<_>>());
        assert_eq!(aggregate.samples.len(), 5);
    }

    #[test]
    fn single_value_single_run_sweep_is_identity() {
        let spec = ExperimentSpec::custom_sweep(tiny(3), SweepParam::EraLength, vec![50.0], 1);
        let Outcome::Sweep { points, runs } = run_experiment(&spec).unwrap().outcome else {
            panic!()
        };
        let r = &runs[0][0];
        assert_eq!(r.seed, derive_seed(3, 0));
        assert_eq!(points[0].mean_final_fitness, r.final_fitness);
        assert_eq!(points[0].mean_final_mutation_rate, r.final_mutation_rate);
        assert_eq!(
            points[0].mean_last_novel_birth,
            r.last_novel_or_ceiling() as f64
        );
        let direct = run(&SimConfig {
            era_length: 50,
            seed: derive_seed(3, 0),
            ..tiny(3)
        })
        .unwrap();
        assert_eq!(&direct, r);
    }

    #[test]
    fn sweep_order_and_ceiling() {
        let spec = ExperimentSpec::custom_sweep(
            tiny(11),
            SweepParam::TargetChangeRate,
            vec![0.3, 0.0, 0.1],
            2,
        );
        let points = sweep(&spec).unwrap();
        let values: Vec<f64> = points.iter().map(|p| p.value).collect();
        assert_eq!(values, vec![0.3, 0.0, 0.1]);
        for p in &points {
            assert!(p.mean_last_novel_birth <= 400.0);
            assert!((0.0..=1.0).contains(&p.fraction_runs_nonzero_rate));
        }
        let bad = ExperimentSpec::custom_sweep(tiny(1), SweepParam::TournamentSize, vec![1.0], 1);
        assert!(run_experiment(&bad).is_err());
    }

    #[test]
    fn writes_csv_files() {
        let dir = tempfile::tempdir().unwrap();
        let spec =
            ExperimentSpec::custom_sweep(tiny(5), SweepParam::EraLength, vec![20.0, 40.0], 2);
        let files = run_experiment(&spec)
            .unwrap()
            .write_csv(dir.path())
            .unwrap();
        let sweep_text = std::fs::read_to_string(&files[0]).unwrap();
        assert!(sweep_text.contains("# swept_parameter = era_length"));
        let data: Vec<&str> = sweep_text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data[0], crate::io::SWEEP_HEADER);
        assert!(data[1].starts_with("20,") && data[2].starts_with("40,"));
        let runs_text = std::fs::read_to_string(&files[1]).unwrap();
        assert_eq!(runs_text.lines().filter(|l| !l.starts_with('#')).count(), 5);
    }
}
