//! CSV emission. Reals use [`format_real`]; metadata lines start with `#`
//! and precede the header.

use std::fmt::Write as _;
use std::path::Path;

use super::format_real;
use crate::error::{Error, Result};
use crate::experiments::SweepPoint;
use crate::metrics::MetricsSample;

pub const TIMESERIES_HEADER: &str = "births,mean_fitness,mean_genome_length,mean_mutation_rate,\
mean_fitness_increase,sd_fitness,sd_genome_length,sd_mutation_rate";

pub const SWEEP_HEADER: &str = "param_value,mean_last_novel_birth,fraction_runs_nonzero_rate,\
mean_final_fitness,mean_final_mutation_rate";

fn push_metadata(out: &mut String, metadata: &[String]) {
    for line in metadata {
        for part in line.lines() {
            out.push_str("# ");
            out.push_str(part);
            out.push('\n');
        }
    }
}

pub fn timeseries_csv(samples: &[MetricsSample], metadata: &[String]) -> Result<String> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples to write".into()));
    }
    if samples.windows(2).any(|w| w[0].births >= w[1].births) {
        return Err(Error::InvalidArgument(
            "samples must be strictly increasing in births".into(),
        ));
    }
    let mut out = String::new();
    push_metadata(&mut out, metadata);
    out.push_str(TIMESERIES_HEADER);
    out.push('\n');
    for s in samples {
        let increase = s.mean_fitness_increase.map(format_real).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.births,
            format_real(s.mean_fitness),
            format_real(s.mean_genome_length),
            format_real(s.mean_mutation_rate),
            increase,
            format_real(s.sd_fitness),
            format_real(s.sd_genome_length),
            format_real(s.sd_mutation_rate),
        )
        .unwrap();
    }
    Ok(out)
}

pub fn sweep_csv(points: &[SweepPoint], metadata: &[String]) -> String {
    let mut out = String::new();
    push_metadata(&mut out, metadata);
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{}",
            format_real(p.value),
            format_real(p.mean_last_novel_birth),
            format_real(p.fraction_runs_nonzero_rate),
            format_real(p.mean_final_fitness),
            format_real(p.mean_final_mutation_rate),
        )
        .unwrap();
    }
    out
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn write_timeseries(samples: &[MetricsSample], path: &Path, metadata: &[String]) -> Result<()> {
    write_file(path, &timeseries_csv(samples, metadata)?)
}

pub fn write_sweep(points: &[SweepPoint], path: &Path, metadata: &[String]) -> Result<()> {
    write_file(path, &sweep_csv(points, metadata))
}
