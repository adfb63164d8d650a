//! Python bindings for the evosim simulator.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use evosim::bits::BitString;
use evosim::engine::{evaluate_fitness as fitness_of, Target};
use evosim::experiments::{preset, run_experiment as run_preset, Outcome};
use evosim::io::render_config;
use evosim::{Genome, MetricsSample, RunResult, SimConfig, SimState};

fn err(e: evosim::Error) -> PyErr {
    match e {
        evosim::Error::InvalidState(m) => PyRuntimeError::new_err(m),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn bits(s: &str) -> PyResult<BitString> {
    s.parse()
        .map_err(|_| PyValueError::new_err(format!("not a bit string: {s:?}")))
}

fn genome(s: &str, code_length: usize) -> PyResult<Genome> {
    let code = bits(s)?;
    if code.len() < code_length {
        return Err(PyValueError::new_err(format!(
            "genome of length {} is shorter than the mutation code ({code_length})",
            code.len()
        )));
    }
    Ok(Genome::new(code, 0))
}

/// Baseline config with keyword overrides applied.
fn config_from(overrides: Option<&Bound<'_, PyDict>>) -> PyResult<SimConfig> {
    let mut cfg = SimConfig::baseline();
    if let Some(kw) = overrides {
        for (k, v) in kw.iter() {
            let key: String = k.extract()?;
            match key.as_str() {
                "pop_size" => cfg.pop_size = v.extract()?,
                "run_length" => cfg.run_length = v.extract()?,
                "era_length" => cfg.era_length = v.extract()?,
                "target_change_rate" => cfg.target_change_rate = v.extract()?,
                "tournament_size" => cfg.tournament_size = v.extract()?,
                "mutation_code_length" => cfg.mutation_code_length = v.extract()?,
                "seed" => cfg.seed = v.extract()?,
                "sample_interval" => cfg.sample_interval = v.extract()?,
                "stop_on_zero_mutation" => cfg.stop_on_zero_mutation = v.extract()?,
                other => {
                    return Err(PyValueError::new_err(format!(
                        "unknown config key {other:?}"
                    )))
                }
            }
        }
    }
    cfg.validate().map_err(err)?;
    Ok(cfg)
}

fn config_dict<'py>(py: Python<'py>, cfg: &SimConfig) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("pop_size", cfg.pop_size)?;
    d.set_item("run_length", cfg.run_length)?;
    d.set_item("era_length", cfg.era_length)?;
    d.set_item("target_change_rate", cfg.target_change_rate)?;
    d.set_item("tournament_size", cfg.tournament_size)?;
    d.set_item("mutation_code_length", cfg.mutation_code_length)?;
    d.set_item("seed", cfg.seed)?;
    d.set_item("sample_interval", cfg.sample_interval)?;
    d.set_item("stop_on_zero_mutation", cfg.stop_on_zero_mutation)?;
    Ok(d)
}

fn sample_dict<'py>(py: Python<'py>, s: &MetricsSample) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("births", s.births)?;
    d.set_item("mean_fitness", s.mean_fitness)?;
    d.set_item("mean_genome_length", s.mean_genome_length)?;
    d.set_item("mean_mutation_rate", s.mean_mutation_rate)?;
    d.set_item("mean_fitness_increase", s.mean_fitness_increase)?;
    d.set_item("sd_fitness", s.sd_fitness)?;
    d.set_item("sd_genome_length", s.sd_genome_length)?;
    d.set_item("sd_mutation_rate", s.sd_mutation_rate)?;
    Ok(d)
}

fn run_dict<'py>(py: Python<'py>, r: &RunResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("seed", r.seed)?;
    d.set_item("births", r.births)?;
    d.set_item("last_novel_birth", r.last_novel_birth)?;
    d.set_item("final_fitness", r.final_fitness)?;
    d.set_item("final_mutation_rate", r.final_mutation_rate)?;
    d.set_item("final_genome_length", r.final_genome_length)?;
    let samples = r
        .samples
        .iter()
        .map(|s| sample_dict(py, s))
        .collect::<PyResult<Vec<_>>>()?;
    d.set_item("samples", samples)?;
    let eras: Vec<(u64, f64, f64)> = r
        .era_records
        .iter()
        .map(|e| (e.era_index, e.fitness_at_start, e.fitness_at_end))
        .collect();
    d.set_item("eras", eras)?;
    Ok(d)
}

/// Mutation rate encoded by the first `code_length` bits of `genome`.
#[pyfunction]
fn decode_mutation_rate(genome_bits: &str, code_length: usize) -> PyResult<f64> {
    Ok(evosim::decode_mutation_rate(
        &genome(genome_bits, code_length)?,
        code_length,
    ))
}

#[pyfunction]
fn phenotype(genome_bits: &str, code_length: usize) -> PyResult<String> {
    Ok(evosim::phenotype(&genome(genome_bits, code_length)?, code_length).to_string())
}

/// Positional matches between the phenotype and `target`.
#[pyfunction]
fn evaluate_fitness(genome_bits: &str, target: &str, code_length: usize) -> PyResult<u32> {
    let g = genome(genome_bits, code_length)?;
    Ok(fitness_of(&g, &Target(bits(target)?), code_length))
}

#[pyfunction]
#[pyo3(signature = (**overrides))]
fn config<'py>(
    py: Python<'py>,
    overrides: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyDict>> {
    config_dict(py, &config_from(overrides)?)
}

#[pyfunction]
fn parse_config<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyDict>> {
    config_dict(py, &evosim::io::parse_config(text).map_err(err)?)
}

/// Runs one simulation from the baseline with keyword overrides.
#[pyfunction]
#[pyo3(signature = (**overrides))]
fn run<'py>(
    py: Python<'py>,
    overrides: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config_from(overrides)?;
    let result = py.detach(|| evosim::run(&cfg)).map_err(err)?;
    run_dict(py, &result)
}

/// Runs preset experiment `id` and returns its summary; writes the CSV
/// files too when `out` is given.
#[pyfunction]
#[pyo3(signature = (id, scale=1.0, seed=0, runs=None, values=None, out=None))]
fn run_experiment<'py>(
    py: Python<'py>,
    id: u8,
    scale: f64,
    seed: u64,
    runs: Option<usize>,
    values: Option<Vec<f64>>,
    out: Option<PathBuf>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut spec = preset(id)
        .and_then(|s| s.scaled(scale))
        .map_err(err)?
        .with_seed(seed);
    if let Some(values) = values {
        spec = spec.with_values(values).map_err(err)?;
    }
    if let Some(runs) = runs {
        spec = spec.with_runs(runs);
    }
    let result = py.detach(|| run_preset(&spec)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("name", spec.name())?;
    match &result.outcome {
        Outcome::Series { runs, aggregate } => {
            let samples = aggregate
                .samples
                .iter()
                .map(|s| sample_dict(py, s))
                .collect::<PyResult<Vec<_>>>()?;
            d.set_item("samples", samples)?;
            d.set_item("mean_last_novel_birth", aggregate.mean_last_novel_birth)?;
            d.set_item(
                "fraction_runs_nonzero_rate",
                aggregate.fraction_runs_nonzero_rate,
            )?;
            d.set_item("num_runs", runs.len())?;
        }
        Outcome::Sweep { points, .. } => {
            let rows: Vec<(f64, f64, f64, f64, f64)> = points
                .iter()
                .map(|p| {
                    (
                        p.value,
                        p.mean_last_novel_birth,
                        p.fraction_runs_nonzero_rate,
                        p.mean_final_fitness,
                        p.mean_final_mutation_rate,
                    )
                })
                .collect();
            d.set_item("points", rows)?;
        }
    }
    if let Some(dir) = out {
        let paths = result.write_csv(&dir).map_err(err)?;
        d.set_item("files", paths)?;
    }
    Ok(d)
}

/// A simulation advanced one birth at a time.
#[pyclass]
struct Simulation {
    state: SimState,
}

#[pymethods]
impl Simulation {
    #[new]
    #[pyo3(signature = (**overrides))]
    fn new(overrides: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let state = SimState::new(config_from(overrides)?).map_err(err)?;
        Ok(Simulation { state })
    }

    /// Advances up to `n` births; returns how many happened.
    #[pyo3(signature = (n=1))]
    fn step(&mut self, n: u64) -> PyResult<u64> {
        let mut done = 0;
        while done < n && !self.state.is_finished() {
            self.state.step().map_err(err)?;
            done += 1;
        }
        Ok(done)
    }

    #[getter]
    fn children_born(&self) -> u64 {
        self.state.children_born()
    }

    #[getter]
    fn finished(&self) -> bool {
        self.state.is_finished()
    }

    #[getter]
    fn last_novel_birth(&self) -> Option<u64> {
        self.state.last_novel_birth()
    }

    #[getter]
    fn target(&self) -> String {
        self.state.target().bits().to_string()
    }

    fn genomes(&self) -> Vec<String> {
        self.state
            .population()
            .genomes()
            .iter()
            .map(|g| g.code.to_string())
            .collect()
    }

    fn fitnesses(&self) -> Vec<u32> {
        self.state.population().fitnesses().to_vec()
    }

    /// Population statistics at the current birth.
    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = self.state.population().stats();
        let d = PyDict::new(py);
        d.set_item("mean_fitness", s.mean_fitness)?;
        d.set_item("mean_genome_length", s.mean_genome_length)?;
        d.set_item("mean_mutation_rate", s.mean_mutation_rate)?;
        d.set_item("sd_fitness", s.sd_fitness)?;
        d.set_item("sd_genome_length", s.sd_genome_length)?;
        d.set_item("sd_mutation_rate", s.sd_mutation_rate)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "Simulation(children_born={}, {})",
            self.state.children_born(),
            render_config(self.state.config())
                .trim_end()
                .replace('\n', ", ")
        )
    }
}

#[pymodule]
fn evosim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", evosim::VERSION)?;
    m.add_class::<Simulation>()?;
    m.add_function(wrap_pyfunction!(decode_mutation_rate, m)?)?;
    m.add_function(wrap_pyfunction!(phenotype, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_fitness, m)?)?;
    m.add_function(wrap_pyfunction!(config, m)?)?;
    m.add_function(wrap_pyfunction!(parse_config, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
