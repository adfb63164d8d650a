use crate::error::{Error, Result};

/// Largest accepted `run_length`; birth indices share a packed sort key
/// with fitness and must fit in 40 bits.
pub const MAX_RUN_LENGTH: u64 = (1 << 40) - 1;

/// Parameters of one simulation run.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub pop_size: usize,
    /// Number of children born in the run.
    pub run_length: u64,
    /// Children per era; the target drifts after every `era_length` births.
    pub era_length: u64,
    /// Per-bit flip probability applied to the target between eras.
    pub target_change_rate: f64,
    pub tournament_size: usize,
    pub mutation_code_length: usize,
    pub seed: u64,
    /// Births between metric samples.
    pub sample_interval: u64,
    /// End the run as soon as every genome encodes a zero mutation rate.
    pub stop_on_zero_mutation: bool,
}

impl SimConfig {
    /// The baseline parameter set: population 2000, 1000 children, eras of
    /// 100 children, 20% target drift, tournaments of 400, 10-bit codes.
    pub fn baseline() -> Self {
        SimConfig {
            pop_size: 2000,
            run_length: 1000,
            era_length: 100,
            target_change_rate: 0.2,
            tournament_size: 400,
            mutation_code_length: 10,
            seed: 0,
            sample_interval: 1,
            stop_on_zero_mutation: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.pop_size == 0 || self.pop_size > u32::MAX as usize {
            return bad(format!(
                "pop_size must be in 1..={}, got {}",
                u32::MAX,
                self.pop_size
            ));
        }
        if self.run_length == 0 || self.run_length > MAX_RUN_LENGTH {
            return bad(format!(
                "run_length must be in 1..={MAX_RUN_LENGTH}, got {}",
                self.run_length
            ));
        }
        if self.era_length == 0 {
            return bad("era_length must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.target_change_rate) {
            return bad(format!(
                "target_change_rate must be in [0, 1], got {}",
                self.target_change_rate
            ));
        }
        if self.tournament_size < 2 || self.tournament_size > u32::MAX as usize {
            return bad(format!(
                "tournament_size must be at least 2, got {}",
                self.tournament_size
            ));
        }
        if !(2..=32).contains(&self.mutation_code_length) {
            return bad(format!(
                "mutation_code_length must be in 2..=32, got {}",
                self.mutation_code_length
            ));
        }
        if self.sample_interval == 0 {
            return bad("sample_interval must be positive".into());
        }
        Ok(())
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        Self::baseline()
    }
}
