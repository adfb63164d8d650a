//! `key = value` configuration files.
//!
//! Keys are the lower-case [`SimConfig`] field names. `#` starts a comment
//! anywhere on a line. Omitted keys take their baseline values; unknown or
//! repeated keys are errors.

use std::collections::HashSet;
use std::str::FromStr;

use crate::config::SimConfig;
use crate::error::{Error, Result};

pub const KEYS: [&str; 9] = [
    "pop_size",
    "run_length",
    "era_length",
    "target_change_rate",
    "tournament_size",
    "mutation_code_length",
    "seed",
    "sample_interval",
    "stop_on_zero_mutation",
];

fn parse_value<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse {raw:?} as a value for {key}"),
    })
}

pub fn parse_config(text: &str) -> Result<SimConfig> {
    let mut cfg = SimConfig::baseline();
    let mut seen = HashSet::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            message: format!("expected `key = value`, got {content:?}"),
        })?;
        let key = key.trim();
        let value = value.trim();
        if !seen.insert(key.to_string()) && KEYS.contains(&key) {
            return Err(Error::Parse {
                line,
                message: format!("duplicate key {key}"),
            });
        }
        match key {
            "pop_size" => cfg.pop_size = parse_value(line, key, value)?,
            "run_length" => cfg.run_length = parse_value(line, key, value)?,
            "era_length" => cfg.era_length = parse_value(line, key, value)?,
            "target_change_rate" => cfg.target_change_rate = parse_value(line, key, value)?,
            "tournament_size" => cfg.tournament_size = parse_value(line, key, value)?,
            "mutation_code_length" => cfg.mutation_code_length = parse_value(line, key, value)?,
            "seed" => cfg.seed = parse_value(line, key, value)?,
            "sample_interval" => cfg.sample_interval = parse_value(line, key, value)?,
            "stop_on_zero_mutation" => cfg.stop_on_zero_mutation = parse_value(line, key, value)?,
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!(
                        "unknown key {other:?} (expected one of {})",
                        KEYS.join(", ")
                    ),
                })
            }
        }
        if let Err(Error::InvalidArgument(message)) = cfg.validate() {
            return Err(Error::Parse { line, message });
        }
    }
    cfg.validate().map_err(|e| Error::Parse {
        line: last_line,
        message: e.to_string(),
    })?;
    Ok(cfg)
}

/// Renders every key; `parse_config(&render_config(c)) == c`.
pub fn render_config(cfg: &SimConfig) -> String {
    format!(
        "pop_size = {}\nrun_length = {}\nera_length = {}\ntarget_change_rate = {}\n\
         tournament_size = {}\nmutation_code_length = {}\nseed = {}\nsample_interval = {}\n\
         stop_on_zero_mutation = {}\n",
        cfg.pop_size,
        cfg.run_length,
        cfg.era_length,
        cfg.target_change_rate,
        cfg.tournament_size,
        cfg.mutation_code_length,
        cfg.seed,
        cfg.sample_interval,
        cfg.stop_on_zero_mutation,
    )
}
