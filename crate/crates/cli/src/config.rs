//! Line-based `key = value` run configuration files.
//!
//! UTF-8 text, one assignment per line, `#` starts a comment, blank lines
//! ignored. Recognized keys: `scenario`, `engine`, `seed`, `iters`,
//! `step.kind`, `step.scale`, `network.kind`, `network.d`, `log.stride`.

use std::collections::BTreeMap;

use mascope_core::{
    CoreError, EngineKind, LogStride, Result, StepKind, StepSchedule,
};

use crate::scenario::{BuildParams, NetworkKind};

pub const ALLOWED_KEYS: [&str; 9] = [
    "scenario",
    "engine",
    "seed",
    "iters",
    "step.kind",
    "step.scale",
    "network.kind",
    "network.d",
    "log.stride",
];

/// Parse config text into a key/value map, rejecting unknown keys and
/// duplicate assignments.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CoreError::Parameter(format!("line {}: expected 'key = value'", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        if !ALLOWED_KEYS.contains(&key) {
            return Err(CoreError::Parameter(format!(
                "line {}: unknown key '{key}'",
                lineno + 1
            )));
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return Err(CoreError::Parameter(format!(
                "line {}: duplicate key '{key}'",
                lineno + 1
            )));
        }
    }
    Ok(map)
}

/// Convert a parsed map into scenario build overrides plus the scenario name
/// if present.
pub fn params_from_map(map: &BTreeMap<String, String>) -> Result<(Option<String>, BuildParams)> {
    let mut params = BuildParams::default();
    let scenario = map.get("scenario").cloned();
    if let Some(v) = map.get("engine") {
        params.engine = Some(EngineKind::parse(v)?);
    }
    if let Some(v) = map.get("seed") {
        params.seed = Some(v.parse().map_err(|_| {
            CoreError::Parameter(format!("seed must be an unsigned integer, got '{v}'"))
        })?);
    }
    if let Some(v) = map.get("iters") {
        params.iters = Some(v.parse().map_err(|_| {
            CoreError::Parameter(format!("iters must be an unsigned integer, got '{v}'"))
        })?);
    }
    let step_kind = map.get("step.kind").map(|v| StepKind::parse(v)).transpose()?;
    let step_scale = map
        .get("step.scale")
        .map(|v| {
            v.parse::<f64>().map_err(|_| {
                CoreError::Parameter(format!("step.scale must be a number, got '{v}'"))
            })
        })
        .transpose()?;
    match (step_kind, step_scale) {
        (None, None) => {}
        (Some(kind), Some(scale)) => params.step = Some(StepSchedule::new(kind, scale)?),
        _ => {
            return Err(CoreError::Parameter(
                "step.kind and step.scale must be given together".into(),
            ))
        }
    }
    if let Some(v) = map.get("network.kind") {
        params.network = Some(NetworkKind::parse(v)?);
    }
    if let Some(v) = map.get("network.d") {
        params.network_d = Some(v.parse().map_err(|_| {
            CoreError::Parameter(format!("network.d must be a number, got '{v}'"))
        })?);
    }
    if let Some(v) = map.get("log.stride") {
        params.log_stride = Some(match v.as_str() {
            "geometric" => LogStride::Geometric,
            other => LogStride::EveryN(other.parse().map_err(|_| {
                CoreError::Parameter(format!(
                    "log.stride must be 'geometric' or a positive integer, got '{other}'"
                ))
            })?),
        });
    }
    Ok((scenario, params))
}
