//! Flat key-value config files mirroring the experiment configuration.
//!
//! One `key = value` pair per line, `#` starts a comment. Every key has a
//! matching CLI flag; flags override file values, which override defaults.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use siot_trust::graph::ObjectId;
use siot_trust::metrics::{ExperimentConfig, SchemeSpec, TraceSource};
use siot_trust::trace::GeneratorConfig;

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut entries = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {}: expected `key = value`", idx + 1))?;
        entries.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(entries)
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| anyhow!("config key `{key}`: invalid value `{value}`: {e}"))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|part| parse::<T>(key, part.trim())).collect()
}

/// Applies config-file entries onto the experiment config. Unknown keys
/// are rejected so typos fail loudly. The trace source is switched first,
/// so generator keys combined with `trace` fail consistently.
pub fn apply_entries(cfg: &mut ExperimentConfig, entries: &BTreeMap<String, String>) -> Result<()> {
    if let Some(path) = entries.get("trace") {
        apply_entry(cfg, "trace", path)?;
    }
    for (key, value) in entries {
        if key == "trace" {
            continue;
        }
        apply_entry(cfg, key, value).with_context(|| format!("config key `{key}`"))?;
    }
    Ok(())
}

pub fn generator_mut(cfg: &mut ExperimentConfig) -> Result<&mut GeneratorConfig> {
    match &mut cfg.source {
        TraceSource::Generate { config } => Ok(config),
        TraceSource::File { .. } => {
            bail!("generator settings conflict with `trace` (a trace file is already configured)")
        }
    }
}

fn apply_entry(cfg: &mut ExperimentConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "trace" => cfg.source = TraceSource::File { path: PathBuf::from(value) },
        "objects" => generator_mut(cfg)?.object_count = parse(key, value)?,
        "events" => generator_mut(cfg)?.target_event_count = parse(key, value)?,
        "malicious_fraction" => generator_mut(cfg)?.malicious_fraction = parse(key, value)?,
        "community_count" => generator_mut(cfg)?.community_count = parse(key, value)?,
        "mean_friends" => generator_mut(cfg)?.mean_friends_per_object = parse(key, value)?,
        "mean_communities" => generator_mut(cfg)?.mean_communities_per_object = parse(key, value)?,
        "multicast_groups" => generator_mut(cfg)?.multicast_group_count = parse(key, value)?,
        "mean_multicast" => generator_mut(cfg)?.mean_multicast_groups = parse(key, value)?,
        "friend_bias" => generator_mut(cfg)?.friend_bias = parse(key, value)?,
        "p_good" => generator_mut(cfg)?.service.p_good_service = parse(key, value)?,
        "p_bad" => generator_mut(cfg)?.service.p_bad_service = parse(key, value)?,
        "switch_point" => generator_mut(cfg)?.service.switch_point = parse(key, value)?,
        "on_off_period" => generator_mut(cfg)?.service.on_off_period = Some(parse(key, value)?),
        "mix_malicious" => generator_mut(cfg)?.behavior_mix.malicious = parse(key, value)?,
        "mix_good_to_malicious" => {
            generator_mut(cfg)?.behavior_mix.good_to_malicious = parse(key, value)?
        }
        "mix_on_off" => generator_mut(cfg)?.behavior_mix.on_off = parse(key, value)?,
        "mix_malicious_to_good" => {
            generator_mut(cfg)?.behavior_mix.malicious_to_good = parse(key, value)?
        }
        "seed" => set_seed(cfg, parse(key, value)?),
        "scheme" => cfg.scheme = parse::<SchemeSpec>(key, value)?,
        "schemes" => cfg.schemes = parse_list::<SchemeSpec>(key, value)?,
        "theta" => cfg.theta = parse(key, value)?,
        "checkpoints" => cfg.checkpoints = parse_list(key, value)?,
        "fractions" => cfg.sweep_fractions = parse_list(key, value)?,
        "tracked" => cfg.tracked_nodes = parse_list::<ObjectId>(key, value)?,
        "window" => cfg.window_events = Some(parse(key, value)?),
        "out" => cfg.out_dir = PathBuf::from(value),
        other => bail!("unknown config key `{other}`"),
    }
    Ok(())
}

/// The experiment seed is the master: it also seeds the embedded
/// generator so one number pins the whole run.
pub fn set_seed(cfg: &mut ExperimentConfig, seed: u64) {
    cfg.seed = seed;
    if let TraceSource::Generate { config } = &mut cfg.source {
        config.seed = seed;
    }
}
