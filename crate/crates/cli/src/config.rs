//! `--config` support.
//!
//! The file is a JSON object. Top-level keys set options of whichever
//! subcommand accepts them; a nested object under a subcommand name
//! (`{"train": {...}}`) applies to that subcommand only and wins over the
//! top level. Values become `--key=value` tokens placed directly after the
//! subcommand name. Options already present on the command line are not
//! taken from the file, except `set`, which merges by name with command-line
//! entries applied last.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::Path;

use clap::CommandFactory;
use serde_json::{Map, Value};

use crate::args::{Cli, Command};
use crate::error::{CliError, Result};

const GLOBAL_KEYS: [&str; 2] = ["config", "verbose"];

/// Path given with `--config`, if any.
fn config_path(raw: &[OsString]) -> Option<(usize, OsString)> {
    let mut it = raw.iter().enumerate().skip(1);
    while let Some((i, tok)) = it.next() {
        let s = tok.to_string_lossy();
        if s == "--" {
            return None;
        }
        if s == "--config" {
            return it.next().map(|(_, v)| (i + 1, v.clone()));
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some((i, v.into()));
        }
    }
    None
}

fn option_names(sub: &str) -> BTreeSet<String> {
    let cmd = Cli::command();
    cmd.find_subcommand(sub)
        .map(|c| {
            c.get_arguments()
                .filter_map(|a| a.get_long())
                .filter(|l| !GLOBAL_KEYS.contains(l))
                .map(str::to_string)
                .collect()
        })
        .unwrap_or_default()
}

fn normalize(key: &str) -> String {
    key.replace('_', "-")
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn tokens_for(key: &str, value: &Value, out: &mut Vec<OsString>) -> Result<()> {
    let bad = || CliError::Usage(format!("config key `{key}`: unsupported value {value}"));
    match value {
        Value::Null | Value::Bool(false) => {}
        Value::Bool(true) => out.push(format!("--{key}").into()),
        Value::Array(items) if key == "set" => {
            for item in items {
                let s = scalar(item).ok_or_else(bad)?;
                out.push(format!("--set={s}").into());
            }
        }
        Value::Object(map) if key == "set" => {
            for (name, v) in map {
                let s = scalar(v).ok_or_else(bad)?;
                out.push(format!("--set={name}={s}").into());
            }
        }
        Value::Array(items) => {
            let parts = items.iter().map(scalar).collect::<Option<Vec<_>>>().ok_or_else(bad)?;
            out.push(format!("--{key}={}", parts.join(",")).into());
        }
        Value::Object(_) => out.push(format!("--{key}={value}").into()),
        other => out.push(format!("--{key}={}", scalar(other).ok_or_else(bad)?).into()),
    }
    Ok(())
}

/// Converts a config object into flag tokens for subcommand `sub`. Keys in
/// `given` (long names already on the command line) are skipped, except
/// `set`, whose entries merge by name.
pub fn config_tokens(
    config: &Map<String, Value>,
    sub: &str,
    given: &BTreeSet<String>,
) -> Result<Vec<OsString>> {
    let own = option_names(sub);
    let any: BTreeSet<String> = Command::NAMES.iter().flat_map(|s| option_names(s)).collect();
    let mut merged: Map<String, Value> = Map::new();
    for (key, value) in config {
        if Command::NAMES.contains(&key.as_str()) {
            continue;
        }
        let k = normalize(key);
        if own.contains(&k) {
            merged.insert(k, value.clone());
        } else if !any.contains(&k) {
            return Err(CliError::Usage(format!("unknown config key `{key}`")));
        }
    }
    match config.get(sub) {
        None => {}
        Some(Value::Object(section)) => {
            for (key, value) in section {
                let k = normalize(key);
                if !own.contains(&k) {
                    return Err(CliError::Usage(format!(
                        "unknown config key `{sub}.{key}`; `{sub}` accepts [{}]",
                        own.iter().cloned().collect::<Vec<_>>().join(", ")
                    )));
                }
                merged.insert(k, value.clone());
            }
        }
        Some(_) => {
            return Err(CliError::Usage(format!("config key `{sub}` must be an object")));
        }
    }
    let mut out = Vec::new();
    for (k, value) in &merged {
        if k != "set" && given.contains(k) {
            continue;
        }
        tokens_for(k, value, &mut out)?;
    }
    Ok(out)
}

/// Long option names present in `tokens`.
fn given_flags(tokens: &[OsString]) -> BTreeSet<String> {
    tokens
        .iter()
        .filter_map(|t| {
            let s = t.to_str()?.strip_prefix("--")?;
            Some(s.split('=').next().unwrap_or(s).to_string())
        })
        .collect()
}

pub fn read_config(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(CliError::Usage(format!("config {}: expected a JSON object", path.display()))),
        Err(e) => Err(CliError::Usage(format!("config {}: {e}", path.display()))),
    }
}

/// Returns `raw` with config-file values spliced in after the subcommand.
pub fn expand_args(raw: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some((value_idx, path)) = config_path(&raw) else {
        return Ok(raw);
    };
    let config = read_config(Path::new(&path))?;
    let sub_idx = raw
        .iter()
        .enumerate()
        .skip(1)
        .find(|(i, t)| *i != value_idx && Command::NAMES.iter().any(|n| t.as_os_str() == *n));
    let Some((sub_idx, sub)) = sub_idx else {
        return Ok(raw);
    };
    let sub = sub.to_string_lossy().into_owned();
    let given = given_flags(&raw[sub_idx + 1..]);
    let extra = config_tokens(&config, &sub, &given)?;
    log::debug!("config {} adds {:?}", path.to_string_lossy(), extra);
    let mut out = raw;
    out.splice(sub_idx + 1..sub_idx + 1, extra);
    Ok(out)
}
