//! Argument decoding and file output helpers.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::args::DesignArgs;
use crate::error::{CliError, Result};

/// Parses `arg` as inline JSON when it starts with `{` or `[`, otherwise
/// reads it as a file path. `what` names the option in errors.
pub fn json_arg<T: DeserializeOwned>(arg: &str, what: &str) -> Result<T> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| CliError::Usage(format!("--{what} {arg}: {e}")))?
    };
    let de = &mut serde_json::Deserializer::from_str(&text);
    let v = serde_path_to_error::deserialize(&mut *de).map_err(|e| {
        let path = e.path().to_string();
        let at = if path == "." { String::new() } else { format!(" at `{path}`") };
        CliError::Data(format!("--{what}{at}: {}", e.inner()))
    })?;
    de.end().map_err(|e| CliError::Data(format!("--{what}: {e}")))?;
    Ok(v)
}

/// Parses `NAME=VALUE`.
pub fn parse_set(s: &str) -> Result<(String, f64)> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--set `{s}`: expected NAME=VALUE")))?;
    let v: f64 = value
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("--set `{s}`: `{value}` is not a number")))?;
    Ok((name.trim().to_string(), v))
}

/// Merges `--design` and then each `--set` into one name → value map.
pub fn design_map(args: &DesignArgs) -> Result<BTreeMap<String, f64>> {
    let mut map: BTreeMap<String, f64> = match &args.design {
        Some(d) => {
            let v: BTreeMap<String, Value> = json_arg(d, "design")?;
            v.into_iter()
                .map(|(k, v)| match v.as_f64() {
                    Some(x) => Ok((k, x)),
                    None => Err(CliError::Data(format!("--design: `{k}` is not a number"))),
                })
                .collect::<Result<_>>()?
        }
        None => BTreeMap::new(),
    };
    for s in &args.set {
        let (k, v) = parse_set(s)?;
        map.insert(k, v);
    }
    Ok(map)
}

pub fn require_file(path: &Path, flag: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{flag} {}: no such file", path.display())))
    }
}

/// Checks that the directory an output goes into exists.
pub fn require_parent(path: &Path, flag: &str) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() && !p.is_dir() => Err(CliError::Usage(format!(
            "--{flag} {}: directory {} does not exist",
            path.display(),
            p.display()
        ))),
        _ => Ok(()),
    }
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Pretty JSON with a trailing newline.
pub fn to_json_pretty<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable value");
    s.push('\n');
    s
}

/// Formats an optional number for CSV (empty when absent).
pub fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
