//! Config-file merging and resolution of run-wide settings.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::{Common, WeightArg};
use crate::error::CliError;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "CODA_OUTPUT_DIR";

/// Flag values that count as "not given" and so do not override the config.
fn is_unset(v: &Value) -> bool {
    match v {
        Value::Null | Value::Bool(false) => true,
        Value::Array(a) => a.is_empty(),
        _ => false,
    }
}

fn as_object<T: Serialize>(x: &T) -> Map<String, Value> {
    match serde_json::to_value(x).expect("argument structs serialize") {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn read_config(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(CliError::Config(format!("{}: expected a JSON object", path.display()))),
        Err(e) => Err(CliError::Config(format!("{}: {e}", path.display()))),
    }
}

fn overlay<T: Serialize + DeserializeOwned>(
    base: Map<String, Value>,
    flags: &T,
    what: &str,
) -> Result<T, CliError> {
    let mut merged = base;
    for (k, v) in as_object(flags) {
        if !is_unset(&v) {
            merged.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::Config(format!("{what}: {e}")))
}

/// Merges the config file named by `--config` (if any) under the flags.
pub fn merge<P: Serialize + DeserializeOwned>(
    common: &Common,
    params: &P,
) -> Result<(Common, P), CliError> {
    let file = match &common.config {
        Some(p) => read_config(p)?,
        None => Map::new(),
    };
    let common_keys = as_object(&Common::default());
    let (mut c_base, mut p_base) = (Map::new(), Map::new());
    for (k, v) in file {
        if common_keys.contains_key(&k) {
            c_base.insert(k, v);
        } else {
            p_base.insert(k, v);
        }
    }
    let mut merged_common: Common = overlay(c_base, common, "config")?;
    merged_common.config = common.config.clone();
    let merged_params = overlay(p_base, params, "config")?;
    Ok((merged_common, merged_params))
}

/// Run-wide settings after defaults are applied.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub input: PathBuf,
    pub out_dir: PathBuf,
    pub weights: WeightArg,
    /// `None` means zeros are kept.
    pub zero_replace: Option<f64>,
    pub seed: u64,
    pub threads: Option<usize>,
}

pub fn resolve(c: &Common) -> Result<RunConfig, CliError> {
    let input = c
        .input
        .clone()
        .ok_or_else(|| CliError::Config("no input given (use --input or the config file)".into()))?;
    let out_dir = match &c.out_dir {
        Some(d) => d.clone(),
        None => std::env::var_os(OUTPUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from),
    };
    let zero_replace = match c.zero_replace.as_deref() {
        None | Some("off") => None,
        Some(s) => {
            let f: f64 = s
                .parse()
                .map_err(|_| CliError::Config(format!("zero-replace must be 'off' or a number, got '{s}'")))?;
            if !(f > 0.0 && f <= 1.0) {
                return Err(CliError::Config(format!("zero-replace fraction {f} not in (0, 1]")));
            }
            Some(f)
        }
    };
    if c.threads == Some(0) {
        return Err(CliError::Config("threads must be at least 1".into()));
    }
    Ok(RunConfig {
        input,
        out_dir,
        weights: c.weights.unwrap_or(WeightArg::Uniform),
        zero_replace,
        seed: c.seed.unwrap_or(0),
        threads: c.threads,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::StepArgs;

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, r#"{"input": "a.csv", "seed": 5, "top": 3, "max_steps": 4}"#).unwrap();
        let common = Common {
            config: Some(cfg),
            seed: Some(9),
            ..Default::default()
        };
        let params = StepArgs {
            top: Some(7),
            ..Default::default()
        };
        let (c, p) = merge(&common, &params).unwrap();
        assert_eq!(c.seed, Some(9));
        assert_eq!(c.input.as_deref(), Some(Path::new("a.csv")));
        assert_eq!(p.top, Some(7));
        assert_eq!(p.max_steps, Some(4));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, r#"{"input": "a.csv", "topp": 3}"#).unwrap();
        let common = Common {
            config: Some(cfg),
            ..Default::default()
        };
        let err = merge(&common, &StepArgs::default()).unwrap_err();
        assert_eq!(err.code(), "E_CONFIG");
    }

    #[test]
    fn zero_replace_parsing() {
        let mut c = Common {
            input: Some("x".into()),
            out_dir: Some("o".into()),
            ..Default::default()
        };
        assert_eq!(resolve(&c).unwrap().zero_replace, None);
        c.zero_replace = Some("0.5".into());
        assert_eq!(resolve(&c).unwrap().zero_replace, Some(0.5));
        c.zero_replace = Some("2".into());
        assert!(resolve(&c).is_err());
    }
}
