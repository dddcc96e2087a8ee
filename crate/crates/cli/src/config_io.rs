//! Config files and `KEY=VALUE` overrides on dot-paths.

use std::fs;
use std::path::Path;

use quadsar_core::Config;
use serde_json::Value;

use crate::error::{Error, Result};

/// Parses a config document. Missing sections fall back to defaults; unknown
/// keys are errors anchored to their line and column.
pub fn parse_config(text: &str, origin: &str) -> Result<Config> {
    serde_json::from_str(text).map_err(|e| Error::ConfigSyntax {
        path: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

pub fn load_config(path: &Path) -> Result<Config> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, &path.display().to_string())
}

/// Every addressable leaf of a config, sorted by path.
pub fn leaf_paths(config: &Config) -> Vec<String> {
    let value = serde_json::to_value(config).expect("config serializes");
    let mut out = Vec::new();
    collect_leaves(&value, String::new(), &mut out);
    out
}

fn collect_leaves(v: &Value, prefix: String, out: &mut Vec<String>) {
    match v {
        Value::Object(map) if !map.is_empty() => {
            for (k, child) in map {
                let p = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                collect_leaves(child, p, out);
            }
        }
        Value::Array(items) if !items.is_empty() => {
            for (i, child) in items.iter().enumerate() {
                collect_leaves(child, format!("{prefix}.{i}"), out);
            }
        }
        _ => out.push(prefix),
    }
}

/// Leaf paths paired with their values, rendered as JSON.
pub fn leaf_values(config: &Config) -> Vec<(String, String)> {
    let value = serde_json::to_value(config).expect("config serializes");
    leaf_paths(config)
        .into_iter()
        .map(|p| {
            let v = lookup(&value, &p).map(Value::to_string).unwrap_or_default();
            (p, v)
        })
        .collect()
}

fn lookup<'a>(root: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(root, |node, key| match node {
        Value::Object(map) => map.get(key),
        Value::Array(items) => key.parse::<usize>().ok().and_then(|i| items.get(i)),
        _ => None,
    })
}

fn lookup_mut<'a>(root: &'a mut Value, path: &str) -> Option<&'a mut Value> {
    path.split('.').try_fold(root, |node, key| match node {
        Value::Object(map) => map.get_mut(key),
        Value::Array(items) => key
            .parse::<usize>()
            .ok()
            .and_then(move |i| items.get_mut(i)),
        _ => None,
    })
}

/// Splits `KEY=VALUE`.
pub fn parse_override(raw: &str) -> Result<(String, String)> {
    match raw.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(Error::MalformedOverride(raw.to_string())),
    }
}

/// VALUE is read as JSON when it parses, otherwise as a bare string.
fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Sets one dot-path on a config. The path must already exist.
pub fn set_path(config: &Config, path: &str, raw_value: &str) -> Result<Config> {
    let mut value = serde_json::to_value(config).expect("config serializes");
    let slot = lookup_mut(&mut value, path).ok_or_else(|| Error::UnknownPath {
        path: path.to_string(),
        valid: leaf_paths(config),
    })?;
    *slot = parse_value(raw_value);
    serde_json::from_value(value).map_err(|e| Error::Config(format!("{path}={raw_value}: {e}")))
}

pub fn apply_overrides(mut config: Config, overrides: &[(String, String)]) -> Result<Config> {
    for (k, v) in overrides {
        config = set_path(&config, k, v)?;
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_document_uses_defaults() {
        let cfg = parse_config(r#"{"filter": {"alpha": 0.9}}"#, "t.json").unwrap();
        assert_eq!(cfg.filter.alpha, 0.9);
        assert_eq!(cfg.sim, Config::default().sim);
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = "{\n  \"filter\": {\n    \"alpah\": 0.9\n  }\n}";
        match parse_config(text, "bad.json") {
            Err(Error::ConfigSyntax {
                line,
                path,
                message,
                ..
            }) => {
                assert_eq!(line, 3);
                assert_eq!(path, "bad.json");
                assert!(message.contains("alpah"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn override_sets_leaf() {
        let cfg = set_path(&Config::default(), "filter.alpha", "0.5").unwrap();
        assert_eq!(cfg.filter.alpha, 0.5);
        let cfg = set_path(&cfg, "scenario.victims.0.x", "12").unwrap();
        assert_eq!(cfg.scenario.victims[0].x, 12.0);
        let cfg = set_path(&cfg, "scenario.pattern", "hover").unwrap();
        assert_eq!(cfg.scenario.pattern, quadsar_core::mission::Pattern::Hover);
    }

    #[test]
    fn override_can_replace_a_subtree() {
        let cfg = set_path(&Config::default(), "scenario.victims", "[]").unwrap();
        assert!(cfg.scenario.victims.is_empty());
    }

    #[test]
    fn unknown_path_lists_valid_ones() {
        match set_path(&Config::default(), "filter.beta", "1") {
            Err(Error::UnknownPath { valid, .. }) => {
                assert!(valid.iter().any(|p| p == "filter.alpha"));
                assert!(valid.iter().any(|p| p == "sim.seed"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_type_is_a_config_error() {
        assert!(matches!(
            set_path(&Config::default(), "sim.seed", "\"abc\""),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn override_parsing() {
        assert_eq!(parse_override("a.b=3").unwrap(), ("a.b".into(), "3".into()));
        assert!(parse_override("novalue").is_err());
        assert!(parse_override("=3").is_err());
    }
}
