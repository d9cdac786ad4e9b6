//! TOML run configuration flattened onto the dotted keys of [`TrainConfig`].

use crate::Failure;
use mdgan::trainer::TrainConfig;
use std::path::Path;

/// Configurations shipped with the binary, addressable by name.
pub const PRESETS: &[(&str, &str)] = &[
    ("grid_mdgan", include_str!("../configs/grid_mdgan.toml")),
    ("grid_vanilla", include_str!("../configs/grid_vanilla.toml")),
];

/// Reads `spec` as a file path if one exists, otherwise as a preset name.
pub fn load_source(spec: &str) -> Result<String, Failure> {
    let path = Path::new(spec);
    if path.is_file() {
        return std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read config {spec}: {e}")));
    }
    PRESETS
        .iter()
        .find(|(name, _)| *name == spec)
        .map(|(_, text)| text.to_string())
        .ok_or_else(|| {
            let names: Vec<&str> = PRESETS.iter().map(|p| p.0).collect();
            Failure::usage(format!(
                "config {spec:?} is neither a file nor a preset ({})",
                names.join(", ")
            ))
        })
}

/// Flattens a TOML document into `(dotted key, textual value)` pairs, sorted
/// by key. Arrays become comma lists.
pub fn flatten(text: &str) -> Result<Vec<(String, String)>, Failure> {
    let table: toml::Table = text
        .parse()
        .map_err(|e| Failure::usage(format!("config is not valid TOML: {e}")))?;
    let mut out = Vec::new();
    flatten_into("", &table, &mut out)?;
    Ok(out)
}

fn flatten_into(prefix: &str, table: &toml::Table, out: &mut Vec<(String, String)>) -> Result<(), Failure> {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten_into(&key, t, out)?,
            other => {
                let text = scalar_text(&key, other)?;
                out.push((key, text));
            }
        }
    }
    Ok(())
}

fn scalar_text(key: &str, v: &toml::Value) -> Result<String, Failure> {
    Ok(match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => f.to_string(),
        toml::Value::Boolean(b) => b.to_string(),
        toml::Value::Array(items) => items
            .iter()
            .map(|x| scalar_text(key, x))
            .collect::<Result<Vec<_>, _>>()?
            .join(","),
        toml::Value::Datetime(_) | toml::Value::Table(_) => {
            return Err(Failure::usage(format!("{key}: unsupported value type")))
        }
    })
}

/// Applies `pairs` in order; the first unknown key or bad value aborts.
pub fn apply(cfg: &mut TrainConfig, pairs: &[(String, String)]) -> Result<(), Failure> {
    for (k, v) in pairs {
        cfg.set(k, v).map_err(|e| Failure::usage(format!("config key {k}: {e}")))?;
    }
    Ok(())
}

/// Parses a `KEY=VALUE` override.
pub fn parse_override(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// The fully resolved config as TOML with dotted keys, one per line.
/// Reading it back through [`flatten`] and [`apply`] reproduces `cfg`.
pub fn echo(cfg: &TrainConfig) -> String {
    let mut s = String::new();
    for (k, v) in cfg.entries() {
        let rendered = if k.ends_with(".hidden") {
            format!("[{}]", v.replace(',', ", "))
        } else if v.parse::<f64>().is_ok() {
            v
        } else {
            format!("{v:?}")
        };
        s.push_str(&format!("{k} = {rendered}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_apply() {
        for (name, _) in PRESETS {
            let mut cfg = TrainConfig::default();
            apply(&mut cfg, &flatten(&load_source(name).unwrap()).unwrap()).unwrap();
            cfg.validate().unwrap();
        }
    }

    #[test]
    fn nested_tables_become_dotted_keys() {
        let pairs = flatten("seed = 3\n[generator.adam]\nlr = 0.001\n[discriminator]\nhidden = [64, 32]\n").unwrap();
        assert_eq!(
            pairs,
            vec![
                ("discriminator.hidden".to_string(), "64,32".to_string()),
                ("generator.adam.lr".to_string(), "0.001".to_string()),
                ("seed".to_string(), "3".to_string()),
            ]
        );
    }

    #[test]
    fn unknown_key_is_named() {
        let mut cfg = TrainConfig::default();
        let err = apply(&mut cfg, &flatten("generator.widht = 3").unwrap()).unwrap_err();
        assert!(err.message.contains("generator.widht"), "{}", err.message);
        assert_eq!(err.code, 1);
    }

    #[test]
    fn echo_round_trips() {
        let mut cfg = TrainConfig::default();
        cfg.set("generator.hidden", "64,32,16").unwrap();
        cfg.set("loss.clamp_epsilon", "1e-9").unwrap();
        cfg.set("objective", "vanilla").unwrap();
        let mut back = TrainConfig::default();
        apply(&mut back, &flatten(&echo(&cfg)).unwrap()).unwrap();
        assert_eq!(back.entries(), cfg.entries());
    }

    #[test]
    fn missing_preset() {
        assert_eq!(load_source("no_such_config").unwrap_err().code, 1);
    }
}
