//! Sweep templates: a base config plus `vary.<key> = v1, v2, ...` lines,
//! expanded into one complete config file per cartesian combination.
//!
//! File naming is deterministic: varying keys sorted by name, rendered as
//! `key1=v1_key2=v2.conf`. Unless the user varies `out_dir` explicitly, each
//! generated config gets its own results subdirectory so experiments never
//! clobber each other.

use thiserror::Error;

use swarmloc_core::engine::{ConfigError, ExperimentConfig};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("template parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown config key in template: {0}")]
    UnknownKey(String),
    #[error("vary.{0} has no values")]
    EmptyValues(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone)]
pub struct SweepTemplate {
    pub base: ExperimentConfig,
    /// Varying keys in template order: `(key, values)`.
    pub varying: Vec<(String, Vec<String>)>,
}

/// Splits a vary list: on `;` when present (for values that themselves
/// contain commas, like dispatcher triples), otherwise on `,`.
fn split_values(raw: &str) -> Vec<String> {
    let sep = if raw.contains(';') { ';' } else { ',' };
    raw.split(sep)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

pub fn parse_template(text: &str) -> Result<SweepTemplate, SweepError> {
    let mut base = ExperimentConfig::default();
    let mut varying: Vec<(String, Vec<String>)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(SweepError::Parse {
                line: lineno + 1,
                msg: format!("expected `key = value`, got {raw:?}"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        if let Some(vary_key) = key.strip_prefix("vary.") {
            let values = split_values(value);
            if values.is_empty() {
                return Err(SweepError::EmptyValues(vary_key.to_string()));
            }
            // Schema check: every varying key must exist in the config and
            // every value must parse.
            let mut probe = base.clone();
            for v in &values {
                probe.set(vary_key, v).map_err(|e| match e {
                    ConfigError::UnknownKey(k) => SweepError::UnknownKey(k),
                    other => SweepError::Config(other),
                })?;
            }
            varying.push((vary_key.to_string(), values));
        } else {
            base.set(key, value).map_err(|e| match e {
                ConfigError::UnknownKey(k) => SweepError::UnknownKey(k),
                other => SweepError::Config(other),
            })?;
        }
    }
    Ok(SweepTemplate { base, varying })
}

fn sanitize(value: &str) -> String {
    value
        .chars()
        .map(|c| if c == '/' || c == '\\' || c.is_whitespace() { '-' } else { c })
        .collect()
}

/// Expands the cartesian product. An empty varying map yields exactly the
/// base config as `base.conf`.
pub fn generate(template: &SweepTemplate) -> Result<Vec<(String, ExperimentConfig)>, SweepError> {
    if template.varying.is_empty() {
        return Ok(vec![("base.conf".to_string(), template.base.clone())]);
    }

    let mut keys: Vec<&(String, Vec<String>)> = template.varying.iter().collect();
    keys.sort_by(|a, b| a.0.cmp(&b.0));
    let user_varies_out_dir = keys.iter().any(|(k, _)| k == "out_dir");

    let total: usize = keys.iter().map(|(_, vs)| vs.len()).product();
    let mut out = Vec::with_capacity(total);
    let mut indices = vec![0usize; keys.len()];
    loop {
        let mut cfg = template.base.clone();
        let mut name_parts = Vec::with_capacity(keys.len());
        for (slot, (key, values)) in keys.iter().enumerate() {
            let value = &values[indices[slot]];
            cfg.set(key, value)?;
            name_parts.push(format!("{key}={}", sanitize(value)));
        }
        let stem = name_parts.join("_");
        if !user_varies_out_dir {
            let base_dir = template.base.out_dir.trim_end_matches('/');
            cfg.out_dir = if base_dir.is_empty() {
                stem.clone()
            } else {
                format!("{base_dir}/{stem}")
            };
        }
        out.push((format!("{stem}.conf"), cfg));

        // Odometer increment, last key fastest.
        let mut slot = keys.len();
        loop {
            if slot == 0 {
                return Ok(out);
            }
            slot -= 1;
            indices[slot] += 1;
            if indices[slot] < keys[slot].1.len() {
                break;
            }
            indices[slot] = 0;
        }
    }
}
