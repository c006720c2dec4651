//! Toolkit settings from `key = value` or JSON files.
//!
//! Keys are dotted paths: `seed`, `crop_size`, `timing`,
//! `fingerprint.{sigma0,levels,family,epsilon,pce_neighborhood}`,
//! `attack.<parameter>` and
//! `simulate.{cameras,images_per_camera,size,strength,additive_sigma,seed}`.
//! A JSON file uses the same paths as nested objects.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde_json::Value;

use crate::attacks::{AttackKind, AttackParams, AttackSpec};
use crate::bench::BenchConfig;
use crate::error::{Error, Result};
use crate::simulate::SimulationConfig;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ToolkitConfig {
    pub bench: BenchConfig,
    /// Attack parameters applied on top of each kind's defaults.
    pub attack_overrides: BTreeMap<String, String>,
    pub simulation: SimulationConfig,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
}

impl ToolkitConfig {
    /// Reads a file; content starting with `{` is JSON, anything else is
    /// `key = value` lines.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::default();
        if text.trim_start().starts_with('{') {
            config.apply_json(&text)?;
        } else {
            config.apply_key_values(&text)?;
        }
        Ok(config)
    }

    /// `key = value` per line; blank lines and `#` comments are skipped.
    pub fn apply_key_values(&mut self, text: &str) -> Result<()> {
        for (number, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", number + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn apply_json(&mut self, text: &str) -> Result<()> {
        let value: Value = serde_json::from_str(text)?;
        let mut flat = Vec::new();
        flatten("", &value, &mut flat)?;
        for (key, value) in flat {
            self.set(&key, &value)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let fp = &mut self.bench.fingerprint;
        let sim = &mut self.simulation;
        match key {
            "seed" => self.bench.seed = parse(key, value)?,
            "crop_size" | "crop" => self.bench.crop_size = parse(key, value)?,
            "timing" => self.bench.timing = parse(key, value)?,
            "fingerprint.sigma0" => fp.denoise.sigma0 = parse(key, value)?,
            "fingerprint.levels" => fp.denoise.levels = parse(key, value)?,
            "fingerprint.family" => fp.denoise.family = value.trim().parse()?,
            "fingerprint.epsilon" => fp.epsilon = parse(key, value)?,
            "fingerprint.pce_neighborhood" => fp.pce_neighborhood = parse(key, value)?,
            "simulate.cameras" => sim.cameras = parse(key, value)?,
            "simulate.images_per_camera" => sim.images_per_camera = parse(key, value)?,
            "simulate.size" => sim.size = parse(key, value)?,
            "simulate.strength" => sim.strength = parse(key, value)?,
            "simulate.additive_sigma" => sim.additive_sigma = parse(key, value)?,
            "simulate.seed" => sim.seed = parse(key, value)?,
            _ => match key.strip_prefix("attack.") {
                Some(param) => {
                    // Reject unknown names and bad values now rather than at use.
                    AttackParams::default()
                        .set(param, value)
                        .map_err(|e| Error::Config(e.to_string()))?;
                    self.attack_overrides
                        .insert(param.to_string(), value.trim().to_string());
                }
                None => return Err(Error::Config(format!("unknown setting {key:?}"))),
            },
        }
        self.validate()
    }

    fn validate(&self) -> Result<()> {
        let fp = &self.bench.fingerprint;
        if !(fp.denoise.sigma0 > 0.0) || fp.denoise.levels == 0 {
            return Err(Error::Config("fingerprint sigma0 must be positive and levels >= 1".into()));
        }
        if !(fp.epsilon >= 0.0) || fp.pce_neighborhood % 2 == 0 {
            return Err(Error::Config(
                "epsilon must be non-negative and the PCE neighborhood odd".into(),
            ));
        }
        if self.bench.crop_size == 0 {
            return Err(Error::Config("crop size must be positive".into()));
        }
        Ok(())
    }

    /// Kind defaults, then config overrides, then `extra` (CLI) overrides.
    pub fn attack_spec(&self, kind: AttackKind, seed: u64, extra: &[(String, String)]) -> Result<AttackSpec> {
        let mut spec = AttackSpec::new(kind, seed);
        for (key, value) in self.attack_overrides.iter().map(|(k, v)| (k.as_str(), v.as_str())) {
            spec.params.set(key, value)?;
        }
        for (key, value) in extra {
            spec.params.set(key, value)?;
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) -> Result<()> {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                // Tables stay whole.
                if prefix == "attack" && k == "dct_table" {
                    out.push((key, v.to_string()));
                } else {
                    flatten(&key, v, out)?;
                }
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Number(n) => out.push((prefix.to_string(), n.to_string())),
        Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
        Value::Null | Value::Array(_) => {
            return Err(Error::Config(format!("unsupported value for {prefix}")));
        }
    }
    Ok(())
}
