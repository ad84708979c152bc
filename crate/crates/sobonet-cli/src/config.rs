//! Plain `key = value` config files and the documented parameter ranges.
//!
//! The config carries defaults for run flags and a cache of calibrated
//! rate constants, keyed `ctilde.<activation>.d<d>.n<n>.k<k>`, so repeat
//! runs skip the pilot synthesis.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    pub entries: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut entries = BTreeMap::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("{}:{}: expected key = value", path.display(), ln + 1);
            };
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { entries })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = String::new();
        for (k, v) in &self.entries {
            text.push_str(k);
            text.push_str(" = ");
            text.push_str(v);
            text.push('\n');
        }
        std::fs::write(path, text)
            .with_context(|| format!("writing config {}", path.display()))?;
        Ok(())
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => {
                let parsed: f64 =
                    v.parse().with_context(|| format!("config key {key} is not a number"))?;
                Ok(Some(parsed))
            }
        }
    }
}

pub fn ctilde_key(activation: &str, d: usize, n: u8, k: u8) -> String {
    format!("ctilde.{activation}.d{d}.n{n}.k{k}")
}

/// Documented parameter ranges shared by synth, rates, and codec runs.
/// Violations are usage errors, not contract failures.
pub fn check_ranges(eps: f64, d: usize, n: u8, k: u8, mu: f64) -> Result<(), String> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(format!("eps must lie in (0, 0.5), got {eps}"));
    }
    if d == 0 || d > 3 {
        return Err(format!("d must lie in 1..=3, got {d}"));
    }
    if n == 0 || n > 6 {
        return Err(format!("n must lie in 1..=6, got {n}"));
    }
    if k > 3 {
        return Err(format!("k must lie in 0..=3, got {k}"));
    }
    if k >= n {
        return Err(format!("k must be smaller than n, got k = {k}, n = {n}"));
    }
    if !(mu > 0.0 && mu < 1.0) {
        return Err(format!("mu must lie in (0, 1), got {mu}"));
    }
    Ok(())
}
