//! JSON run configuration. Every block is optional; missing keys take their
//! defaults and unknown keys are rejected.

use std::path::Path;

use anyhow::{anyhow, Context};
use dsae_core::inference::SpatialOptions;
use dsae_core::linkpred::{BenchConfig, SplitRatios};
use dsae_core::DsaeConfig;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    /// Overrides applied on top of the command's autoencoder defaults.
    pub dsae: Map<String, Value>,
    pub linkpred: LinkpredOptions,
    pub inference: InferenceOptions,
    pub spatial: SpatialOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkpredOptions {
    pub runs: usize,
    pub split: SplitRatios,
    /// Explicit grid; takes precedence over `ablation`.
    pub grid: Option<Vec<BenchConfig>>,
    /// Run the charge x scale ablation plus the no-autoencoder row.
    pub ablation: bool,
}

impl Default for LinkpredOptions {
    fn default() -> Self {
        Self {
            runs: 5,
            split: SplitRatios::default(),
            grid: None,
            ablation: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InferenceOptions {
    pub type_a: Option<String>,
    pub type_b: Option<String>,
    pub k: usize,
    pub lfc_threshold: f64,
    pub p_threshold: f64,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        Self {
            type_a: None,
            type_b: None,
            k: dsae_core::inference::DEFAULT_K,
            lfc_threshold: 2.0,
            p_threshold: 0.05,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("config {}", path.display()))
    }

    /// `base` with the `dsae` block applied, seed set to `seed`.
    pub fn resolve_dsae(&self, base: DsaeConfig, seed: u64) -> anyhow::Result<DsaeConfig> {
        let mut merged = serde_json::to_value(base)?;
        let fields = merged.as_object_mut().expect("config serializes to an object");
        for (key, value) in &self.dsae {
            let key = match key.as_str() {
                "J" => "max_scale",
                "C" => "signals",
                "d" => "latent_dim",
                "c" => "curvature",
                other => other,
            };
            fields.insert(key.to_string(), value.clone());
        }
        let mut cfg: DsaeConfig = serde_json::from_value(merged).map_err(|e| anyhow!("dsae block: {e}"))?;
        cfg.seed = seed;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_and_aliases() {
        let cfg: RunConfig = serde_json::from_str(r#"{"dsae": {"J": 4, "epochs": 3}, "seed": 9}"#).unwrap();
        let d = cfg.resolve_dsae(DsaeConfig::default(), 9).unwrap();
        assert_eq!((d.max_scale, d.epochs, d.seed), (4, 3, 9));
        assert_eq!(d.latent_dim, DsaeConfig::default().latent_dim);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"dsea": {}}"#).is_err());
        let cfg: RunConfig = serde_json::from_str(r#"{"dsae": {"epoch": 3}}"#).unwrap();
        assert!(cfg.resolve_dsae(DsaeConfig::default(), 0).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"linkpred": {"run": 3}}"#).is_err());
    }
}
