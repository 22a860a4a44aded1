use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Activation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Euclidean,
    #[default]
    Hyperbolic,
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Geometry::Euclidean => "euclidean",
            Geometry::Hyperbolic => "hyperbolic",
        })
    }
}

impl FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Geometry::Euclidean),
            "hyperbolic" => Ok(Geometry::Hyperbolic),
            other => Err(Error::Config(format!("unknown geometry `{other}`"))),
        }
    }
}

/// Autoencoder and training settings. Unknown keys are rejected when
/// deserializing; missing keys take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DsaeConfig {
    pub geometry: Geometry,
    /// Magnetic charge.
    pub q: f64,
    /// Largest wavelet scale `J`.
    #[serde(alias = "J")]
    pub max_scale: usize,
    /// Number of Gaussian input signals `C`.
    #[serde(alias = "C")]
    pub signals: usize,
    /// Use the degree-normalized magnetic Laplacian.
    pub normalized_laplacian: bool,
    #[serde(alias = "d")]
    pub latent_dim: usize,
    /// Ball curvature `c`; ignored for Euclidean geometry.
    #[serde(alias = "c")]
    pub curvature: f64,
    /// Encoder hidden widths; the decoder mirrors them.
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub dropout: f64,
    pub epochs: usize,
    pub patience: usize,
    /// Fraction of nodes held out for early stopping.
    pub val_fraction: f64,
    pub seed: u64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Contrastive temperature for the property heads.
    pub temperature: f64,
    pub head_hidden: Vec<usize>,
    pub head_dim: usize,
}

impl Default for DsaeConfig {
    fn default() -> Self {
        Self {
            geometry: Geometry::Hyperbolic,
            q: 0.1,
            max_scale: 10,
            signals: 1,
            normalized_laplacian: true,
            latent_dim: 128,
            curvature: 0.1,
            hidden: vec![256],
            activation: Activation::Tanh,
            learning_rate: 1e-3,
            weight_decay: 0.0,
            dropout: 0.0,
            epochs: 50,
            patience: 10,
            val_fraction: 0.1,
            seed: 0,
            alpha: 1.0,
            beta: 0.0,
            gamma: 0.0,
            temperature: 0.1,
            head_hidden: vec![64],
            head_dim: 32,
        }
    }
}

impl DsaeConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.latent_dim == 0 {
            return fail("latent_dim must be >= 1".into());
        }
        if self.epochs == 0 {
            return fail("epochs must be >= 1".into());
        }
        if self.signals == 0 {
            return fail("signals must be >= 1".into());
        }
        if !(self.q >= 0.0 && self.q.is_finite()) {
            return fail(format!("q must be >= 0, got {}", self.q));
        }
        for (name, w) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(w >= 0.0 && w.is_finite()) {
                return fail(format!("{name} must be >= 0, got {w}"));
            }
        }
        if !(self.curvature > 0.0 && self.curvature.is_finite()) {
            return fail(format!("curvature must be > 0, got {}", self.curvature));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail(format!("learning_rate must be > 0, got {}", self.learning_rate));
        }
        if !(self.weight_decay >= 0.0) {
            return fail(format!("weight_decay must be >= 0, got {}", self.weight_decay));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return fail(format!("dropout must be in [0, 1), got {}", self.dropout));
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return fail(format!("val_fraction must be in [0, 1), got {}", self.val_fraction));
        }
        if !(self.temperature > 0.0) {
            return fail(format!("temperature must be > 0, got {}", self.temperature));
        }
        if self.hidden.contains(&0) || self.head_hidden.contains(&0) || self.head_dim == 0 {
            return fail("layer widths must be >= 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = DsaeConfig::default();
        cfg.validate().unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(DsaeConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_config_and_aliases() {
        let cfg = DsaeConfig::from_json(r#"{"geometry":"euclidean","J":5,"d":16}"#).unwrap();
        assert_eq!(cfg.geometry, Geometry::Euclidean);
        assert_eq!(cfg.max_scale, 5);
        assert_eq!(cfg.latent_dim, 16);
        assert_eq!(cfg.epochs, 50);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(DsaeConfig::from_json(r#"{"lattent_dim":3}"#).is_err());
        assert!(DsaeConfig::from_json(r#"{"latent_dim":0}"#).is_err());
        assert!(DsaeConfig::from_json(r#"{"beta":-1.0}"#).is_err());
        assert!(DsaeConfig::from_json(r#"{"q":-0.1}"#).is_err());
        assert!(DsaeConfig::from_json(r#"{"epochs":0}"#).is_err());
    }
}
