use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{DsaeConfig, Geometry};
use crate::error::{Error, Result};
use crate::hyperbolic::{log0_raw, poincare_dist_raw};
use crate::nn::loss::{mse, supervised_contrastive};
use crate::nn::{ball, Activation, DenseLayer, ParameterSet, Tape, Var};
use crate::scattering::ScatteringFeatures;

/// Per-column z-scoring; zero-variance columns keep unit scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Array1<f64>,
    pub scale: Array1<f64>,
}

impl Standardizer {
    pub fn fit(x: &ArrayView2<f64>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::Empty("cannot standardize zero rows".into()));
        }
        let mean = x.mean_axis(Axis(0)).expect("non-empty");
        let scale = x
            .std_axis(Axis(0), 0.0)
            .mapv(|s| if s > 1e-12 && s.is_finite() { s } else { 1.0 });
        Ok(Self { mean, scale })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.dim() {
            return Err(Error::Dimension(format!(
                "features have {} columns, model expects {}",
                x.ncols(),
                self.dim()
            )));
        }
        Ok((x - &self.mean) / &self.scale)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropertyKind {
    Contrastive,
    Mse,
}

impl FromStr for PropertyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "contrastive" => Ok(PropertyKind::Contrastive),
            "mse" => Ok(PropertyKind::Mse),
            other => Err(Error::Config(format!("unknown property loss `{other}`"))),
        }
    }
}

/// Regression or class targets for a property head, aligned to rows.
#[derive(Debug, Clone, PartialEq)]
pub enum PropertyTargets {
    Classes(Vec<usize>),
    Values(Array2<f64>),
}

impl PropertyTargets {
    pub fn len(&self) -> usize {
        match self {
            PropertyTargets::Classes(c) => c.len(),
            PropertyTargets::Values(v) => v.nrows(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn select(&self, rows: &[usize]) -> Self {
        match self {
            PropertyTargets::Classes(c) => PropertyTargets::Classes(rows.iter().map(|&r| c[r]).collect()),
            PropertyTargets::Values(v) => PropertyTargets::Values(v.select(Axis(0), rows)),
        }
    }
}

/// `dist(p(v), F(input_v))` summed over rows. `head` is a Euclidean layer
/// stack; an empty stack is the identity.
pub fn property_loss(
    t: &mut Tape,
    vars: &[Var],
    head: &[DenseLayer],
    input: Var,
    targets: &PropertyTargets,
    kind: PropertyKind,
    temperature: f64,
) -> Result<Var> {
    let n = t.value(input).nrows();
    if targets.len() != n {
        return Err(Error::Dimension(format!("{} targets for {n} rows", targets.len())));
    }
    let mut h = input;
    for layer in head {
        h = layer.forward(t, vars, h)?;
    }
    match (kind, targets) {
        (PropertyKind::Contrastive, PropertyTargets::Classes(labels)) => {
            supervised_contrastive(t, h, labels, temperature)
        }
        (PropertyKind::Mse, PropertyTargets::Values(values)) => {
            if values.ncols() != t.value(h).ncols() {
                return Err(Error::Dimension(format!(
                    "head outputs {} values, targets have {}",
                    t.value(h).ncols(),
                    values.ncols()
                )));
            }
            let target = t.leaf(values.clone());
            Ok(mse(t, h, target))
        }
        (kind, _) => Err(Error::Config(format!("targets do not fit a {kind:?} loss"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyHead {
    pub name: String,
    pub kind: PropertyKind,
    pub layers: Vec<DenseLayer>,
}

/// Trained encoder/decoder pair with optional property heads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingModel {
    pub config: DsaeConfig,
    pub standardizer: Standardizer,
    pub params: ParameterSet,
    pub encoder: Vec<DenseLayer>,
    pub decoder: Vec<DenseLayer>,
    pub heads: Vec<PropertyHead>,
}

fn stack<R: Rng>(
    params: &mut ParameterSet,
    prefix: &str,
    widths: &[usize],
    activation: Activation,
    rng: &mut R,
) -> Vec<DenseLayer> {
    let last = widths.len() - 2;
    widths
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let act = if i == last { Activation::Identity } else { activation };
            DenseLayer::init(params, &format!("{prefix}.{i}"), w[0], w[1], act, rng)
        })
        .collect()
}

impl EmbeddingModel {
    /// Fresh model for `standardizer.dim()` input features. `head_names`
    /// lists the contrastive heads to create.
    pub fn init<R: Rng>(
        config: &DsaeConfig,
        standardizer: Standardizer,
        head_names: &[&str],
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        let f = standardizer.dim();
        if f == 0 {
            return Err(Error::Empty("model needs at least one input feature".into()));
        }
        let mut enc_widths = vec![f];
        enc_widths.extend(&config.hidden);
        enc_widths.push(config.latent_dim);
        let dec_widths: Vec<usize> = enc_widths.iter().rev().copied().collect();

        let mut params = ParameterSet::new();
        let encoder = stack(&mut params, "encoder", &enc_widths, config.activation, rng);
        let decoder = stack(&mut params, "decoder", &dec_widths, config.activation, rng);
        let heads = head_names
            .iter()
            .map(|name| {
                let mut widths = vec![config.latent_dim];
                widths.extend(&config.head_hidden);
                widths.push(config.head_dim);
                PropertyHead {
                    name: name.to_string(),
                    kind: PropertyKind::Contrastive,
                    layers: stack(&mut params, name, &widths, config.activation, rng),
                }
            })
            .collect();
        Ok(Self {
            config: config.clone(),
            standardizer,
            params,
            encoder,
            decoder,
            heads,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.standardizer.dim()
    }

    pub fn geometry(&self) -> Geometry {
        self.config.geometry
    }

    pub fn head(&self, name: &str) -> Option<&PropertyHead> {
        self.heads.iter().find(|h| h.name == name)
    }

    /// Encoder forward pass on standardized features. `masks` supplies one
    /// dropout mask per hidden layer when training.
    pub(crate) fn encode(
        &self,
        t: &mut Tape,
        vars: &[Var],
        x: Var,
        masks: Option<&mut dyn FnMut(usize, usize) -> Array2<f64>>,
    ) -> Result<Var> {
        self.run_stack(t, vars, &self.encoder, x, true, masks)
    }

    /// Decoder forward pass from latent points to Euclidean reconstructions.
    pub(crate) fn decode(
        &self,
        t: &mut Tape,
        vars: &[Var],
        z: Var,
        masks: Option<&mut dyn FnMut(usize, usize) -> Array2<f64>>,
    ) -> Result<Var> {
        let out = self.run_stack(t, vars, &self.decoder, z, false, masks)?;
        Ok(match self.config.geometry {
            Geometry::Euclidean => out,
            Geometry::Hyperbolic => ball::log0(t, out, self.config.curvature),
        })
    }

    fn run_stack(
        &self,
        t: &mut Tape,
        vars: &[Var],
        layers: &[DenseLayer],
        x: Var,
        tangent_input: bool,
        mut masks: Option<&mut dyn FnMut(usize, usize) -> Array2<f64>>,
    ) -> Result<Var> {
        let c = self.config.curvature;
        let n = t.value(x).nrows();
        let mut h = x;
        for (i, layer) in layers.iter().enumerate() {
            let hidden = i + 1 < layers.len();
            let mask = match (&mut masks, hidden) {
                (Some(m), true) => Some(m(n, layer.output)),
                _ => None,
            };
            h = match self.config.geometry {
                Geometry::Euclidean => layer.forward_masked(t, vars, h, mask)?,
                Geometry::Hyperbolic if i == 0 && tangent_input => {
                    layer.forward_hyperbolic_from_tangent(t, vars, h, c, mask)?
                }
                Geometry::Hyperbolic => layer.forward_hyperbolic_masked(t, vars, h, c, mask)?,
            };
        }
        Ok(h)
    }

    /// Latent coordinates fed to property heads and edge scorers: the
    /// latent itself, or its `log_0` for hyperbolic models.
    pub(crate) fn head_input(&self, t: &mut Tape, z: Var) -> Var {
        match self.config.geometry {
            Geometry::Euclidean => z,
            Geometry::Hyperbolic => ball::log0(t, z, self.config.curvature),
        }
    }

    /// Deterministic encoding of raw (unstandardized) feature rows.
    pub fn encode_features(&self, features: &ArrayView2<f64>) -> Result<Array2<f64>> {
        let x = self.standardizer.apply(features)?;
        let mut t = Tape::new();
        let vars = self.params.leaves(&mut t);
        let xv = t.leaf(x);
        let z = self.encode(&mut t, &vars, xv, None)?;
        Ok(t.value(z).clone())
    }

    /// Reconstruction of raw feature rows in standardized units.
    pub fn reconstruct(&self, features: &ArrayView2<f64>) -> Result<Array2<f64>> {
        let x = self.standardizer.apply(features)?;
        let mut t = Tape::new();
        let vars = self.params.leaves(&mut t);
        let xv = t.leaf(x);
        let z = self.encode(&mut t, &vars, xv, None)?;
        let r = self.decode(&mut t, &vars, z, None)?;
        Ok(t.value(r).clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Encoder output for every vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeEmbeddings {
    pub matrix: Array2<f64>,
    pub geometry: Geometry,
    /// Ball curvature for hyperbolic embeddings.
    pub curvature: f64,
    pub names: Vec<String>,
}

impl NodeEmbeddings {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n() {
            return Err(Error::Dimension(format!("{} names for {} rows", names.len(), self.n())));
        }
        self.names = names;
        Ok(self)
    }

    /// Coordinates usable by Euclidean downstream models: rows as stored, or
    /// `log_0` of each row for ball points.
    pub fn tangent(&self) -> Array2<f64> {
        match self.geometry {
            Geometry::Euclidean => self.matrix.clone(),
            Geometry::Hyperbolic => {
                let mut out = self.matrix.clone();
                for mut row in out.rows_mut() {
                    let v = log0_raw(&row.view(), self.curvature);
                    row.assign(&v);
                }
                out
            }
        }
    }

    /// Distance between two rows under the embedding's geometry.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let (x, y) = (self.matrix.row(a), self.matrix.row(b));
        match self.geometry {
            Geometry::Euclidean => (&x - &y).mapv(|d| d * d).sum().sqrt(),
            Geometry::Hyperbolic => poincare_dist_raw(&x, &y, self.curvature),
        }
    }

    /// Largest `√c‖z‖` over rows for hyperbolic embeddings; errors if any
    /// row is not finite or not strictly inside the ball.
    pub fn check(&self) -> Result<f64> {
        if self.matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("embedding has non-finite entries".into()));
        }
        if self.geometry == Geometry::Euclidean {
            return Ok(0.0);
        }
        let sc = self.curvature.sqrt();
        let worst = self
            .matrix
            .rows()
            .into_iter()
            .map(|r| r.dot(&r).sqrt() * sc)
            .fold(0.0f64, f64::max);
        if worst >= 1.0 {
            return Err(Error::OutsideBall(worst));
        }
        Ok(worst)
    }

    /// CSV `vertex,dim_0,..,dim_{d-1},geometry`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<()> {
        write!(out, "vertex")?;
        for k in 0..self.dim() {
            write!(out, ",dim_{k}")?;
        }
        writeln!(out, ",geometry")?;
        for (v, row) in self.matrix.rows().into_iter().enumerate() {
            let label = self.names.get(v).cloned().unwrap_or_else(|| v.to_string());
            write!(out, "{label}")?;
            for x in row {
                write!(out, ",{x}")?;
            }
            writeln!(out, ",{}", self.geometry)?;
        }
        Ok(())
    }
}

/// Embeds every row of `features` with a trained model.
pub fn embed(model: &EmbeddingModel, features: &ScatteringFeatures) -> Result<NodeEmbeddings> {
    let matrix = model.encode_features(&features.matrix.view())?;
    Ok(NodeEmbeddings {
        matrix,
        geometry: model.geometry(),
        curvature: model.config.curvature,
        names: (0..features.n_vertices()).map(|v| v.to_string()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn standardizer_handles_constant_columns() {
        let x = array![[1.0, 5.0], [3.0, 5.0]];
        let s = Standardizer::fit(&x.view()).unwrap();
        let z = s.apply(&x.view()).unwrap();
        assert_eq!(z, array![[-1.0, 0.0], [1.0, 0.0]]);
        assert!(s.apply(&array![[1.0]].view()).is_err());
    }

    #[test]
    fn mse_property_with_identity_head_is_zero() {
        let emb = array![[0.5, -1.0], [2.0, 0.25]];
        let mut t = Tape::new();
        let e = t.leaf(emb.clone());
        let l = property_loss(&mut t, &[], &[], e, &PropertyTargets::Values(emb), PropertyKind::Mse, 0.1)
            .unwrap();
        assert_eq!(t.scalar(l), 0.0);
    }

    #[test]
    fn contrastive_property_matches_hand_example() {
        let emb = array![[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];
        let mut t = Tape::new();
        let e = t.leaf(emb);
        let targets = PropertyTargets::Classes(vec![0, 0, 1, 1]);
        let l = property_loss(&mut t, &[], &[], e, &targets, PropertyKind::Contrastive, 1.0).unwrap();
        let want = -4.0 * ((-1.0f64).exp() / ((-1.0f64).exp() + 2.0)).ln();
        assert!((t.scalar(l) - want).abs() < 1e-12);
    }

    #[test]
    fn property_kind_parsing() {
        assert_eq!("mse".parse::<PropertyKind>().unwrap(), PropertyKind::Mse);
        assert!("hinge".parse::<PropertyKind>().is_err());
        let mut t = Tape::new();
        let e = t.leaf(array![[1.0], [2.0]]);
        let wrong = PropertyTargets::Classes(vec![0, 0]);
        assert!(property_loss(&mut t, &[], &[], e, &wrong, PropertyKind::Mse, 0.1).is_err());
    }

    #[test]
    fn embedding_csv_layout() {
        let emb = NodeEmbeddings {
            matrix: array![[0.1, 0.2], [0.0, -0.3]],
            geometry: Geometry::Hyperbolic,
            curvature: 1.0,
            names: vec!["a".into(), "b".into()],
        };
        let mut buf = Vec::new();
        emb.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "vertex,dim_0,dim_1,geometry\na,0.1,0.2,hyperbolic\nb,0,-0.3,hyperbolic\n"
        );
        assert!(emb.check().unwrap() < 1.0);
    }
}
