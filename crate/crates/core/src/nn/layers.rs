use std::collections::HashSet;

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ball;
use super::tape::{Tape, Var};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    #[default]
    Tanh,
    Relu,
}

impl Activation {
    pub fn apply(self, t: &mut Tape, x: Var) -> Var {
        match self {
            Activation::Identity => x,
            Activation::Tanh => t.tanh(x),
            Activation::Relu => t.relu(x),
        }
    }
}

/// Named parameter tensors. Checkpoints serialize this as JSON:
/// `{"params":[{"name":..,"shape":[rows,cols],"data":[row-major values]}]}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(into = "Checkpoint", try_from = "Checkpoint")]
pub struct ParameterSet {
    names: Vec<String>,
    values: Vec<Array2<f64>>,
}

#[derive(Clone, Serialize, Deserialize)]
struct TensorRecord {
    name: String,
    shape: [usize; 2],
    data: Vec<f64>,
}

#[derive(Clone, Serialize, Deserialize)]
struct Checkpoint {
    params: Vec<TensorRecord>,
}

impl From<ParameterSet> for Checkpoint {
    fn from(p: ParameterSet) -> Self {
        let params = p
            .names
            .into_iter()
            .zip(p.values)
            .map(|(name, v)| TensorRecord {
                name,
                shape: [v.nrows(), v.ncols()],
                data: v.iter().copied().collect(),
            })
            .collect();
        Checkpoint { params }
    }
}

impl TryFrom<Checkpoint> for ParameterSet {
    type Error = Error;

    fn try_from(ckpt: Checkpoint) -> Result<Self> {
        let mut out = Self::new();
        let mut seen = HashSet::new();
        for rec in ckpt.params {
            if !seen.insert(rec.name.clone()) {
                return Err(Error::Config(format!("duplicate parameter `{}`", rec.name)));
            }
            let value = Array2::from_shape_vec((rec.shape[0], rec.shape[1]), rec.data)
                .map_err(|e| Error::Dimension(format!("parameter `{}`: {e}", rec.name)))?;
            out.add(rec.name, value);
        }
        Ok(out)
    }
}

impl ParameterSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a tensor and returns its index.
    pub fn add(&mut self, name: impl Into<String>, value: Array2<f64>) -> usize {
        self.names.push(name.into());
        self.values.push(value);
        self.values.len() - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn get(&self, i: usize) -> &Array2<f64> {
        &self.values[i]
    }

    pub fn values(&self) -> &[Array2<f64>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Array2<f64>] {
        &mut self.values
    }

    pub fn by_name(&self, name: &str) -> Option<&Array2<f64>> {
        self.names.iter().position(|n| n == name).map(|i| &self.values[i])
    }

    /// Pushes every parameter onto the tape as a leaf.
    pub fn leaves(&self, t: &mut Tape) -> Vec<Var> {
        self.values.iter().map(|v| t.leaf(v.clone())).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Fully connected layer `y = act(x W + b)` with `W: input x output` and
/// `b: 1 x output`, stored by index into a [`ParameterSet`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub input: usize,
    pub output: usize,
    pub activation: Activation,
    pub weight: usize,
    pub bias: usize,
}

impl DenseLayer {
    /// Glorot-uniform weights, zero bias.
    pub fn init<R: Rng>(
        params: &mut ParameterSet,
        prefix: &str,
        input: usize,
        output: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let limit = (6.0 / (input + output) as f64).sqrt();
        let w = Array2::from_shape_simple_fn((input, output), || rng.gen_range(-limit..limit));
        let weight = params.add(format!("{prefix}.weight"), w);
        let bias = params.add(format!("{prefix}.bias"), Array2::zeros((1, output)));
        Self {
            input,
            output,
            activation,
            weight,
            bias,
        }
    }

    fn check_input(&self, t: &Tape, x: Var) -> Result<()> {
        let cols = t.value(x).ncols();
        if cols != self.input {
            return Err(Error::Dimension(format!(
                "layer expects {} inputs, got {cols}",
                self.input
            )));
        }
        Ok(())
    }

    pub fn forward(&self, t: &mut Tape, vars: &[Var], x: Var) -> Result<Var> {
        self.forward_masked(t, vars, x, None)
    }

    /// As [`forward`](Self::forward), multiplying the activated output by
    /// `mask` (dropout) when given.
    pub fn forward_masked(
        &self,
        t: &mut Tape,
        vars: &[Var],
        x: Var,
        mask: Option<Array2<f64>>,
    ) -> Result<Var> {
        self.check_input(t, x)?;
        let z = t.matmul(x, vars[self.weight]);
        let z = t.add_row(z, vars[self.bias]);
        let y = self.activation.apply(t, z);
        Ok(match mask {
            Some(m) => t.mask_mul(y, m),
            None => y,
        })
    }

    /// `act((W ⊗_c x) ⊕_c exp_0(b))`, with the activation applied in the
    /// tangent space at the origin. `x` rows must lie inside the ball.
    pub fn forward_hyperbolic(&self, t: &mut Tape, vars: &[Var], x: Var, c: f64) -> Result<Var> {
        self.forward_hyperbolic_masked(t, vars, x, c, None)
    }

    /// Hyperbolic forward pass; `mask` multiplies the tangent vector after
    /// the activation.
    pub fn forward_hyperbolic_masked(
        &self,
        t: &mut Tape,
        vars: &[Var],
        x: Var,
        c: f64,
        mask: Option<Array2<f64>>,
    ) -> Result<Var> {
        self.check_input(t, x)?;
        let limit = 1.0 / c.sqrt();
        if let Some(bad) = t
            .value(x)
            .rows()
            .into_iter()
            .map(|r| r.dot(&r).sqrt())
            .find(|&n| !(n < limit))
        {
            return Err(Error::OutsideBall(bad * c.sqrt()));
        }
        let a = ball::mobius_matvec(t, x, vars[self.weight], c);
        Ok(self.hyperbolic_tail(t, vars, a, c, mask))
    }

    /// Hyperbolic layer whose input is given as tangent vectors `u` at the
    /// origin, i.e. the layer applied to `exp_0(u)`. The matrix product is
    /// taken on `u` directly, so large inputs are not clamped to the ball
    /// boundary before the first weight matrix.
    pub fn forward_hyperbolic_from_tangent(
        &self,
        t: &mut Tape,
        vars: &[Var],
        u: Var,
        c: f64,
        mask: Option<Array2<f64>>,
    ) -> Result<Var> {
        self.check_input(t, u)?;
        let m = t.matmul(u, vars[self.weight]);
        let a = ball::exp0(t, m, c);
        Ok(self.hyperbolic_tail(t, vars, a, c, mask))
    }

    fn hyperbolic_tail(
        &self,
        t: &mut Tape,
        vars: &[Var],
        a: Var,
        c: f64,
        mask: Option<Array2<f64>>,
    ) -> Var {
        let b = ball::exp0(t, vars[self.bias], c);
        let n = t.value(a).nrows();
        let b = t.broadcast_rows(b, n);
        let s = ball::mobius_add(t, a, b, c);
        if self.activation == Activation::Identity && mask.is_none() {
            return s;
        }
        let u = ball::log0(t, s, c);
        let u = self.activation.apply(t, u);
        let u = match mask {
            Some(m) => t.mask_mul(u, m),
            None => u,
        };
        ball::exp0(t, u, c)
    }
}
