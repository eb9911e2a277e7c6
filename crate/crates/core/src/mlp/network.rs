use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::TaskId;
use crate::error::{Error, Result};

/// Clamp applied to predicted probabilities before taking logs.
pub const BCE_EPS: f64 = 1e-7;
pub const LEAKY_SLOPE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    #[serde(rename = "relu")]
    Relu,
    #[serde(rename = "leaky_relu")]
    LeakyRelu,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::LeakyRelu => {
                if z > 0.0 {
                    z
                } else {
                    LEAKY_SLOPE * z
                }
            }
        }
    }

    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::LeakyRelu => {
                if z > 0.0 {
                    1.0
                } else {
                    LEAKY_SLOPE
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptimizerKind {
    #[serde(rename = "adam")]
    Adam,
    #[serde(rename = "rmsprop")]
    RmsProp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HiddenLayer {
    pub units: usize,
    pub dropout: f64,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden: Vec<HiddenLayer>,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    pub l2_lambda: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig::table2(TaskId::I)
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden.is_empty() {
            return Err(Error::InvalidParameter("at least one hidden layer".into()));
        }
        for h in &self.hidden {
            if h.units == 0 {
                return Err(Error::InvalidParameter("hidden layer with 0 units".into()));
            }
            if !(0.0..1.0).contains(&h.dropout) {
                return Err(Error::InvalidParameter(format!("dropout {} not in [0, 1)", h.dropout)));
            }
        }
        if !(self.l2_lambda >= 0.0) || !(self.learning_rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "l2_lambda={} learning_rate={}",
                self.l2_lambda, self.learning_rate
            )));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidParameter("epochs and batch_size must be positive".into()));
        }
        Ok(())
    }

    /// The per-task architectures found by the original random search.
    pub fn table2(task: TaskId) -> Self {
        use Activation::{LeakyRelu, Relu};
        let l = |units, dropout, activation| HiddenLayer {
            units,
            dropout,
            activation,
        };
        let (hidden, optimizer) = match task {
            TaskId::I => (vec![l(28, 0.1, LeakyRelu), l(27, 0.5, LeakyRelu)], OptimizerKind::Adam),
            TaskId::II => (vec![l(25, 0.2, Relu)], OptimizerKind::RmsProp),
            TaskId::III => (vec![l(26, 0.6, LeakyRelu), l(10, 0.9, LeakyRelu)], OptimizerKind::Adam),
            TaskId::IV => (vec![l(26, 0.2, Relu), l(26, 0.9, LeakyRelu)], OptimizerKind::Adam),
            TaskId::V => (vec![l(23, 0.4, Relu)], OptimizerKind::RmsProp),
            // second-layer activation is not listed; the first layer's is reused
            TaskId::VI => (vec![l(26, 0.1, Relu), l(8, 0.6, Relu)], OptimizerKind::Adam),
        };
        MlpConfig {
            hidden,
            optimizer,
            learning_rate: 1e-3,
            l2_lambda: 0.01,
            epochs: 200,
            batch_size: 32,
            seed: 0,
        }
    }
}

/// `-[y ln p + (1 - y) ln(1 - p)]` with `p` clamped to `[eps, 1 - eps]`.
pub fn bce_loss(y: f64, y_hat: f64) -> f64 {
    let p = y_hat.clamp(BCE_EPS, 1.0 - BCE_EPS);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

/// Eval-mode passes draw nothing; any generator will do.
fn eval_rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0)
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Dense network with a single sigmoid output. All parameters live in one flat vector:
/// for each layer, the `[out, in]` weight matrix (row-major) followed by its bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layer_dims: Vec<usize>,
    pub params: Vec<f64>,
    pub config: MlpConfig,
}

/// Activations kept from a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input to every layer (the last entry feeds the output unit).
    pub inputs: Vec<Array2<f64>>,
    /// Hidden-layer pre-activations.
    pub pre: Vec<Array2<f64>>,
    /// Inverted-dropout masks (already scaled by `1 / keep`), when active.
    pub masks: Vec<Option<Array2<f64>>>,
    pub output: Vec<f64>,
}

impl MlpModel {
    /// Fan-in scaled uniform weights, zero biases.
    pub fn new(input_dim: usize, config: MlpConfig, rng: &mut impl Rng) -> Result<Self> {
        config.validate()?;
        if input_dim == 0 {
            return Err(Error::InvalidParameter("input dimension 0".into()));
        }
        let mut layer_dims = vec![input_dim];
        layer_dims.extend(config.hidden.iter().map(|h| h.units));
        layer_dims.push(1);
        let mut params = Vec::new();
        for w in layer_dims.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / fan_in as f64).sqrt();
            params.extend((0..fan_in * fan_out).map(|_| rng.random_range(-limit..limit)));
            params.extend(std::iter::repeat_n(0.0, fan_out));
        }
        Ok(Self {
            layer_dims,
            params,
            config,
        })
    }

    pub fn zeros(input_dim: usize, config: MlpConfig) -> Result<Self> {
        let mut m = Self::new(input_dim, config, &mut eval_rng())?;
        m.params.iter_mut().for_each(|p| *p = 0.0);
        Ok(m)
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn n_layers(&self) -> usize {
        self.layer_dims.len() - 1
    }

    /// Offset of layer `l`'s weights, and of its bias.
    fn offsets(&self, l: usize) -> (usize, usize) {
        let mut off = 0;
        for k in 0..l {
            off += self.layer_dims[k] * self.layer_dims[k + 1] + self.layer_dims[k + 1];
        }
        (off, off + self.layer_dims[l] * self.layer_dims[l + 1])
    }

    pub fn weights(&self, l: usize) -> ArrayView2<'_, f64> {
        let (w, b) = self.offsets(l);
        ArrayView2::from_shape((self.layer_dims[l + 1], self.layer_dims[l]), &self.params[w..b]).unwrap()
    }

    pub fn bias(&self, l: usize) -> ArrayView1<'_, f64> {
        let (_, b) = self.offsets(l);
        ArrayView1::from(&self.params[b..b + self.layer_dims[l + 1]])
    }

    /// Whether flat index `i` is a weight (as opposed to a bias).
    pub fn is_weight(&self, i: usize) -> bool {
        (0..self.n_layers()).any(|l| {
            let (w, b) = self.offsets(l);
            (w..b).contains(&i)
        })
    }

    pub fn forward_batch(&self, x: ArrayView2<'_, f64>, train_mode: bool, rng: &mut impl Rng) -> Result<ForwardCache> {
        if x.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "mlp input",
                expected: self.input_dim(),
                found: x.ncols(),
            });
        }
        let mut a = x.to_owned();
        let mut inputs = Vec::with_capacity(self.n_layers());
        let mut pre = Vec::with_capacity(self.n_layers() - 1);
        let mut masks = Vec::with_capacity(self.n_layers() - 1);
        for (l, layer) in self.config.hidden.iter().enumerate() {
            let z = a.dot(&self.weights(l).t()) + self.bias(l);
            let mut h = z.mapv(|v| layer.activation.apply(v));
            let mask = if train_mode && layer.dropout > 0.0 {
                let keep = 1.0 - layer.dropout;
                let m = Array2::from_shape_fn(h.dim(), |_| if rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 });
                h *= &m;
                Some(m)
            } else {
                None
            };
            inputs.push(std::mem::replace(&mut a, h));
            pre.push(z);
            masks.push(mask);
        }
        let last = self.n_layers() - 1;
        let z = a.dot(&self.weights(last).t()) + self.bias(last);
        inputs.push(a);
        let output = z.column(0).iter().map(|&v| sigmoid(v)).collect();
        Ok(ForwardCache {
            inputs,
            pre,
            masks,
            output,
        })
    }

    /// Single-example forward pass.
    pub fn forward(&self, x: &[f64], train_mode: bool, rng: &mut impl Rng) -> Result<(f64, ForwardCache)> {
        let view = ArrayView2::from_shape((1, x.len()), x).expect("row");
        let cache = self.forward_batch(view, train_mode, rng)?;
        Ok((cache.output[0], cache))
    }

    /// Eval-mode probabilities of class 1.
    pub fn predict_proba(&self, x: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        let mut no_rng = eval_rng();
        Ok(self.forward_batch(x, false, &mut no_rng)?.output)
    }

    /// Class 1 when the probability is at least 0.5.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<u8>> {
        Ok(self.predict_proba(x)?.into_iter().map(|p| u8::from(p >= 0.5)).collect())
    }

    /// `(lambda / 2) * sum of squared weights` (biases excluded).
    pub fn l2_penalty(&self) -> f64 {
        let sq: f64 = (0..self.n_layers()).map(|l| self.weights(l).iter().map(|w| w * w).sum::<f64>()).sum();
        0.5 * self.config.l2_lambda * sq
    }

    /// Mean clamped BCE of `cache.output` against `y`, plus the L2 penalty.
    pub fn loss(&self, cache: &ForwardCache, y: &[f64]) -> f64 {
        let bce: f64 = cache.output.iter().zip(y).map(|(&p, &t)| bce_loss(t, p)).sum();
        bce / y.len() as f64 + self.l2_penalty()
    }

    /// Eval-mode loss on a labelled batch.
    pub fn objective(&self, x: ArrayView2<'_, f64>, y: &[f64]) -> Result<f64> {
        let mut no_rng = eval_rng();
        let cache = self.forward_batch(x, false, &mut no_rng)?;
        Ok(self.loss(&cache, y))
    }

    /// Gradient of [`MlpModel::loss`] with respect to every parameter, in `params` layout.
    pub fn backward(&self, cache: &ForwardCache, y: &[f64]) -> Vec<f64> {
        let batch = y.len() as f64;
        let lambda = self.config.l2_lambda;
        let mut grads = vec![0.0; self.params.len()];
        let mut delta = Array2::from_shape_fn((y.len(), 1), |(i, _)| (cache.output[i] - y[i]) / batch);
        for l in (0..self.n_layers()).rev() {
            let (w_off, b_off) = self.offsets(l);
            let (n_out, n_in) = (self.layer_dims[l + 1], self.layer_dims[l]);
            {
                let mut gw = ArrayViewMut2::from_shape((n_out, n_in), &mut grads[w_off..b_off]).unwrap();
                gw.assign(&delta.t().dot(&cache.inputs[l]));
                gw.scaled_add(lambda, &self.weights(l));
            }
            let gb: Array1<f64> = delta.sum_axis(Axis(0));
            grads[b_off..b_off + n_out].copy_from_slice(gb.as_slice().unwrap());
            if l == 0 {
                break;
            }
            let mut d_prev = delta.dot(&self.weights(l));
            let h = l - 1;
            if let Some(mask) = &cache.masks[h] {
                d_prev *= mask;
            }
            let act = self.config.hidden[h].activation;
            d_prev.zip_mut_with(&cache.pre[h], |d, &z| *d *= act.derivative(z));
            delta = d_prev;
        }
        grads
    }
}
