//! Feed-forward networks as compositions of semi-affine layers
//! `Z⁽ˡ⁾ = f⁽ˡ⁾(W⁽ˡ⁾ Z⁽ˡ⁻¹⁾ + b⁽ˡ⁾)`.
//!
//! **Observations are columns.** A batch of `n` inputs of dimension `p` is a
//! `p x n` matrix, matching the `W X + b` convention. Tabular code keeps
//! records as rows and transposes at the boundary.

mod io;
mod loss;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::Rng;

pub use loss::{backprop, grad_check, objective, Gradients, LayerGrad, Loss, LossSpec, Penalty};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Relu,
    Tanh,
    Sigmoid,
    /// Columnwise; only allowed on the final layer.
    Softmax,
    /// Step function `1[z > 0]`. Forward only.
    Heaviside,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
            Activation::Softmax => "softmax",
            Activation::Heaviside => "heaviside",
        }
    }

    /// Scalar form. Softmax is not elementwise and is handled by [`Activation::apply`].
    pub fn scalar(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Heaviside => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Softmax => panic!("softmax has no scalar form"),
        }
    }

    pub fn apply(self, pre: &Matrix) -> Matrix {
        match self {
            Activation::Softmax => softmax_columns(pre),
            act => pre.map(|z| act.scalar(z)),
        }
    }

    /// Maps `∂L/∂post` to `∂L/∂pre`. ReLU uses derivative 0 at exactly 0.
    pub fn backward(self, pre: &Matrix, post: &Matrix, grad_post: &Matrix) -> Result<Matrix> {
        let local = |f: &dyn Fn(f64, f64) -> f64| -> Matrix {
            let data = pre
                .as_slice()
                .iter()
                .zip(post.as_slice())
                .zip(grad_post.as_slice())
                .map(|((&z, &a), &g)| g * f(z, a))
                .collect();
            Matrix::from_vec(pre.rows(), pre.cols(), data).expect("same shape")
        };
        Ok(match self {
            Activation::Identity => grad_post.clone(),
            Activation::Relu => local(&|z, _| if z > 0.0 { 1.0 } else { 0.0 }),
            Activation::Tanh => local(&|_, a| 1.0 - a * a),
            Activation::Sigmoid => local(&|_, a| a * (1.0 - a)),
            Activation::Softmax => {
                let mut out = Matrix::zeros(pre.rows(), pre.cols());
                for j in 0..pre.cols() {
                    let inner: f64 = (0..pre.rows())
                        .map(|i| post[(i, j)] * grad_post[(i, j)])
                        .sum();
                    for i in 0..pre.rows() {
                        out[(i, j)] = post[(i, j)] * (grad_post[(i, j)] - inner);
                    }
                }
                out
            }
            Activation::Heaviside => return Err(Error::UnsupportedGradient("heaviside")),
        })
    }
}

/// Columnwise softmax with max subtraction.
pub fn softmax_columns(z: &Matrix) -> Matrix {
    let mut out = z.clone();
    for j in 0..z.cols() {
        let m = (0..z.rows()).map(|i| z[(i, j)]).fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for i in 0..z.rows() {
            let e = (z[(i, j)] - m).exp();
            out[(i, j)] = e;
            total += e;
        }
        for i in 0..z.rows() {
            out[(i, j)] /= total;
        }
    }
    out
}

/// One semi-affine layer `f(W z + b)`; `W` is `out x in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub w: Matrix,
    pub b: Vec<f64>,
    pub act: Activation,
}

impl Layer {
    pub fn new(w: Matrix, b: Vec<f64>, act: Activation) -> Result<Self> {
        if w.rows() != b.len() {
            return Err(Error::shape(format!(
                "weight has {} rows but bias has length {}",
                w.rows(),
                b.len()
            )));
        }
        Ok(Layer { w, b, act })
    }

    pub fn input_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.w.rows()
    }

    /// Pre-activation `W z + b`.
    pub fn affine(&self, input: &Matrix) -> Result<Matrix> {
        let mut pre = self.w.matmul(input)?;
        pre.add_column_broadcast(&self.b);
        Ok(pre)
    }

    pub fn param_count(&self) -> usize {
        self.w.rows() * self.w.cols() + self.b.len()
    }
}

/// Per-layer intermediate values from a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input to each layer (after any input transform such as a dropout mask).
    pub inputs: Vec<Matrix>,
    pub pre: Vec<Matrix>,
    pub post: Vec<Matrix>,
}

impl ForwardCache {
    pub fn output(&self) -> &Matrix {
        self.post.last().expect("network has at least one layer")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    input_dim: usize,
    layers: Vec<Layer>,
}

impl Network {
    pub fn new(input_dim: usize, layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::shape("network needs at least one layer"));
        }
        let mut dim = input_dim;
        for (l, layer) in layers.iter().enumerate() {
            if layer.input_dim() != dim {
                return Err(Error::shape(format!(
                    "layer {l} expects input {} but receives {dim}",
                    layer.input_dim()
                )));
            }
            if layer.act == Activation::Softmax && l + 1 != layers.len() {
                return Err(Error::param(format!(
                    "softmax is only allowed on the final layer (found on layer {l})"
                )));
            }
            dim = layer.output_dim();
        }
        Ok(Network { input_dim, layers })
    }

    /// Random initialization: weights ~ Normal(0, 1/fan_in), biases 0.
    pub fn init(input_dim: usize, widths: &[(usize, Activation)], rng: &mut Rng) -> Result<Self> {
        let mut layers = Vec::with_capacity(widths.len());
        let mut fan_in = input_dim;
        for &(out, act) in widths {
            let sd = (1.0 / fan_in.max(1) as f64).sqrt();
            let w = Matrix::from_fn(out, fan_in, |_, _| sd * rng.normal());
            layers.push(Layer::new(w, vec![0.0; out], act)?);
            fan_in = out;
        }
        Network::new(input_dim, layers)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(self.input_dim, Layer::output_dim)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// All parameters, layer by layer: `W` row-major then `b`.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            out.extend_from_slice(layer.w.as_slice());
            out.extend_from_slice(&layer.b);
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::shape(format!(
                "{} parameters for a network with {}",
                params.len(),
                self.param_count()
            )));
        }
        let mut at = 0;
        for layer in &mut self.layers {
            let nw = layer.w.rows() * layer.w.cols();
            layer.w.as_mut_slice().copy_from_slice(&params[at..at + nw]);
            at += nw;
            let nb = layer.b.len();
            layer.b.copy_from_slice(&params[at..at + nb]);
            at += nb;
        }
        Ok(())
    }

    pub fn with_params(&self, params: &[f64]) -> Result<Network> {
        let mut n = self.clone();
        n.set_params(params)?;
        Ok(n)
    }

    pub fn forward(&self, x: &Matrix) -> Result<ForwardCache> {
        self.forward_with(x, |_, input| input)
    }

    /// Forward pass where `transform(l, input)` may rewrite each layer's input first.
    pub fn forward_with(
        &self,
        x: &Matrix,
        mut transform: impl FnMut(usize, Matrix) -> Matrix,
    ) -> Result<ForwardCache> {
        if x.rows() != self.input_dim {
            return Err(Error::shape(format!(
                "input has {} rows, network expects {} (observations are columns)",
                x.rows(),
                self.input_dim
            )));
        }
        let n = self.layers.len();
        let mut cache = ForwardCache {
            inputs: Vec::with_capacity(n),
            pre: Vec::with_capacity(n),
            post: Vec::with_capacity(n),
        };
        let mut current = x.clone();
        for (l, layer) in self.layers.iter().enumerate() {
            let input = transform(l, current);
            let pre = layer.affine(&input)?;
            let post = layer.act.apply(&pre);
            cache.inputs.push(input);
            cache.pre.push(pre);
            current = post.clone();
            cache.post.push(post);
        }
        Ok(cache)
    }

    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        let mut current = x.clone();
        if x.rows() != self.input_dim {
            return Err(Error::shape(format!(
                "input has {} rows, network expects {}",
                x.rows(),
                self.input_dim
            )));
        }
        for layer in &self.layers {
            current = layer.act.apply(&layer.affine(&current)?);
        }
        Ok(current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_layer_passes_through() {
        let net = Network::new(
            2,
            vec![Layer::new(Matrix::identity(2), vec![0.0; 2], Activation::Identity).unwrap()],
        )
        .unwrap();
        let x = Matrix::from_rows(&[vec![1.0, -2.0, 3.0], vec![0.5, 0.0, 7.0]]).unwrap();
        assert_eq!(net.predict(&x).unwrap(), x);
    }

    #[test]
    fn relu_layer_hand_value() {
        let net = Network::new(
            2,
            vec![Layer::new(Matrix::identity(2), vec![-1.0, 0.0], Activation::Relu).unwrap()],
        )
        .unwrap();
        let out = net.predict(&Matrix::column_vector(&[0.5, 2.0])).unwrap();
        assert_eq!(out.as_slice(), &[0.0, 2.0]);
    }

    #[test]
    fn softmax_columns_sum_to_one() {
        let mut rng = Rng::new(1);
        let net = Network::init(
            10,
            &[
                (64, Activation::Relu),
                (64, Activation::Relu),
                (12, Activation::Softmax),
            ],
            &mut rng,
        )
        .unwrap();
        let x = Matrix::from_fn(10, 30, |_, _| 3.0 * rng.normal());
        let out = net.predict(&x).unwrap();
        for s in out.transpose().row_sums() {
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert!(out.as_slice().iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn softmax_survives_large_logits() {
        let z = Matrix::column_vector(&[1000.0, 999.0, -1000.0]);
        let s = softmax_columns(&z);
        assert!(s.as_slice().iter().all(|v| v.is_finite()));
        assert!((s.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_is_fixed_point_of_relu_and_tanh() {
        assert_eq!(Activation::Relu.scalar(0.0), 0.0);
        assert_eq!(Activation::Tanh.scalar(0.0), 0.0);
    }

    #[test]
    fn shape_errors() {
        let l1 = Layer::new(Matrix::zeros(3, 2), vec![0.0; 3], Activation::Relu).unwrap();
        let l2 = Layer::new(Matrix::zeros(1, 4), vec![0.0; 1], Activation::Identity).unwrap();
        assert!(matches!(Network::new(2, vec![l1.clone(), l2]), Err(Error::Shape(_))));
        assert!(Layer::new(Matrix::zeros(3, 2), vec![0.0; 2], Activation::Relu).is_err());
        let net = Network::new(2, vec![l1]).unwrap();
        assert!(matches!(net.forward(&Matrix::zeros(3, 1)), Err(Error::Shape(_))));
    }

    #[test]
    fn softmax_only_last() {
        let l1 = Layer::new(Matrix::zeros(2, 2), vec![0.0; 2], Activation::Softmax).unwrap();
        let l2 = Layer::new(Matrix::zeros(2, 2), vec![0.0; 2], Activation::Identity).unwrap();
        assert!(Network::new(2, vec![l1, l2]).is_err());
    }

    #[test]
    fn params_round_trip() {
        let mut rng = Rng::new(4);
        let net = Network::init(3, &[(4, Activation::Tanh), (2, Activation::Identity)], &mut rng)
            .unwrap();
        let p = net.params();
        assert_eq!(p.len(), 3 * 4 + 4 + 4 * 2 + 2);
        let rebuilt = net.with_params(&p).unwrap();
        assert_eq!(rebuilt, net);
    }

    #[test]
    fn forward_is_deterministic() {
        let mut rng = Rng::new(8);
        let net = Network::init(3, &[(5, Activation::Sigmoid), (2, Activation::Softmax)], &mut rng)
            .unwrap();
        let x = Matrix::from_fn(3, 7, |_, _| rng.normal());
        assert_eq!(net.predict(&x).unwrap(), net.predict(&x).unwrap());
        assert_eq!(net.forward(&x).unwrap().output(), &net.predict(&x).unwrap());
    }
}
