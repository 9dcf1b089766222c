use crate::error::{Error, Result};
use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Identity,
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative expressed through the activation's output `y`.
    fn derivative(self, y: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
        }
    }
}

/// Fully connected network with rectifier hidden layers. Weights are stored
/// `(out, in)`; batches are row-major `(batch, features)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub sizes: Vec<usize>,
    pub output: Activation,
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

/// Gradients with the same layout as the network's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl MlpGrads {
    pub fn slices(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(2 * self.weights.len());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.push(w.as_slice().expect("standard layout"));
            out.push(b.as_slice().expect("standard layout"));
        }
        out
    }

    pub fn add(&mut self, other: &MlpGrads) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += b;
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            *a += b;
        }
    }
}

/// Layer outputs kept from a forward pass; `outputs[0]` is the input.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub outputs: Vec<Array2<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        self.outputs.last().expect("cache holds the input")
    }
}

impl Mlp {
    /// Uniform fan-in initialization, `U(-1/sqrt(in), 1/sqrt(in))`; the last
    /// layer is drawn from `U(-final_scale, final_scale)` when given.
    pub fn new<R: Rng>(sizes: &[usize], output: Activation, final_scale: Option<f64>, rng: &mut R) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidConfig(format!("bad layer sizes {sizes:?}")));
        }
        let layers = sizes.len() - 1;
        let mut weights = Vec::with_capacity(layers);
        let mut biases = Vec::with_capacity(layers);
        for (l, pair) in sizes.windows(2).enumerate() {
            let (n_in, n_out) = (pair[0], pair[1]);
            let bound = match final_scale {
                Some(s) if l == layers - 1 => s,
                _ => 1.0 / (n_in as f64).sqrt(),
            };
            weights.push(Array2::from_shape_simple_fn((n_out, n_in), || rng.random_range(-bound..=bound)));
            biases.push(Array1::from_shape_simple_fn(n_out, || rng.random_range(-bound..=bound)));
        }
        Ok(Self { sizes: sizes.to_vec(), output, weights, biases })
    }

    pub fn zeros(sizes: &[usize], output: Activation) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidConfig(format!("bad layer sizes {sizes:?}")));
        }
        let weights = sizes.windows(2).map(|p| Array2::zeros((p[1], p[0]))).collect();
        let biases = sizes.windows(2).map(|p| Array1::zeros(p[1])).collect();
        Ok(Self { sizes: sizes.to_vec(), output, weights, biases })
    }

    pub fn input_size(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.sizes.last().expect("at least two sizes")
    }

    pub fn num_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>() + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    fn activation(&self, layer: usize) -> Activation {
        if layer + 1 == self.weights.len() {
            self.output
        } else {
            Activation::Relu
        }
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_size() {
            return Err(Error::DimensionMismatch { expected: self.input_size(), got: input.len() });
        }
        let x = Array2::from_shape_vec((1, input.len()), input.to_vec()).expect("shape matches");
        Ok(self.forward_batch(&x)?.output().row(0).to_vec())
    }

    pub fn forward_batch(&self, input: &Array2<f64>) -> Result<ForwardCache> {
        if input.ncols() != self.input_size() {
            return Err(Error::DimensionMismatch { expected: self.input_size(), got: input.ncols() });
        }
        let mut outputs = Vec::with_capacity(self.weights.len() + 1);
        outputs.push(input.clone());
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let act = self.activation(l);
            let mut z = outputs[l].dot(&w.t());
            z += b;
            z.mapv_inplace(|x| act.apply(x));
            outputs.push(z);
        }
        Ok(ForwardCache { outputs })
    }

    /// Reverse pass for a batch given dL/d(output). Returns parameter
    /// gradients summed over the batch and dL/d(input) per row.
    pub fn backward_batch(&self, cache: &ForwardCache, upstream: &Array2<f64>) -> Result<(MlpGrads, Array2<f64>)> {
        let out = cache.output();
        if upstream.dim() != out.dim() {
            return Err(Error::DimensionMismatch { expected: out.len(), got: upstream.len() });
        }
        let layers = self.weights.len();
        let mut gw = Vec::with_capacity(layers);
        let mut gb = Vec::with_capacity(layers);
        let mut delta = upstream.clone();
        for l in (0..layers).rev() {
            let act = self.activation(l);
            let y = &cache.outputs[l + 1];
            delta.zip_mut_with(y, |d, &y| *d *= act.derivative(y));
            gw.push(delta.t().dot(&cache.outputs[l]).as_standard_layout().into_owned());
            gb.push(delta.sum_axis(Axis(0)));
            delta = delta.dot(&self.weights[l]);
        }
        gw.reverse();
        gb.reverse();
        Ok((MlpGrads { weights: gw, biases: gb }, delta))
    }

    pub fn backward(&self, input: &[f64], upstream: &[f64]) -> Result<(MlpGrads, Vec<f64>)> {
        if upstream.len() != self.output_size() {
            return Err(Error::DimensionMismatch { expected: self.output_size(), got: upstream.len() });
        }
        let x = Array2::from_shape_vec((1, input.len()), input.to_vec()).expect("shape matches");
        let cache = self.forward_batch(&x)?;
        let up = Array2::from_shape_vec((1, upstream.len()), upstream.to_vec()).expect("shape matches");
        let (g, dx) = self.backward_batch(&cache, &up)?;
        Ok((g, dx.row(0).to_vec()))
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(2 * self.weights.len());
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            out.push(w.as_slice_mut().expect("standard layout"));
            out.push(b.as_slice_mut().expect("standard layout"));
        }
        out
    }

    pub fn params(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(2 * self.weights.len());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.push(w.as_slice().expect("standard layout"));
            out.push(b.as_slice().expect("standard layout"));
        }
        out
    }

    pub fn flat_params(&self) -> Vec<f64> {
        self.params().concat()
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::DimensionMismatch { expected: self.num_params(), got: flat.len() });
        }
        let mut at = 0;
        for p in self.params_mut() {
            p.copy_from_slice(&flat[at..at + p.len()]);
            at += p.len();
        }
        Ok(())
    }

    /// `self <- tau * online + (1 - tau) * self`
    pub fn soft_update_from(&mut self, online: &Mlp, tau: f64) {
        for (t, o) in self.weights.iter_mut().zip(&online.weights) {
            t.zip_mut_with(o, |t, &o| *t = tau * o + (1.0 - tau) * *t);
        }
        for (t, o) in self.biases.iter_mut().zip(&online.biases) {
            t.zip_mut_with(o, |t, &o| *t = tau * o + (1.0 - tau) * *t);
        }
    }

    pub fn distance(&self, other: &Mlp) -> f64 {
        self.params()
            .iter()
            .zip(other.params())
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)))
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|p| p.iter().all(|x| x.is_finite()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_net_outputs_zero() {
        let net = Mlp::zeros(&[3, 4, 2], Activation::Identity).unwrap();
        assert_eq!(net.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn identity_layer_echoes() {
        let mut net = Mlp::zeros(&[3, 3], Activation::Identity).unwrap();
        net.weights[0] = Array2::eye(3);
        assert_eq!(net.forward(&[0.5, -1.0, 2.0]).unwrap(), vec![0.5, -1.0, 2.0]);
        assert_eq!(net.forward(&[1.0]), Err(Error::DimensionMismatch { expected: 3, got: 1 }));
    }

    #[test]
    fn tanh_output_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut net = Mlp::new(&[4, 8, 2], Activation::Tanh, None, &mut rng).unwrap();
        for w in net.weights.iter_mut() {
            w.mapv_inplace(|x| 50.0 * x);
        }
        for k in 0..100 {
            let x: Vec<f64> = (0..4).map(|i| ((k * 7 + i) as f64).sin() * 10.0).collect();
            assert!(net.forward(&x).unwrap().iter().all(|y| y.abs() <= 1.0));
        }
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Mlp::new(&[3, 5, 2], Activation::Tanh, None, &mut rng).unwrap();
        let (g, dx) = net.backward(&[0.1, 0.2, 0.3], &[0.0, 0.0]).unwrap();
        assert!(g.slices().iter().all(|s| s.iter().all(|&x| x == 0.0)));
        assert!(dx.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn batch_gradient_is_sum_of_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = Mlp::new(&[3, 6, 6, 2], Activation::Identity, None, &mut rng).unwrap();
        let (a, b) = ([0.3, -0.7, 1.1], [-0.4, 0.9, 0.2]);
        let up = [0.5, -1.5];
        let (mut ga, _) = net.backward(&a, &up).unwrap();
        let (gb, _) = net.backward(&b, &up).unwrap();
        ga.add(&gb);
        let x = Array2::from_shape_vec((2, 3), [a, b].concat()).unwrap();
        let cache = net.forward_batch(&x).unwrap();
        let upb = Array2::from_shape_vec((2, 2), [up, up].concat()).unwrap();
        let (g, _) = net.backward_batch(&cache, &upb).unwrap();
        for (x, y) in g.slices().concat().iter().zip(ga.slices().concat()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_params_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = Mlp::new(&[2, 3, 1], Activation::Tanh, Some(3e-3), &mut rng).unwrap();
        let mut b = Mlp::zeros(&[2, 3, 1], Activation::Tanh).unwrap();
        b.set_flat_params(&a.flat_params()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.num_params(), 2 * 3 + 3 + 3 + 1);
    }
}
