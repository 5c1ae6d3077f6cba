use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Shape of a tanh MLP with a linear output layer. Parameters live in a flat
/// slice owned by the caller: for each layer the row-major weight matrix
/// (out × in) followed by the bias vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpShape {
    pub sizes: Vec<usize>,
}

/// Activations kept from a batched forward pass.
#[derive(Clone, Debug)]
pub struct MlpCache {
    /// `acts[0]` is the input, `acts[l]` the output of layer `l` (after tanh
    /// for hidden layers).
    pub acts: Vec<Array2<f64>>,
}

impl MlpCache {
    pub fn output(&self) -> &Array2<f64> {
        self.acts.last().expect("cache holds the input at least")
    }
}

impl MlpShape {
    pub fn new(input: usize, hidden: &[usize], output: usize) -> Self {
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(input);
        sizes.extend_from_slice(hidden);
        sizes.push(output);
        Self { sizes }
    }

    pub fn input(&self) -> usize {
        self.sizes[0]
    }

    pub fn output(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    /// Σ (in·out + out) over layers.
    pub fn param_count(&self) -> usize {
        self.sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    fn layer_offsets(&self, layer: usize) -> (usize, usize) {
        let mut off = 0;
        for w in self.sizes.windows(2).take(layer) {
            off += w[0] * w[1] + w[1];
        }
        let (i, o) = (self.sizes[layer], self.sizes[layer + 1]);
        (off, off + i * o)
    }

    fn weights<'a>(&self, params: &'a [f64], layer: usize) -> (ArrayView2<'a, f64>, ArrayView1<'a, f64>) {
        let (w, b) = self.layer_offsets(layer);
        let (i, o) = (self.sizes[layer], self.sizes[layer + 1]);
        let wv = ArrayView2::from_shape((o, i), &params[w..b]).expect("layout matches shape");
        let bv = ArrayView1::from(&params[b..b + o]);
        (wv, bv)
    }

    /// Glorot-uniform weights scaled by `gain`, zero biases; the last layer
    /// uses `out_gain`.
    pub fn init(&self, rng: &mut impl rand::Rng, gain: f64, out_gain: f64) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.param_count());
        for (l, w) in self.sizes.windows(2).enumerate() {
            let g = if l + 1 == self.n_layers() { out_gain } else { gain };
            let bound = g * (6.0 / (w[0] + w[1]) as f64).sqrt();
            for _ in 0..w[0] * w[1] {
                p.push(rng.random_range(-bound..=bound));
            }
            p.extend(std::iter::repeat_n(0.0, w[1]));
        }
        p
    }

    pub fn forward(&self, params: &[f64], x: ArrayView2<f64>) -> Result<MlpCache> {
        if x.ncols() != self.input() {
            return Err(Error::Shape {
                expected: self.input(),
                got: x.ncols(),
            });
        }
        if params.len() != self.param_count() {
            return Err(Error::Shape {
                expected: self.param_count(),
                got: params.len(),
            });
        }
        let mut acts = Vec::with_capacity(self.sizes.len());
        acts.push(x.to_owned());
        for l in 0..self.n_layers() {
            let (w, b) = self.weights(params, l);
            let mut z = acts[l].dot(&w.t());
            z += &b;
            if l + 1 < self.n_layers() {
                z.mapv_inplace(f64::tanh);
            }
            acts.push(z);
        }
        Ok(MlpCache { acts })
    }

    /// Accumulate `∂L/∂params` into `grad` given `∂L/∂output`.
    pub fn backward(&self, params: &[f64], cache: &MlpCache, d_out: &Array2<f64>, grad: &mut [f64]) {
        let mut delta = d_out.clone();
        for l in (0..self.n_layers()).rev() {
            let (w_off, b_off) = self.layer_offsets(l);
            let o = self.sizes[l + 1];
            let input = &cache.acts[l];
            let gw = delta.t().dot(input);
            for (g, v) in grad[w_off..b_off].iter_mut().zip(gw.iter()) {
                *g += v;
            }
            let gb = delta.sum_axis(Axis(0));
            for (g, v) in grad[b_off..b_off + o].iter_mut().zip(gb.iter()) {
                *g += v;
            }
            if l > 0 {
                let (w, _) = self.weights(params, l);
                let mut d_in = delta.dot(&w);
                // input of layer l is tanh output of layer l−1
                d_in.zip_mut_with(input, |d, a| *d *= 1.0 - a * a);
                delta = d_in;
            }
        }
    }
}
