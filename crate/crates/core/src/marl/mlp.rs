//! Fully connected ReLU network with a flat parameter vector.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Inputs to each layer plus the final linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct Activations {
    layers: Vec<Vec<f64>>,
}

impl Activations {
    pub fn output(&self) -> &[f64] {
        self.layers.last().expect("at least input and output")
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    acc.iter().sum::<f64>() + tail
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl Mlp {
    /// All-zero network; `sizes` lists the input width, hidden widths and
    /// output width.
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::invalid(format!("bad layer sizes {sizes:?}")));
        }
        Ok(Mlp { sizes: sizes.to_vec(), params: vec![0.0; param_count(sizes)] })
    }

    /// Weights and biases uniform in `±1/sqrt(fan_in)`.
    pub fn new<R: Rng>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        let mut net = Mlp::zeros(sizes)?;
        let mut offset = 0;
        for w in sizes.windows(2) {
            let bound = 1.0 / (w[0] as f64).sqrt();
            let n = w[0] * w[1] + w[1];
            for p in &mut net.params[offset..offset + n] {
                *p = rng.gen_range(-bound..bound);
            }
            offset += n;
        }
        Ok(net)
    }

    pub fn from_parts(sizes: &[usize], params: Vec<f64>) -> Result<Self> {
        let net = Mlp::zeros(sizes)?;
        if params.len() != net.params.len() {
            return Err(Error::ShapeMismatch { expected: net.params.len(), got: params.len() });
        }
        Ok(Mlp { params, ..net })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    pub fn forward(&self, input: &[f64]) -> Result<Activations> {
        if input.len() != self.input_dim() {
            return Err(Error::ShapeMismatch { expected: self.input_dim(), got: input.len() });
        }
        let depth = self.sizes.len() - 1;
        let mut layers = Vec::with_capacity(depth + 1);
        layers.push(input.to_vec());
        let mut offset = 0;
        for (l, w) in self.sizes.windows(2).enumerate() {
            let (fan_in, fan_out) = (w[0], w[1]);
            let weights = &self.params[offset..offset + fan_in * fan_out];
            let bias = &self.params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
            let x = &layers[l];
            let mut out: Vec<f64> = weights
                .chunks_exact(fan_in)
                .zip(bias)
                .map(|(row, b)| b + dot(row, x))
                .collect();
            if l + 1 < depth {
                for v in &mut out {
                    *v = v.max(0.0);
                }
            }
            layers.push(out);
            offset += fan_in * fan_out + fan_out;
        }
        Ok(Activations { layers })
    }

    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(input)?.layers.pop().unwrap())
    }

    /// Accumulates `dL/dparams` into `grads` given `dL/doutput`.
    pub fn backward(&self, acts: &Activations, grad_output: &[f64], grads: &mut [f64]) -> Result<()> {
        if grad_output.len() != self.output_dim() {
            return Err(Error::ShapeMismatch { expected: self.output_dim(), got: grad_output.len() });
        }
        if grads.len() != self.params.len() {
            return Err(Error::ShapeMismatch { expected: self.params.len(), got: grads.len() });
        }
        let mut offsets = Vec::with_capacity(self.sizes.len() - 1);
        let mut offset = 0;
        for w in self.sizes.windows(2) {
            offsets.push(offset);
            offset += w[0] * w[1] + w[1];
        }
        let mut g = grad_output.to_vec();
        for l in (0..self.sizes.len() - 1).rev() {
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let start = offsets[l];
            let x = &acts.layers[l];
            let weights = &self.params[start..start + fan_in * fan_out];
            let (gw, gb) = grads[start..start + fan_in * fan_out + fan_out].split_at_mut(fan_in * fan_out);
            let mut g_in = vec![0.0; if l > 0 { fan_in } else { 0 }];
            for i in 0..fan_out {
                let gi = g[i];
                if gi == 0.0 {
                    continue;
                }
                gb[i] += gi;
                for (gwk, xk) in gw[i * fan_in..(i + 1) * fan_in].iter_mut().zip(x) {
                    *gwk += gi * xk;
                }
                if l > 0 {
                    for (gk, wk) in g_in.iter_mut().zip(&weights[i * fan_in..(i + 1) * fan_in]) {
                        *gk += gi * wk;
                    }
                }
            }
            if l > 0 {
                for (gk, xk) in g_in.iter_mut().zip(x) {
                    if *xk <= 0.0 {
                        *gk = 0.0;
                    }
                }
            }
            g = g_in;
        }
        Ok(())
    }
}
