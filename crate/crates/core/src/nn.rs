//! Flat-parameter MLP forward and reverse-mode backward passes.
//!
//! Parameters are stored layer-major: W_1 row-major (fan_out x fan_in),
//! then b_1, then W_2, and so on. Hidden activations are ReLU; the output
//! is either tanh (policies) or linear (critics). All arithmetic is f64.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    Tanh,
    Linear,
}

/// Layer dimensions of one MLP, input first, output last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpShape {
    pub dims: Vec<usize>,
    pub output: OutputActivation,
}

/// Post-activation values for every layer; `layers[0]` is the input batch,
/// `layers[L]` the network output.
pub struct ForwardCache {
    pub layers: Vec<Array2<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        self.layers.last().expect("cache has at least the input")
    }
}

impl MlpShape {
    pub fn new(dims: Vec<usize>, output: OutputActivation) -> Self {
        assert!(dims.len() >= 2, "need at least input and output dims");
        assert!(dims.iter().all(|&d| d > 0), "all dims positive");
        MlpShape { dims, output }
    }

    pub fn n_layers(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    /// Weights plus biases over all layers.
    pub fn param_count(&self) -> usize {
        self.dims
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    /// Byte offsets of (weights, biases) for layer `l` in the flat vector.
    fn offsets(&self, l: usize) -> (usize, usize, usize, usize) {
        let mut off = 0;
        for k in 0..l {
            off += self.dims[k] * self.dims[k + 1] + self.dims[k + 1];
        }
        let fan_in = self.dims[l];
        let fan_out = self.dims[l + 1];
        (off, off + fan_in * fan_out, fan_in, fan_out)
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::InvalidInput(format!(
                "parameter vector length {} does not match shape {:?} ({} expected)",
                params.len(),
                self.dims,
                self.param_count()
            )));
        }
        Ok(())
    }

    /// Batched forward pass; rows of `x` are samples.
    pub fn forward_batch(&self, params: &[f64], x: &Array2<f64>) -> Result<ForwardCache> {
        self.check_params(params)?;
        if x.ncols() != self.input_dim() {
            return Err(Error::InvalidInput(format!(
                "input width {} does not match input dim {}",
                x.ncols(),
                self.input_dim()
            )));
        }
        let n_layers = self.n_layers();
        let mut layers = Vec::with_capacity(n_layers + 1);
        layers.push(x.clone());
        for l in 0..n_layers {
            let (w_off, b_off, fan_in, fan_out) = self.offsets(l);
            let w = ArrayView2::from_shape((fan_out, fan_in), &params[w_off..b_off])
                .expect("offset arithmetic matches shape");
            let b = &params[b_off..b_off + fan_out];
            let mut z = layers[l].dot(&w.t());
            for mut row in z.rows_mut() {
                for (v, bias) in row.iter_mut().zip(b) {
                    *v += bias;
                }
            }
            if l + 1 < n_layers {
                z.mapv_inplace(|v| v.max(0.0));
            } else {
                match self.output {
                    OutputActivation::Tanh => z.mapv_inplace(f64::tanh),
                    OutputActivation::Linear => {}
                }
            }
            layers.push(z);
        }
        Ok(ForwardCache { layers })
    }

    /// Backward pass. `grad_out` is dL/d(output); returns the flat parameter
    /// gradient and dL/d(input).
    pub fn backward_batch(
        &self,
        params: &[f64],
        cache: &ForwardCache,
        grad_out: &Array2<f64>,
    ) -> Result<(Vec<f64>, Array2<f64>)> {
        self.check_params(params)?;
        let n_layers = self.n_layers();
        let mut grads = vec![0.0; self.param_count()];
        // Gradient w.r.t. the pre-activation of the current layer.
        let mut g = match self.output {
            OutputActivation::Tanh => {
                let y = cache.output();
                grad_out * &y.mapv(|v| 1.0 - v * v)
            }
            OutputActivation::Linear => grad_out.clone(),
        };
        for l in (0..n_layers).rev() {
            let (w_off, b_off, fan_in, fan_out) = self.offsets(l);
            let w = ArrayView2::from_shape((fan_out, fan_in), &params[w_off..b_off])
                .expect("offset arithmetic matches shape");
            let x_in = &cache.layers[l];
            let gw = g.t().dot(x_in); // (fan_out, fan_in)
            grads[w_off..b_off].copy_from_slice(gw.as_standard_layout().as_slice().unwrap());
            let gb: Array1<f64> = g.sum_axis(Axis(0));
            grads[b_off..b_off + fan_out].copy_from_slice(gb.as_slice().unwrap());
            let gx = g.dot(&w); // (batch, fan_in)
            if l == 0 {
                return Ok((grads, gx));
            }
            // ReLU derivative from the cached post-activation of layer l-1:
            // zero wherever the unit was inactive (subgradient 0 at the kink).
            g = gx * &cache.layers[l].mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
        }
        unreachable!("loop returns at l == 0")
    }

    /// Single-sample forward pass without batching or caching.
    pub fn forward_one(&self, params: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        self.check_params(params)?;
        if x.len() != self.input_dim() {
            return Err(Error::InvalidInput(format!(
                "observation length {} does not match input dim {}",
                x.len(),
                self.input_dim()
            )));
        }
        let n_layers = self.n_layers();
        let mut h = x.to_vec();
        for l in 0..n_layers {
            let (w_off, b_off, fan_in, fan_out) = self.offsets(l);
            let mut z = vec![0.0; fan_out];
            for o in 0..fan_out {
                let row = &params[w_off + o * fan_in..w_off + (o + 1) * fan_in];
                let mut acc = params[b_off + o];
                for (wi, hi) in row.iter().zip(&h) {
                    acc += wi * hi;
                }
                z[o] = acc;
            }
            if l + 1 < n_layers {
                for v in &mut z {
                    *v = v.max(0.0);
                }
            } else if self.output == OutputActivation::Tanh {
                for v in &mut z {
                    *v = v.tanh();
                }
            }
            h = z;
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn param_count_matches_hand_count() {
        let shape = MlpShape::new(vec![2, 3, 1], OutputActivation::Tanh);
        assert_eq!(shape.param_count(), 2 * 3 + 3 + 3 + 1);
    }

    #[test]
    fn forward_one_matches_forward_batch() {
        let shape = MlpShape::new(vec![3, 4, 2], OutputActivation::Tanh);
        let params: Vec<f64> = (0..shape.param_count())
            .map(|i| ((i as f64) * 0.7).sin() * 0.3)
            .collect();
        let x = vec![0.1, -0.4, 0.9];
        let single = shape.forward_one(&params, &x).unwrap();
        let batch = shape
            .forward_batch(&params, &array![[0.1, -0.4, 0.9]])
            .unwrap();
        for (a, b) in single.iter().zip(batch.output().row(0)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_output_has_no_squash() {
        let shape = MlpShape::new(vec![1, 1, 1], OutputActivation::Linear);
        // w1=1 b1=0 w2=1 b2=0, input 2 -> ReLU(2) -> 2
        let params = vec![1.0, 0.0, 1.0, 0.0];
        let y = shape.forward_one(&params, &[2.0]).unwrap();
        assert_eq!(y[0], 2.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let shape = MlpShape::new(vec![2, 2, 1], OutputActivation::Linear);
        let params = vec![0.0; shape.param_count()];
        assert!(shape.forward_one(&params, &[1.0]).is_err());
        assert!(shape.forward_one(&params[..3], &[1.0, 2.0]).is_err());
    }
}
