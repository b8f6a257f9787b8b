use rand::Rng;
use serde::{Deserialize, Serialize};

use super::linalg::Matrix;

/// A bundle of trainable arrays. Gradients use the same type as the
/// parameters they belong to, so optimizers can walk both in lockstep.
pub trait ParamSet: Clone {
    fn slices(&self) -> Vec<&[f64]>;
    fn slices_mut(&mut self) -> Vec<&mut [f64]>;

    fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for s in z.slices_mut() {
            s.fill(0.0);
        }
        z
    }

    fn num_params(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    fn scale(&mut self, k: f64) {
        for s in self.slices_mut() {
            s.iter_mut().for_each(|x| *x *= k);
        }
    }

    fn add_assign(&mut self, other: &Self) {
        for (dst, src) in self.slices_mut().into_iter().zip(other.slices()) {
            dst.iter_mut().zip(src).for_each(|(d, s)| *d += s);
        }
    }

    fn all_finite(&self) -> bool {
        self.slices()
            .iter()
            .all(|s| s.iter().all(|x| x.is_finite()))
    }

    fn to_flat(&self) -> Vec<f64> {
        self.slices().concat()
    }
}

/// Fully connected layer `y = W x + b` with `W` of shape `out × in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        DenseLayer {
            weights: Matrix::zeros(outputs, inputs),
            bias: vec![0.0; outputs],
        }
    }

    /// Weights uniform in `±1/√inputs`, zero bias.
    pub fn init<R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (inputs as f64).sqrt();
        DenseLayer {
            weights: Matrix::uniform(outputs, inputs, bound, rng),
            bias: vec![0.0; outputs],
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.rows()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.bias.clone();
        self.weights.mul_vec_acc(x, &mut y);
        y
    }

    /// Accumulates parameter gradients for upstream `dy` and returns `dx`.
    pub fn backward(&self, x: &[f64], dy: &[f64], grad: &mut DenseLayer) -> Vec<f64> {
        grad.weights.add_outer(dy, x);
        grad.bias.iter_mut().zip(dy).for_each(|(g, d)| *g += d);
        let mut dx = vec![0.0; self.inputs()];
        self.weights.mul_t_vec_acc(dy, &mut dx);
        dx
    }
}

impl ParamSet for DenseLayer {
    fn slices(&self) -> Vec<&[f64]> {
        vec![self.weights.as_slice(), &self.bias]
    }

    fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        vec![self.weights.as_mut_slice(), &mut self.bias]
    }
}
