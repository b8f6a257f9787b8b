use rand::Rng;
use serde::{Deserialize, Serialize};

use super::linalg::{sigmoid, Matrix};
use super::params::ParamSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Input,
    Forget,
    Cell,
    Output,
}

impl Gate {
    /// Row-block order inside the stacked gate matrices.
    pub const ORDER: [Gate; 4] = [Gate::Input, Gate::Forget, Gate::Cell, Gate::Output];

    fn block(self) -> usize {
        match self {
            Gate::Input => 0,
            Gate::Forget => 1,
            Gate::Cell => 2,
            Gate::Output => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Gate::Input => "input",
            Gate::Forget => "forget",
            Gate::Cell => "cell",
            Gate::Output => "output",
        }
    }
}

/// One LSTM layer. The four gates are stacked row-wise in [`Gate::ORDER`]:
/// `input_weights` is `4H × in`, `recurrent_weights` is `4H × H`, `bias` is `4H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmLayerParams {
    pub input_weights: Matrix,
    pub recurrent_weights: Matrix,
    pub bias: Vec<f64>,
}

/// Activations of one time step, kept for backpropagation.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmStep {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    /// Activated gates `[i, f, g, o]`, each `H` long.
    pub gates: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

impl LstmLayerParams {
    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        LstmLayerParams {
            input_weights: Matrix::zeros(4 * hidden_size, input_size),
            recurrent_weights: Matrix::zeros(4 * hidden_size, hidden_size),
            bias: vec![0.0; 4 * hidden_size],
        }
    }

    /// Uniform `±1/√fan_in` per matrix; biases zero except the forget gate at 1.
    pub fn init<R: Rng + ?Sized>(input_size: usize, hidden_size: usize, rng: &mut R) -> Self {
        let input_weights = Matrix::uniform(
            4 * hidden_size,
            input_size,
            1.0 / (input_size as f64).sqrt(),
            rng,
        );
        let recurrent_weights = Matrix::uniform(
            4 * hidden_size,
            hidden_size,
            1.0 / (hidden_size as f64).sqrt(),
            rng,
        );
        let mut bias = vec![0.0; 4 * hidden_size];
        bias[hidden_size..2 * hidden_size].fill(1.0);
        LstmLayerParams {
            input_weights,
            recurrent_weights,
            bias,
        }
    }

    pub fn input_size(&self) -> usize {
        self.input_weights.cols()
    }

    pub fn hidden_size(&self) -> usize {
        self.recurrent_weights.cols()
    }

    /// Rows of `W_g` for one gate.
    pub fn gate_input_weights(&self, gate: Gate) -> Vec<&[f64]> {
        let h = self.hidden_size();
        (gate.block() * h..(gate.block() + 1) * h)
            .map(|r| self.input_weights.row(r))
            .collect()
    }

    pub fn gate_bias(&self, gate: Gate) -> &[f64] {
        let h = self.hidden_size();
        &self.bias[gate.block() * h..(gate.block() + 1) * h]
    }

    pub fn is_consistent(&self) -> bool {
        let h = self.hidden_size();
        h > 0
            && self.input_size() > 0
            && self.input_weights.rows() == 4 * h
            && self.recurrent_weights.rows() == 4 * h
            && self.bias.len() == 4 * h
    }

    pub fn forward_sequence(&self, inputs: &[Vec<f64>]) -> Vec<LstmStep> {
        let h = self.hidden_size();
        let mut h_prev = vec![0.0; h];
        let mut c_prev = vec![0.0; h];
        let mut steps = Vec::with_capacity(inputs.len());
        for x in inputs {
            let mut z = self.bias.clone();
            self.input_weights.mul_vec_acc(x, &mut z);
            self.recurrent_weights.mul_vec_acc(&h_prev, &mut z);
            let mut gates = z;
            for (k, v) in gates.iter_mut().enumerate() {
                *v = if k / h == 2 { v.tanh() } else { sigmoid(*v) };
            }
            let (i, rest) = gates.split_at(h);
            let (f, rest) = rest.split_at(h);
            let (g, o) = rest.split_at(h);
            let c: Vec<f64> = (0..h).map(|j| f[j] * c_prev[j] + i[j] * g[j]).collect();
            let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
            let h_t: Vec<f64> = (0..h).map(|j| o[j] * tanh_c[j]).collect();
            steps.push(LstmStep {
                x: x.clone(),
                h_prev: std::mem::replace(&mut h_prev, h_t.clone()),
                c_prev: std::mem::replace(&mut c_prev, c.clone()),
                gates,
                c,
                tanh_c,
                h: h_t,
            });
        }
        steps
    }

    /// Backpropagation through time. `dh_out[t]` is the loss gradient reaching
    /// `h_t` from above; returns the gradient with respect to each input `x_t`.
    pub fn backward_sequence(
        &self,
        steps: &[LstmStep],
        dh_out: &[Vec<f64>],
        grad: &mut LstmLayerParams,
    ) -> Vec<Vec<f64>> {
        let h = self.hidden_size();
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        let mut dx_all = vec![Vec::new(); steps.len()];
        let mut dz = vec![0.0; 4 * h];
        for (t, step) in steps.iter().enumerate().rev() {
            let (i, rest) = step.gates.split_at(h);
            let (f, rest) = rest.split_at(h);
            let (g, o) = rest.split_at(h);
            for j in 0..h {
                let dh = dh_out[t][j] + dh_next[j];
                let d_o = dh * step.tanh_c[j];
                let dc = dh * o[j] * (1.0 - step.tanh_c[j] * step.tanh_c[j]) + dc_next[j];
                let d_i = dc * g[j];
                let d_g = dc * i[j];
                let d_f = dc * step.c_prev[j];
                dc_next[j] = dc * f[j];
                dz[j] = d_i * i[j] * (1.0 - i[j]);
                dz[h + j] = d_f * f[j] * (1.0 - f[j]);
                dz[2 * h + j] = d_g * (1.0 - g[j] * g[j]);
                dz[3 * h + j] = d_o * o[j] * (1.0 - o[j]);
            }
            grad.input_weights.add_outer(&dz, &step.x);
            grad.recurrent_weights.add_outer(&dz, &step.h_prev);
            grad.bias.iter_mut().zip(&dz).for_each(|(b, d)| *b += d);

            let mut dx = vec![0.0; self.input_size()];
            self.input_weights.mul_t_vec_acc(&dz, &mut dx);
            dx_all[t] = dx;
            dh_next.fill(0.0);
            self.recurrent_weights.mul_t_vec_acc(&dz, &mut dh_next);
        }
        dx_all
    }
}

impl ParamSet for LstmLayerParams {
    fn slices(&self) -> Vec<&[f64]> {
        vec![
            self.input_weights.as_slice(),
            self.recurrent_weights.as_slice(),
            &self.bias,
        ]
    }

    fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.input_weights.as_mut_slice(),
            self.recurrent_weights.as_mut_slice(),
            &mut self.bias,
        ]
    }
}
