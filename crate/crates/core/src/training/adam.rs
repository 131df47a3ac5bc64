use super::TrainError;
use crate::numeric::{DenseMatrix, Gradients, ParamStore};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.98;
pub const ADAM_EPS: f64 = 1e-9;

/// Bias-corrected Adam moments for every parameter of a store.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<DenseMatrix>,
    v: Vec<DenseMatrix>,
    t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(params: &ParamStore) -> Self {
        let zeros = || params.iter().map(|(_, p)| DenseMatrix::zeros(p.value.rows(), p.value.cols())).collect();
        AdamState { m: zeros(), v: zeros(), t: 0, beta1: BETA1, beta2: BETA2, eps: ADAM_EPS }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    pub fn first_moment(&self, index: usize) -> &DenseMatrix {
        &self.m[index]
    }

    pub fn second_moment(&self, index: usize) -> &DenseMatrix {
        &self.v[index]
    }

    /// One update with learning rate `lr`. Parameters absent from `grads`
    /// are treated as having zero gradient. Nothing is modified if any
    /// gradient is non-finite.
    pub fn step(&mut self, params: &mut ParamStore, grads: &Gradients, lr: f64) -> Result<(), TrainError> {
        for (id, p) in params.iter() {
            if let Some(g) = grads.get(id) {
                if g.shape() != p.value.shape() {
                    return Err(TrainError::GradientShape { param: p.name.clone() });
                }
                if !g.all_finite() {
                    return Err(TrainError::NonFiniteGradient { param: p.name.clone(), step: self.t + 1 });
                }
            }
        }
        self.t += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.t as i32);
        let c2 = 1.0 - b2.powi(self.t as i32);
        let ids: Vec<_> = params.iter().map(|(id, _)| id).collect();
        for id in ids {
            let i = id.index();
            let value = &mut params.get_mut(id).value;
            let grad = grads.get(id).map(DenseMatrix::data);
            let m = self.m[i].data_mut();
            let v = self.v[i].data_mut();
            for (k, theta) in value.data_mut().iter_mut().enumerate() {
                let g = grad.map_or(0.0, |g| g[k]);
                m[k] = b1 * m[k] + (1.0 - b1) * g;
                v[k] = b2 * v[k] + (1.0 - b2) * g * g;
                let m_hat = m[k] / c1;
                let v_hat = v[k] / c2;
                *theta -= lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}
