//! Plain SGD and Adam, both descending on the supplied gradient.

use crate::error::{check_len, Error, Result};

fn check_step(params: &[f64], grad: &[f64]) -> Result<()> {
    check_len(params.len(), grad.len())?;
    if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFinite(format!("gradient coordinate {i} is {}", grad[i])));
    }
    Ok(())
}

fn check_lr(lr: f64) -> Result<()> {
    if lr > 0.0 && lr.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "learning rate must be positive, got {lr}"
        )))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sgd {
    pub lr: f64,
    pub step_count: u64,
}

impl Sgd {
    pub fn new(lr: f64) -> Result<Self> {
        check_lr(lr)?;
        Ok(Self { lr, step_count: 0 })
    }

    /// `params -= lr * grad`.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) -> Result<()> {
        check_step(params, grad)?;
        for (p, g) in params.iter_mut().zip(grad) {
            *p -= self.lr * g;
        }
        self.step_count += 1;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step_count: u64,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
}

impl Adam {
    pub const DEFAULT_BETA1: f64 = 0.9;
    pub const DEFAULT_BETA2: f64 = 0.999;
    pub const DEFAULT_EPS: f64 = 1e-8;

    pub fn new(lr: f64, num_params: usize) -> Result<Self> {
        Self::with_hyperparams(
            lr,
            Self::DEFAULT_BETA1,
            Self::DEFAULT_BETA2,
            Self::DEFAULT_EPS,
            num_params,
        )
    }

    pub fn with_hyperparams(lr: f64, beta1: f64, beta2: f64, eps: f64, num_params: usize) -> Result<Self> {
        check_lr(lr)?;
        if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) || !(eps > 0.0) {
            return Err(Error::InvalidArgument("need beta1, beta2 in [0, 1) and eps > 0".into()));
        }
        Ok(Self {
            lr,
            beta1,
            beta2,
            eps,
            step_count: 0,
            first_moment: vec![0.0; num_params],
            second_moment: vec![0.0; num_params],
        })
    }

    /// Bias-corrected update in the form
    /// `params -= lr_t * m / (sqrt(v) + eps)` with `lr_t = lr sqrt(1 - beta2^t) / (1 - beta1^t)`.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) -> Result<()> {
        check_step(params, grad)?;
        check_len(self.first_moment.len(), params.len())?;
        self.step_count += 1;
        let t = self.step_count as i32;
        let lr_t = self.lr * (1.0 - self.beta2.powi(t)).sqrt() / (1.0 - self.beta1.powi(t));
        for i in 0..params.len() {
            let g = grad[i];
            self.first_moment[i] = self.beta1 * self.first_moment[i] + (1.0 - self.beta1) * g;
            self.second_moment[i] = self.beta2 * self.second_moment[i] + (1.0 - self.beta2) * g * g;
            params[i] -= lr_t * self.first_moment[i] / (self.second_moment[i].sqrt() + self.eps);
        }
        Ok(())
    }
}
