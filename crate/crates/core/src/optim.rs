//! Adam with bias-corrected moment estimates.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::sqrt;
use crate::model::CellularNetwork;
use crate::objective::GradientBuffer;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::hyper("learning_rate", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.beta1) {
            return Err(Error::hyper("beta1", "must lie in [0, 1)"));
        }
        if !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::hyper("beta2", "must lie in [0, 1)"));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::hyper("epsilon", "must be positive"));
        }
        Ok(())
    }
}

/// Moment estimates for one flat parameter block.
#[derive(Debug, Clone, PartialEq)]
struct Moments {
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Moments {
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }
}

/// Optimizer state shaped like a [`GradientBuffer`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    step: u64,
    blocks: [Moments; 3],
}

impl AdamState {
    pub fn new(net: &CellularNetwork) -> Self {
        AdamState {
            step: 0,
            blocks: [
                Moments::new(net.betas().len()),
                Moments::new(net.centers().len()),
                Moments::new(net.alphas().len()),
            ],
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Second-moment estimates, betas then centers then alphas.
    pub fn second_moments(&self) -> impl Iterator<Item = f64> + '_ {
        self.blocks.iter().flat_map(|b| b.v.iter().copied())
    }

    /// One descent step on flat parameter slices. `grads` follows the same
    /// block order as `params`.
    pub fn step_slices(
        &mut self,
        params: [&mut [f64]; 3],
        grads: [(&'static str, &[f64]); 3],
        cfg: &AdamConfig,
    ) -> Result<()> {
        for (name, g) in grads {
            if let Some(index) = g.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteGradient { block: name, index });
            }
        }
        for ((p, (_, g)), st) in params.iter().zip(grads).zip(&self.blocks) {
            assert!(
                p.len() == g.len() && g.len() == st.m.len(),
                "gradient shape does not match parameters"
            );
        }
        self.step += 1;
        let t = self.step as f64;
        let c1 = 1.0 - libm::pow(cfg.beta1, t);
        let c2 = 1.0 - libm::pow(cfg.beta2, t);
        for ((p, (_, g)), st) in params.into_iter().zip(grads).zip(self.blocks.iter_mut()) {
            for i in 0..p.len() {
                let gi = g[i];
                st.m[i] = cfg.beta1 * st.m[i] + (1.0 - cfg.beta1) * gi;
                st.v[i] = cfg.beta2 * st.v[i] + (1.0 - cfg.beta2) * gi * gi;
                let m_hat = st.m[i] / c1;
                let v_hat = st.v[i] / c2;
                p[i] -= cfg.learning_rate * m_hat / (sqrt(v_hat) + cfg.epsilon);
            }
        }
        Ok(())
    }

    /// One descent step on a network. Alphas are not clamped here.
    pub fn step(
        &mut self,
        net: &mut CellularNetwork,
        grad: &GradientBuffer,
        cfg: &AdamConfig,
    ) -> Result<()> {
        let (betas, centers, alphas) = net.params_mut();
        self.step_slices([betas, centers, alphas], grad.blocks(), cfg)
    }
}
