//! Adam optimizer with decoupled weight decay.

use crate::error::{Error, Result};
use crate::params::ParamSet;
use crate::signal::TemporalSignal;

#[derive(Clone, Copy, Debug)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Applied directly to the weights, not through the gradient moments.
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 1e-3,
        }
    }
}

pub struct Adam {
    cfg: AdamConfig,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    step: u64,
}

impl Adam {
    pub fn new(cfg: AdamConfig, params: &ParamSet) -> Result<Self> {
        if !(cfg.lr.is_finite() && cfg.lr >= 0.0) {
            return Err(Error::config(format!("learning rate must be >= 0, got {}", cfg.lr)));
        }
        for (name, v) in [("beta1", cfg.beta1), ("beta2", cfg.beta2)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::config(format!("{name} must lie in [0, 1), got {v}")));
            }
        }
        if !(cfg.eps > 0.0) {
            return Err(Error::config(format!("eps must be positive, got {}", cfg.eps)));
        }
        if !(cfg.weight_decay.is_finite() && cfg.weight_decay >= 0.0) {
            return Err(Error::config(format!(
                "weight decay must be >= 0, got {}",
                cfg.weight_decay
            )));
        }
        let m = (0..params.len()).map(|i| vec![0.0; params.tensor(i).numel()]).collect();
        let v = (0..params.len()).map(|i| vec![0.0; params.tensor(i).numel()]).collect();
        Ok(Self { cfg, m, v, step: 0 })
    }

    pub fn config(&self) -> AdamConfig {
        self.cfg
    }

    /// One update over all tensors; `grads` aligns with the parameter order.
    pub fn step(&mut self, params: &mut ParamSet, grads: &[&TemporalSignal]) -> Result<()> {
        if grads.len() != params.len() {
            return Err(Error::shape(format!(
                "got {} gradients for {} parameters",
                grads.len(),
                params.len()
            )));
        }
        for (i, g) in grads.iter().enumerate() {
            if g.numel() != params.tensor(i).numel() {
                return Err(Error::shape(format!(
                    "gradient {} shape {:?} does not match parameter '{}' {:?}",
                    i,
                    g.shape(),
                    params.name(i),
                    params.tensor(i).shape()
                )));
            }
            g.ensure_finite("gradient")?;
        }
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.cfg.beta1.powi(t);
        let bc2 = 1.0 - self.cfg.beta2.powi(t);
        for (i, g) in grads.iter().enumerate() {
            let m = &mut self.m[i];
            let v = &mut self.v[i];
            let w = params.tensor_mut(i).data_mut();
            for ((wi, (mi, vi)), &gi) in w.iter_mut().zip(m.iter_mut().zip(v.iter_mut())).zip(g.data()) {
                *mi = self.cfg.beta1 * *mi + (1.0 - self.cfg.beta1) * gi;
                *vi = self.cfg.beta2 * *vi + (1.0 - self.cfg.beta2) * gi * gi;
                let m_hat = *mi / bc1;
                let v_hat = *vi / bc2;
                *wi -= self.cfg.lr * (m_hat / (v_hat.sqrt() + self.cfg.eps) + self.cfg.weight_decay * *wi);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_param(value: f64) -> ParamSet {
        let mut p = ParamSet::new();
        p.push("w", TemporalSignal::new(1, 1, 2, vec![value, -value]).unwrap())
            .unwrap();
        p
    }

    #[test]
    fn first_step_moves_by_lr_times_sign() {
        let cfg = AdamConfig { lr: 0.1, weight_decay: 0.0, ..AdamConfig::default() };
        let mut params = single_param(0.0);
        let mut opt = Adam::new(cfg, &params).unwrap();
        let g = TemporalSignal::new(1, 1, 2, vec![1.0, -2.0]).unwrap();
        opt.step(&mut params, &[&g]).unwrap();
        let w = params.tensor(0).data();
        // bias-corrected m/sqrt(v) equals sign(g) on the first step
        assert!((w[0] + 0.1).abs() < 1e-6, "w[0] = {}", w[0]);
        assert!((w[1] - 0.1).abs() < 1e-6, "w[1] = {}", w[1]);
    }

    #[test]
    fn zero_gradient_and_zero_decay_leave_weights_unchanged() {
        let cfg = AdamConfig { weight_decay: 0.0, ..AdamConfig::default() };
        let mut params = single_param(0.7);
        let before = params.tensor(0).clone();
        let mut opt = Adam::new(cfg, &params).unwrap();
        let g = TemporalSignal::zeros(1, 1, 2);
        opt.step(&mut params, &[&g]).unwrap();
        assert_eq!(params.tensor(0), &before);
    }

    #[test]
    fn weight_decay_shrinks_weights_without_gradient() {
        let cfg = AdamConfig { lr: 0.5, weight_decay: 0.1, ..AdamConfig::default() };
        let mut params = single_param(1.0);
        let mut opt = Adam::new(cfg, &params).unwrap();
        let g = TemporalSignal::zeros(1, 1, 2);
        opt.step(&mut params, &[&g]).unwrap();
        let w = params.tensor(0).data();
        assert!((w[0] - 0.95).abs() < 1e-12);
        assert!((w[1] + 0.95).abs() < 1e-12);
    }

    #[test]
    fn identical_runs_are_bitwise_identical() {
        let cfg = AdamConfig::default();
        let run = || {
            let mut params = single_param(0.3);
            let mut opt = Adam::new(cfg, &params).unwrap();
            for i in 0..10 {
                let g = TemporalSignal::new(1, 1, 2, vec![0.1 * i as f64, -0.2]).unwrap();
                opt.step(&mut params, &[&g]).unwrap();
            }
            params.tensor(0).data().to_vec()
        };
        let a = run();
        let b = run();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn rejects_mismatched_gradient_shapes() {
        let mut params = single_param(0.0);
        let mut opt = Adam::new(AdamConfig::default(), &params).unwrap();
        let g = TemporalSignal::zeros(1, 1, 3);
        assert!(opt.step(&mut params, &[&g]).is_err());
        assert!(opt.step(&mut params, &[]).is_err());
    }

    #[test]
    fn validates_config() {
        let params = single_param(0.0);
        let bad = AdamConfig { beta1: 1.0, ..AdamConfig::default() };
        assert!(Adam::new(bad, &params).is_err());
        let bad = AdamConfig { lr: f64::NAN, ..AdamConfig::default() };
        assert!(Adam::new(bad, &params).is_err());
    }
}
