use super::tensor::Tensor;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-4,
            beta1: 0.5,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Moment estimates for one set of parameter tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    step: u64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl AdamState {
    /// Zeroed moments shaped like `params`.
    pub fn new(config: AdamConfig, params: &[Tensor]) -> Self {
        Self {
            config,
            step: 0,
            first: params.iter().map(|p| vec![0.0; p.len()]).collect(),
            second: params.iter().map(|p| vec![0.0; p.len()]).collect(),
        }
    }

    pub(crate) fn from_parts(
        config: AdamConfig,
        step: u64,
        first: Vec<Vec<f64>>,
        second: Vec<Vec<f64>>,
    ) -> Self {
        Self {
            config,
            step,
            first,
            second,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moments(&self) -> &[Vec<f64>] {
        &self.first
    }

    pub fn second_moments(&self) -> &[Vec<f64>] {
        &self.second
    }

    pub(crate) fn matches(&self, params: &[Tensor]) -> bool {
        self.first.len() == params.len()
            && self.second.len() == params.len()
            && params
                .iter()
                .zip(self.first.iter().zip(&self.second))
                .all(|(p, (m, v))| m.len() == p.len() && v.len() == p.len())
    }
}

/// One bias-corrected Adam update, in place:
///
/// ```text
/// m = b1 m + (1 - b1) g
/// v = b2 v + (1 - b2) g^2
/// p -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
/// ```
pub fn adam_step(params: &mut [Tensor], grads: &[Tensor], state: &mut AdamState) -> Result<()> {
    if grads.len() != params.len() || !state.matches(params) {
        return invalid("adam: parameter, gradient and moment lists do not align");
    }
    if params.iter().zip(grads).any(|(p, g)| p.shape() != g.shape()) {
        return invalid("adam: gradient shape differs from parameter shape");
    }
    state.step += 1;
    let AdamConfig {
        lr,
        beta1,
        beta2,
        eps,
    } = state.config;
    let t = state.step as i32;
    let bc1 = 1.0 - beta1.powi(t);
    let bc2 = 1.0 - beta2.powi(t);
    for ((p, g), (m, v)) in params
        .iter_mut()
        .zip(grads)
        .zip(state.first.iter_mut().zip(state.second.iter_mut()))
    {
        for (((w, &gi), mi), vi) in p
            .data_mut()
            .iter_mut()
            .zip(g.data())
            .zip(m.iter_mut())
            .zip(v.iter_mut())
        {
            *mi = beta1 * *mi + (1.0 - beta1) * gi;
            *vi = beta2 * *vi + (1.0 - beta2) * gi * gi;
            let m_hat = *mi / bc1;
            let v_hat = *vi / bc2;
            *w -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_by_hand() {
        // After one step m_hat = g and v_hat = g^2, so the update is
        // -lr * g / (|g| + eps).
        let cfg = AdamConfig {
            lr: 0.1,
            beta1: 0.5,
            beta2: 0.999,
            eps: 1e-8,
        };
        let mut p = vec![Tensor::scalar(1.0)];
        let mut s = AdamState::new(cfg, &p);
        adam_step(&mut p, &[Tensor::scalar(0.3)], &mut s).unwrap();
        let expected = 1.0 - 0.1 * 0.3 / (0.3 + 1e-8);
        assert!((p[0].data()[0] - expected).abs() < 1e-15);
        assert_eq!(s.step_count(), 1);
        assert!((s.first_moments()[0][0] - 0.15).abs() < 1e-15);
        assert!((s.second_moments()[0][0] - 0.001 * 0.09).abs() < 1e-18);

        // Second step with g = -0.3, hand computed:
        // m = 0.5*0.15 - 0.15 = -0.075, m_hat = -0.075 / 0.75 = -0.1
        // v = 0.999*9e-5 + 0.001*0.09 = 1.999*9e-5, v_hat = v / 0.001999 = 0.09
        let before = p[0].data()[0];
        adam_step(&mut p, &[Tensor::scalar(-0.3)], &mut s).unwrap();
        let want = before - 0.1 * (-0.1) / (0.3 + 1e-8);
        assert!((p[0].data()[0] - want).abs() < 1e-12);
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = vec![Tensor::from_rows(&[[1.0, -2.0]]).unwrap()];
        let mut s = AdamState::new(AdamConfig::default(), &p);
        for _ in 0..100 {
            adam_step(&mut p, &[Tensor::zeros(1, 2)], &mut s).unwrap();
        }
        assert_eq!(p[0].data(), &[1.0, -2.0]);
        assert_eq!(s.step_count(), 100);
    }

    #[test]
    fn shape_mismatch() {
        let mut p = vec![Tensor::zeros(2, 2)];
        let mut s = AdamState::new(AdamConfig::default(), &p);
        assert!(adam_step(&mut p, &[Tensor::zeros(1, 4)], &mut s).is_err());
        assert!(adam_step(&mut p, &[], &mut s).is_err());
    }

    #[test]
    fn deterministic() {
        let run = || {
            let mut p = vec![Tensor::from_rows(&[[0.3, 0.7, -1.1]]).unwrap()];
            let mut s = AdamState::new(AdamConfig::default(), &p);
            for k in 0..50 {
                let g = Tensor::from_rows(&[[(k as f64).sin(), (k as f64).cos(), 0.01 * k as f64]]).unwrap();
                adam_step(&mut p, &[g], &mut s).unwrap();
            }
            p
        };
        assert_eq!(run(), run());
    }
}
