/// Adam with bias correction.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(n: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn moments(&self) -> (&[f64], &[f64]) {
        (&self.m, &self.v)
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len(), "parameter count changed");
        assert_eq!(grads.len(), self.m.len(), "gradient length mismatch");
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let mut opt = Adam::new(3, 1e-3);
        let mut p = vec![1.0, -2.0, 3.0];
        opt.step(&mut p, &[0.5, 0.5, 0.5]);
        let after = p.clone();
        let (m0, _) = opt.moments();
        let m0 = m0.to_vec();
        opt.step(&mut p, &[0.0; 3]);
        // the decayed first moment still moves the parameters
        assert_ne!(p, after);
        let (m1, _) = opt.moments();
        assert!((m1[0] - 0.9 * m0[0]).abs() < 1e-15);

        let mut fresh = Adam::new(2, 1e-3);
        let mut q = vec![1.0, 2.0];
        fresh.step(&mut q, &[0.0, 0.0]);
        assert_eq!(q, vec![1.0, 2.0]);
    }

    #[test]
    fn constant_gradient_steps_approach_lr() {
        let mut opt = Adam::new(1, 1e-3);
        let mut p = vec![0.0];
        let mut last = 0.0;
        for _ in 0..5000 {
            let before = p[0];
            opt.step(&mut p, &[2.5]);
            last = before - p[0];
        }
        assert!((last - 1e-3).abs() < 1e-9, "{last}");
    }
}
