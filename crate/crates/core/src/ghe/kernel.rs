use crate::error::{Error, Result};

/// Normalized exponential weights `w_s = w_0 exp(-s / theta)`, `s = 0..dt`.
///
/// `s = 0` is the most recent sample.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightKernel {
    theta: f64,
    dt: usize,
    weights: Vec<f64>,
    /// `cumulative[k] = sum of the first k weights`.
    cumulative: Vec<f64>,
}

impl WeightKernel {
    pub fn new(theta: f64, dt: usize) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::param(format!("theta must be positive, got {theta}")));
        }
        if dt == 0 {
            return Err(Error::param("kernel length must be at least 1"));
        }
        // w_0 = (1 - e^{-1/theta}) / (1 - e^{-dt/theta}), written with expm1
        // so that very large theta keeps full precision.
        let w0 = (-1.0 / theta).exp_m1() / (-(dt as f64) / theta).exp_m1();
        let weights: Vec<f64> = (0..dt).map(|s| w0 * (-(s as f64) / theta).exp()).collect();
        let mut cumulative = Vec::with_capacity(dt + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in &weights {
            acc += w;
            cumulative.push(acc);
        }
        Ok(Self {
            theta,
            dt,
            weights,
            cumulative,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn dt(&self) -> usize {
        self.dt
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sum of the `k` most recent weights.
    pub fn head_sum(&self, k: usize) -> f64 {
        self.cumulative[k.min(self.dt)]
    }

    pub fn w0(&self) -> f64 {
        self.weights[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_limit() {
        let k = WeightKernel::new(1e9, 10).unwrap();
        for w in k.weights() {
            assert!((w - 0.1).abs() < 1e-6);
        }
    }

    #[test]
    fn tail_ratio_for_theta_equal_dt() {
        let k = WeightKernel::new(250.0, 250).unwrap();
        let ratio = k.weights()[249] / k.weights()[0];
        assert!((ratio - (-249.0f64 / 250.0).exp()).abs() < 1e-12);
        assert!((ratio - 0.3693).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(WeightKernel::new(0.0, 10).is_err());
        assert!(WeightKernel::new(-1.0, 10).is_err());
        assert!(WeightKernel::new(f64::NAN, 10).is_err());
        assert!(WeightKernel::new(5.0, 0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn normalized_and_geometric(theta in 0.5f64..5000.0, dt in 1usize..2000) {
            let k = WeightKernel::new(theta, dt).unwrap();
            let sum: f64 = k.weights().iter().sum();
            proptest::prop_assert!((sum - 1.0).abs() < 1e-12);
            proptest::prop_assert!((k.head_sum(dt) - 1.0).abs() < 1e-12);
            let expected = (1.0 / theta).exp();
            // subnormal tails lose relative precision
            for w in k.weights().windows(2).filter(|w| w[1].is_normal()) {
                proptest::prop_assert!(w[0] > w[1]);
                proptest::prop_assert!((w[0] / w[1] / expected - 1.0).abs() < 1e-10);
            }
        }
    }
}
