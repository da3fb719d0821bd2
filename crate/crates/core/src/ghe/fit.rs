use crate::stats::{ols, sample_std};

/// One generalized Hurst exponent estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HqEstimate {
    pub h: f64,
    /// Spread over the lag ranges combined in quadrature with the mean
    /// per-fit slope error, both divided by `q`.
    pub err: f64,
    /// Mean R² of the log-log fits.
    pub quality: f64,
}

/// Fits `ln Xi` against `ln tau` for `tau = 1..=tau_max'` for each upper lag
/// in `tau_max_range` and averages the resulting `slope / q`.
///
/// `xi[k]` is the moment at lag `k + 1`. Returns `None` when any moment used
/// is zero or non-finite.
pub fn fit_scaling(xi: &[f64], q: f64, tau_max_range: &[usize]) -> Option<HqEstimate> {
    let longest = *tau_max_range.iter().max()?;
    if longest > xi.len() || longest < 2 {
        return None;
    }
    if xi[..longest].iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return None;
    }
    let log_tau: Vec<f64> = (1..=longest).map(|t| (t as f64).ln()).collect();
    let log_xi: Vec<f64> = xi[..longest].iter().map(|v| v.ln()).collect();

    let mut hs = Vec::with_capacity(tau_max_range.len());
    let mut se_sum = 0.0;
    let mut r2_sum = 0.0;
    for &tm in tau_max_range {
        let fit = ols(&log_tau[..tm], &log_xi[..tm])?;
        hs.push(fit.slope / q);
        se_sum += fit.slope_se;
        r2_sum += fit.r_squared;
    }
    let k = hs.len() as f64;
    let h = hs.iter().sum::<f64>() / k;
    let spread = sample_std(&hs).unwrap_or(0.0);
    let fit_se = se_sum / k / q;
    Some(HqEstimate {
        h,
        err: spread.hypot(fit_se),
        quality: r2_sum / k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn range() -> Vec<usize> {
        (5..=19).collect()
    }

    #[test]
    fn exact_power_law() {
        for &q in &[0.1, 1.0, 4.0] {
            let xi: Vec<f64> = (1..=19).map(|t| 3.0 * (t as f64).powf(0.5 * q)).collect();
            let est = fit_scaling(&xi, q, &range()).unwrap();
            assert!((est.h - 0.5).abs() < 1e-12);
            assert!(est.err < 1e-10);
            assert!((est.quality - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_moment_is_a_gap() {
        let mut xi: Vec<f64> = (1..=19).map(|t| t as f64).collect();
        xi[3] = 0.0;
        assert!(fit_scaling(&xi, 1.0, &range()).is_none());
        assert!(fit_scaling(&xi[..10], 1.0, &range()).is_none());
    }

    #[test]
    fn noisy_moments_have_positive_error() {
        let xi: Vec<f64> = (1..=19)
            .map(|t| (t as f64).powf(0.6) * (1.0 + 0.05 * ((t * 7) as f64).sin()))
            .collect();
        let est = fit_scaling(&xi, 1.0, &range()).unwrap();
        assert!(est.err > 0.0);
        assert!((est.h - 0.6).abs() < 0.05);
        assert!(est.quality < 1.0);
    }
}
