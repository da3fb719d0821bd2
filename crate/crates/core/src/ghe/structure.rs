use super::WeightKernel;
use crate::error::{Error, Result};

/// Weighted `q`-th absolute moment of the lag-`tau` increments of `window`.
///
/// `window` holds `dt` log prices with the most recent last; the increment
/// ending at the latest price gets weight `w_0`. The `dt - tau` available
/// increments are averaged with their kernel weights renormalized to unit
/// sum, so a straight line yields `(c * tau)^q` exactly.
pub fn structure_function(window: &[f64], kernel: &WeightKernel, q: f64, tau: usize) -> Result<f64> {
    let dt = window.len();
    if dt != kernel.dt() {
        return Err(Error::Misaligned(format!(
            "window of {dt} points for a kernel of {}",
            kernel.dt()
        )));
    }
    if tau == 0 || tau >= dt {
        return Err(Error::param(format!("lag {tau} outside 1..{dt}")));
    }
    let w = kernel.weights();
    let mut acc = 0.0;
    for s in 0..dt - tau {
        let j = dt - 1 - s;
        acc += w[s] * (window[j] - window[j - tau]).abs().powf(q);
    }
    Ok(acc / kernel.head_sum(dt - tau))
}

/// Lag increments of a whole log-price path, raised to one exponent once so
/// that every sliding window reuses them.
#[derive(Debug, Clone)]
pub struct StructureTable {
    q: f64,
    /// `powers[tau - 1][j] = |x[j] - x[j - tau]|^q` for `j >= tau`.
    powers: Vec<Vec<f64>>,
}

/// `ln |x[j] - x[j - tau]|` for `tau = 1..=tau_max`; reused across exponents.
#[derive(Debug, Clone)]
pub struct LogIncrements {
    rows: Vec<Vec<f64>>,
}

impl LogIncrements {
    pub fn new(log_price: &[f64], tau_max: usize) -> Self {
        let rows = (1..=tau_max)
            .map(|tau| {
                (0..log_price.len())
                    .map(|j| {
                        if j < tau {
                            f64::NEG_INFINITY
                        } else {
                            (log_price[j] - log_price[j - tau]).abs().ln()
                        }
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    pub fn tau_max(&self) -> usize {
        self.rows.len()
    }
}

impl StructureTable {
    pub fn new(increments: &LogIncrements, q: f64) -> Self {
        let powers = increments
            .rows
            .iter()
            .map(|row| row.iter().map(|l| (q * l).exp()).collect())
            .collect();
        Self { q, powers }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `Xi(tau, q)` on the window of `kernel.dt()` prices ending just before
    /// price index `end` (i.e. covering `end - dt .. end`).
    pub fn xi(&self, end: usize, kernel: &WeightKernel, tau: usize) -> f64 {
        let dt = kernel.dt();
        let row = &self.powers[tau - 1];
        let w = kernel.weights();
        let latest = end - 1;
        let mut acc = 0.0;
        for (s, ws) in w[..dt - tau].iter().enumerate() {
            acc += ws * row[latest - s];
        }
        acc / kernel.head_sum(dt - tau)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_window_is_exact_power() {
        let c = 0.003;
        let window: Vec<f64> = (0..50).map(|t| 1.0 + c * t as f64).collect();
        let k = WeightKernel::new(20.0, 50).unwrap();
        for &q in &[0.1, 1.0, 2.5, 4.0] {
            for tau in [1, 5, 19] {
                let xi = structure_function(&window, &k, q, tau).unwrap();
                let want = (c * tau as f64).powf(q);
                assert!((xi / want - 1.0).abs() < 1e-9, "q={q} tau={tau}");
            }
        }
    }

    #[test]
    fn constant_window_is_zero() {
        let k = WeightKernel::new(20.0, 30).unwrap();
        assert_eq!(structure_function(&[2.0; 30], &k, 1.0, 3).unwrap(), 0.0);
    }

    #[test]
    fn lag_must_fit_window() {
        let k = WeightKernel::new(20.0, 30).unwrap();
        assert!(structure_function(&[0.0; 30], &k, 1.0, 30).is_err());
        assert!(structure_function(&[0.0; 30], &k, 1.0, 0).is_err());
        assert!(structure_function(&[0.0; 29], &k, 1.0, 2).is_err());
    }

    #[test]
    fn most_recent_increment_dominates() {
        // Only the very last increment is non-zero.
        let mut window = vec![0.0; 40];
        window[39] = 1.0;
        let k = WeightKernel::new(5.0, 40).unwrap();
        let xi = structure_function(&window, &k, 1.0, 1).unwrap();
        assert!((xi - k.w0() / k.head_sum(39)).abs() < 1e-15);
    }

    #[test]
    fn table_matches_direct_sum() {
        let x: Vec<f64> = (0..120).map(|i| ((i * 37 % 11) as f64).sin() * 0.1).collect();
        let inc = LogIncrements::new(&x, 7);
        let k = WeightKernel::new(30.0, 60).unwrap();
        for &q in &[0.1, 2.0, 4.0] {
            let table = StructureTable::new(&inc, q);
            for end in [60, 75, 120] {
                for tau in 1..=7 {
                    let direct = structure_function(&x[end - 60..end], &k, q, tau).unwrap();
                    assert!((table.xi(end, &k, tau) - direct).abs() < 1e-12);
                }
            }
        }
    }
}
