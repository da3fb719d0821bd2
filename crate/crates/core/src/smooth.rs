//! Local least-squares polynomial smoothing.
//!
//! Each output point is the value, at that point, of the polynomial fitted to
//! the samples of its window. Non-finite samples are skipped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmoothMode {
    /// `window / 2` points back, the rest forward (24 back, 23 forward for 48).
    Centered,
    /// Only the current and past points; usable in real time.
    Causal,
}

impl std::str::FromStr for SmoothMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "centered" => Ok(Self::Centered),
            "causal" => Ok(Self::Causal),
            other => Err(Error::param(format!("unknown smoothing mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmoothConfig {
    pub window_points: usize,
    pub order: usize,
    pub mode: SmoothMode,
}

impl Default for SmoothConfig {
    fn default() -> Self {
        Self {
            window_points: 48,
            order: 2,
            mode: SmoothMode::Centered,
        }
    }
}

impl SmoothConfig {
    pub fn causal(self) -> Self {
        Self {
            mode: SmoothMode::Causal,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_points < self.order + 2 {
            return Err(Error::param(format!(
                "smoothing window {} too small for order {}",
                self.window_points, self.order
            )));
        }
        Ok(())
    }

    /// Offsets `(back, forward)` of the full window around a point.
    fn reach(&self) -> (usize, usize) {
        match self.mode {
            SmoothMode::Centered => {
                let back = self.window_points / 2;
                (back, self.window_points - 1 - back)
            }
            SmoothMode::Causal => (self.window_points - 1, 0),
        }
    }
}

/// Smooths `track`. Near the ends the window is truncated; a point whose
/// window is cut by a gap needs at least `order + 2` finite samples or it
/// stays a gap.
pub fn smooth_track(track: &[f64], cfg: &SmoothConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if track.len() < cfg.window_points {
        return Err(Error::TooShort {
            needed: cfg.window_points,
            got: track.len(),
        });
    }
    let n = track.len();
    let (back, forward) = cfg.reach();
    let half = back.max(forward).max(1) as f64;
    let mut xs = Vec::with_capacity(cfg.window_points);
    let mut ys = Vec::with_capacity(cfg.window_points);
    let out = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(back);
            let hi = (i + forward).min(n - 1);
            xs.clear();
            ys.clear();
            for (j, y) in track.iter().enumerate().take(hi + 1).skip(lo) {
                if y.is_finite() {
                    xs.push((j as f64 - i as f64) / half);
                    ys.push(*y);
                }
            }
            // A window truncated by the series end may hold fewer points than
            // a full fit needs; it then interpolates with a lower order.
            let span = hi - lo + 1;
            let needed = (cfg.order + 2).min(span);
            if ys.len() < needed {
                return f64::NAN;
            }
            let order = cfg.order.min(ys.len() - 1);
            poly_value_at_zero(&xs, &ys, order).unwrap_or(f64::NAN)
        })
        .collect();
    Ok(out)
}

/// Least-squares polynomial of degree `order` through `(x, y)`, evaluated at
/// `x = 0` (its constant term).
fn poly_value_at_zero(x: &[f64], y: &[f64], order: usize) -> Option<f64> {
    let p = order + 1;
    // normal equations, augmented
    let mut a = vec![vec![0.0; p + 1]; p];
    let mut powers = vec![0.0; 2 * order + 1];
    for (xi, yi) in x.iter().zip(y) {
        let mut v = 1.0;
        for slot in powers.iter_mut() {
            *slot = v;
            v *= xi;
        }
        for r in 0..p {
            for c in 0..p {
                a[r][c] += powers[r + c];
            }
            a[r][p] += powers[r] * yi;
        }
    }
    solve_in_place(&mut a)?;
    Some(a[0][p])
}

/// Gaussian elimination with partial pivoting on an augmented matrix; the
/// solution replaces the last column.
fn solve_in_place(a: &mut [Vec<f64>]) -> Option<()> {
    let p = a.len();
    for col in 0..p {
        let pivot = (col..p).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        for r in 0..p {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..=p {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    for r in 0..p {
        a[r][p] /= a[r][r];
    }
    Some(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn quadratic(n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let t = i as f64;
                0.3 - 0.02 * t + 0.0007 * t * t
            })
            .collect()
    }

    #[test]
    fn reproduces_quadratics_in_both_modes() {
        let x = quadratic(200);
        for cfg in [SmoothConfig::default(), SmoothConfig::default().causal()] {
            let y = smooth_track(&x, &cfg).unwrap();
            for (a, b) in x.iter().zip(&y) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn constant_is_unchanged() {
        let y = smooth_track(&[1.25; 60], &SmoothConfig::default()).unwrap();
        assert!(y.iter().all(|v| (v - 1.25).abs() < 1e-12));
    }

    #[test]
    fn centered_window_reduces_white_noise_variance() {
        let x = noise(5000, 3);
        let y = smooth_track(&x, &SmoothConfig::default()).unwrap();
        let var = |v: &[f64]| crate::stats::sample_std(v).unwrap().powi(2);
        let ratio = var(&y[48..4952]) / var(&x);
        assert!(ratio < 0.15, "{ratio}");
    }

    #[test]
    fn causal_mode_never_looks_ahead() {
        let x = noise(120, 4);
        let cfg = SmoothConfig::default().causal();
        let base = smooth_track(&x, &cfg).unwrap();
        let mut perturbed = x.clone();
        for v in perturbed.iter_mut().skip(70) {
            *v += 100.0;
        }
        let moved = smooth_track(&perturbed, &cfg).unwrap();
        assert_eq!(&base[..70], &moved[..70]);
        assert_ne!(base[70], moved[70]);
    }

    #[test]
    fn centered_split_is_past_heavy() {
        assert_eq!(SmoothConfig::default().reach(), (24, 23));
        // a spike 24 points back is inside the window, 25 back is not
        let mut x = vec![0.0; 100];
        x[26] = 1.0;
        let y = smooth_track(&x, &SmoothConfig::default()).unwrap();
        assert_ne!(y[50], 0.0);
        assert!(y[51].abs() < 1e-15);
    }

    #[test]
    fn gaps_are_bridged_only_with_enough_support() {
        let mut x = quadratic(100);
        x[50] = f64::NAN;
        let y = smooth_track(&x, &SmoothConfig::default()).unwrap();
        assert!((y[50] - quadratic(100)[50]).abs() < 1e-10);

        let mut sparse = vec![f64::NAN; 100];
        sparse[0] = 1.0;
        sparse[99] = 1.0;
        let y = smooth_track(&sparse, &SmoothConfig::default()).unwrap();
        assert!(y[50].is_nan());
    }

    #[test]
    fn rejects_short_input_and_bad_window() {
        assert!(matches!(
            smooth_track(&[0.0; 47], &SmoothConfig::default()),
            Err(Error::TooShort { .. })
        ));
        let cfg = SmoothConfig {
            window_points: 3,
            order: 2,
            mode: SmoothMode::Centered,
        };
        assert!(smooth_track(&[0.0; 10], &cfg).is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]
        #[test]
        fn smoothing_is_linear(a in -5.0f64..5.0, b in -5.0f64..5.0, seed in 0u64..1000, causal: bool) {
            let x = noise(80, seed);
            let y = noise(80, seed + 10_000);
            let cfg = if causal { SmoothConfig::default().causal() } else { SmoothConfig::default() };
            let combo: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            let sx = smooth_track(&x, &cfg).unwrap();
            let sy = smooth_track(&y, &cfg).unwrap();
            let sc = smooth_track(&combo, &cfg).unwrap();
            for i in 0..80 {
                proptest::prop_assert!((sc[i] - (a * sx[i] + b * sy[i])).abs() < 1e-10);
            }
        }
    }
}
