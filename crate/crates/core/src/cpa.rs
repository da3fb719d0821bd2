//! Change-point segmentation into bins of constant linear trend.
//!
//! The partition minimizes `sum over bins of RSS(linear fit) + penalty * bins`
//! exactly. Candidates are pruned as in PELT; because bins have a minimum
//! length, a pruning decision taken at `t` only becomes effective at
//! `t + min_bin`, which keeps the search exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{index_trend, sample_std, LineFit};

/// Default minimum bin length, in evaluation points.
pub const DEFAULT_MIN_BIN: usize = 10;

/// Prefix sums for O(1) linear-fit residuals on any index range.
struct TrendCost {
    s1: Vec<f64>,
    sx: Vec<f64>,
    sxx: Vec<f64>,
    sy: Vec<f64>,
    syy: Vec<f64>,
    sxy: Vec<f64>,
}

impl TrendCost {
    fn new(y: &[f64]) -> Self {
        let n = y.len();
        let ymean = y.iter().sum::<f64>() / n as f64;
        let xmid = (n as f64 - 1.0) / 2.0;
        let mut c = Self {
            s1: vec![0.0; n + 1],
            sx: vec![0.0; n + 1],
            sxx: vec![0.0; n + 1],
            sy: vec![0.0; n + 1],
            syy: vec![0.0; n + 1],
            sxy: vec![0.0; n + 1],
        };
        for (i, yi) in y.iter().enumerate() {
            let x = i as f64 - xmid;
            let v = yi - ymean;
            c.s1[i + 1] = c.s1[i] + 1.0;
            c.sx[i + 1] = c.sx[i] + x;
            c.sxx[i + 1] = c.sxx[i] + x * x;
            c.sy[i + 1] = c.sy[i] + v;
            c.syy[i + 1] = c.syy[i] + v * v;
            c.sxy[i + 1] = c.sxy[i] + x * v;
        }
        c
    }

    /// Residual sum of squares of the line fitted to `y[a..b]`.
    fn rss(&self, a: usize, b: usize) -> f64 {
        let n = self.s1[b] - self.s1[a];
        if n < 3.0 {
            return 0.0;
        }
        let sx = self.sx[b] - self.sx[a];
        let sy = self.sy[b] - self.sy[a];
        let sxx = self.sxx[b] - self.sxx[a] - sx * sx / n;
        let syy = self.syy[b] - self.syy[a] - sy * sy / n;
        let sxy = self.sxy[b] - self.sxy[a] - sx * sy / n;
        (syy - sxy * sxy / sxx).max(0.0)
    }
}

/// `3 * sigma^2 * ln(N)` with `sigma^2` the residual variance of a single
/// linear fit to the whole track.
pub fn default_penalty(track: &[f64]) -> Result<f64> {
    let n = track.len();
    if n < 3 || track.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate(
            "penalty needs at least 3 finite points".into(),
        ));
    }
    let rss = TrendCost::new(track).rss(0, n);
    Ok(3.0 * rss / (n - 2) as f64 * (n as f64).ln())
}

/// Objective value of a partition; exposed for optimality checks.
pub fn partition_cost(track: &[f64], breakpoints: &[usize], penalty: f64) -> f64 {
    let cost = TrendCost::new(track);
    breakpoints
        .windows(2)
        .map(|w| cost.rss(w[0], w[1]) + penalty)
        .sum()
}

/// Optimal breakpoints `[0, b_1, ..., n]`; every bin spans at least
/// `min_bin` points.
pub fn segment_trends(track: &[f64], penalty: f64, min_bin: usize) -> Result<Vec<usize>> {
    let n = track.len();
    if min_bin < 2 {
        return Err(Error::param("minimum bin length must be at least 2"));
    }
    if !(penalty >= 0.0 && penalty.is_finite()) {
        return Err(Error::param(format!("penalty must be >= 0, got {penalty}")));
    }
    if n < 2 * min_bin {
        return Err(Error::TooShort {
            needed: 2 * min_bin,
            got: n,
        });
    }
    if track.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("track contains gaps".into()));
    }
    let cost = TrendCost::new(track);
    // best[t]: optimal objective for track[..t]; last[t]: its final breakpoint.
    let mut best = vec![f64::INFINITY; n + 1];
    let mut last = vec![0usize; n + 1];
    best[0] = -penalty;
    // (candidate, pruned-from time)
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for t in min_bin..=n {
        let fresh = t - min_bin;
        if best[fresh].is_finite() {
            candidates.push((fresh, usize::MAX));
        }
        candidates.retain(|&(_, dead)| dead > t);
        let mut f_t = f64::INFINITY;
        let mut arg = 0;
        for &(s, _) in &candidates {
            let v = best[s] + cost.rss(s, t) + penalty;
            if v < f_t {
                f_t = v;
                arg = s;
            }
        }
        best[t] = f_t;
        last[t] = arg;
        for cand in candidates.iter_mut() {
            let (s, dead) = *cand;
            if dead == usize::MAX && best[s] + cost.rss(s, t) > f_t {
                *cand = (s, t + min_bin);
            }
        }
    }
    let mut bps = vec![n];
    let mut t = n;
    while t > 0 {
        t = last[t];
        bps.push(t);
    }
    bps.reverse();
    Ok(bps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Driver {
    /// Binning from the low-q track.
    Q1,
    /// Binning from the high-q track.
    Q2,
    /// Binning from the multiscaling magnitude track.
    Gamma,
}

impl std::str::FromStr for Driver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "q1" => Ok(Self::Q1),
            "q2" => Ok(Self::Q2),
            "gamma" => Ok(Self::Gamma),
            other => Err(Error::param(format!("unknown CPA driver {other:?}"))),
        }
    }
}

/// Shared bins with per-bin slopes of both extreme-q tracks.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendSegmentation {
    pub breakpoints: Vec<usize>,
    pub slopes_q1: Vec<f64>,
    pub slopes_q2: Vec<f64>,
    pub slope_errs_q1: Vec<f64>,
    pub slope_errs_q2: Vec<f64>,
    pub penalty: f64,
    pub min_bin: usize,
}

impl TrendSegmentation {
    pub fn bins(&self) -> usize {
        self.breakpoints.len() - 1
    }

    /// Bin containing point `i`.
    pub fn bin_of(&self, i: usize) -> Option<usize> {
        if i >= *self.breakpoints.last()? {
            return None;
        }
        Some(self.breakpoints.partition_point(|b| *b <= i) - 1)
    }

    /// Index ranges of the bins.
    pub fn ranges(&self) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        self.breakpoints.windows(2).map(|w| w[0]..w[1])
    }
}

fn bin_fits(track: &[f64], breakpoints: &[usize]) -> Vec<Option<LineFit>> {
    breakpoints
        .windows(2)
        .map(|w| index_trend(&track[w[0]..w[1]]))
        .collect()
}

/// Segments `track_q1` and fits both tracks on the resulting bins.
pub fn shared_segmentation(
    track_q1: &[f64],
    track_q2: &[f64],
    penalty: f64,
    min_bin: usize,
) -> Result<TrendSegmentation> {
    shared_segmentation_from(track_q1, track_q1, track_q2, penalty, min_bin)
}

/// As [`shared_segmentation`], with the bins taken from `driver`.
pub fn shared_segmentation_from(
    driver: &[f64],
    track_q1: &[f64],
    track_q2: &[f64],
    penalty: f64,
    min_bin: usize,
) -> Result<TrendSegmentation> {
    if track_q1.len() != track_q2.len() || driver.len() != track_q1.len() {
        return Err(Error::Misaligned(format!(
            "tracks of length {}, {} and driver of length {}",
            track_q1.len(),
            track_q2.len(),
            driver.len()
        )));
    }
    let breakpoints = segment_trends(driver, penalty, min_bin)?;
    let fits1 = bin_fits(track_q1, &breakpoints);
    let fits2 = bin_fits(track_q2, &breakpoints);
    let unpack = |fits: &[Option<LineFit>]| -> Result<(Vec<f64>, Vec<f64>)> {
        fits.iter()
            .map(|f| {
                f.map(|f| (f.slope, f.slope_se))
                    .ok_or_else(|| Error::Degenerate("bin without a trend fit".into()))
            })
            .collect::<Result<Vec<_>>>()
            .map(|v| v.into_iter().unzip())
    };
    let (slopes_q1, slope_errs_q1) = unpack(&fits1)?;
    let (slopes_q2, slope_errs_q2) = unpack(&fits2)?;
    Ok(TrendSegmentation {
        breakpoints,
        slopes_q1,
        slopes_q2,
        slope_errs_q1,
        slope_errs_q2,
        penalty,
        min_bin,
    })
}

/// Surrogate slope variability under a given binning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeSpread {
    /// Std over bins of `|b1 - b2|`.
    pub sigma_diff: f64,
    /// Std over bins of `|b1| - |b2|`.
    pub sigma_abs_diff: f64,
    /// Bins that contributed.
    pub bins: usize,
}

/// Fits the surrogate tracks on the real bins. Bins where the surrogate has
/// fewer than three valid points are skipped.
pub fn surrogate_slope_spread(
    surr_q1: &[f64],
    surr_q2: &[f64],
    segmentation: &TrendSegmentation,
) -> Result<SlopeSpread> {
    let n = *segmentation.breakpoints.last().unwrap_or(&0);
    if surr_q1.len() != n || surr_q2.len() != n {
        return Err(Error::Misaligned(format!(
            "surrogate tracks of length {}/{} for a segmentation of {n} points",
            surr_q1.len(),
            surr_q2.len()
        )));
    }
    let mut diff = Vec::new();
    let mut abs_diff = Vec::new();
    for r in segmentation.ranges() {
        let (Some(f1), Some(f2)) = (index_trend(&surr_q1[r.clone()]), index_trend(&surr_q2[r])) else {
            continue;
        };
        diff.push((f1.slope - f2.slope).abs());
        abs_diff.push(f1.slope.abs() - f2.slope.abs());
    }
    if diff.len() < 2 {
        return Err(Error::Degenerate(format!(
            "{} surrogate bins with valid slopes, need at least 2",
            diff.len()
        )));
    }
    Ok(SlopeSpread {
        sigma_diff: sample_std(&diff).unwrap_or(0.0),
        sigma_abs_diff: sample_std(&abs_diff).unwrap_or(0.0),
        bins: diff.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn vee(n: usize, at: usize) -> Vec<f64> {
        (0..n)
            .map(|i| {
                if i < at {
                    i as f64
                } else {
                    (2 * at - 1) as f64 - i as f64
                }
            })
            .collect()
    }

    fn noisy(y: &[f64], sigma: f64, seed: u64) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        let d = Normal::new(0.0, sigma).unwrap();
        y.iter().map(|v| v + d.sample(&mut rng)).collect()
    }

    #[test]
    fn noiseless_switch_is_exact() {
        let y = vee(200, 100);
        let pen = default_penalty(&y).unwrap();
        assert_eq!(segment_trends(&y, pen, DEFAULT_MIN_BIN).unwrap(), vec![0, 100, 200]);
    }

    #[test]
    fn white_noise_is_not_oversegmented() {
        for seed in 0..20 {
            let y = noisy(&vec![0.0; 400], 1.0, seed);
            let bps = segment_trends(&y, default_penalty(&y).unwrap(), DEFAULT_MIN_BIN).unwrap();
            assert!(bps.len() - 1 <= 400 / (4 * DEFAULT_MIN_BIN), "{bps:?}");
        }
    }

    #[test]
    fn respects_minimum_bin() {
        let y = noisy(&vee(120, 60), 3.0, 1);
        let bps = segment_trends(&y, 1.0, 15).unwrap();
        assert!(bps.windows(2).all(|w| w[1] - w[0] >= 15));
        assert_eq!(bps[0], 0);
        assert_eq!(*bps.last().unwrap(), 120);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            segment_trends(&[0.0; 19], 1.0, 10),
            Err(Error::TooShort { .. })
        ));
        let mut y = vec![0.0; 40];
        y[3] = f64::NAN;
        assert!(segment_trends(&y, 1.0, 10).is_err());
        assert!(segment_trends(&[0.0; 40], -1.0, 10).is_err());
        assert!(shared_segmentation(&[0.0; 40], &[0.0; 39], 1.0, 10).is_err());
    }

    #[test]
    fn identical_and_negated_tracks() {
        let a = noisy(&vee(200, 80), 0.5, 3);
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        let pen = default_penalty(&a).unwrap();
        let same = shared_segmentation(&a, &a, pen, 10).unwrap();
        assert_eq!(same.slopes_q1, same.slopes_q2);
        let mirrored = shared_segmentation(&a, &neg, pen, 10).unwrap();
        for (x, y) in mirrored.slopes_q1.iter().zip(&mirrored.slopes_q2) {
            assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn diverging_pair_slopes_recovered() {
        let n = 300;
        let a = noisy(&(0..n).map(|i| 0.01 * i as f64).collect::<Vec<_>>(), 0.05, 4);
        let b = noisy(&(0..n).map(|i| -0.01 * i as f64).collect::<Vec<_>>(), 0.05, 5);
        let seg = shared_segmentation(&a, &b, default_penalty(&a).unwrap(), 10).unwrap();
        for (s1, s2) in seg.slopes_q1.iter().zip(&seg.slopes_q2) {
            assert!((s1 - 0.01).abs() < 0.002, "{s1}");
            assert!((s2 + 0.01).abs() < 0.002, "{s2}");
        }
    }

    #[test]
    fn bin_lookup() {
        let seg = TrendSegmentation {
            breakpoints: vec![0, 10, 25, 40],
            slopes_q1: vec![0.0; 3],
            slopes_q2: vec![0.0; 3],
            slope_errs_q1: vec![0.0; 3],
            slope_errs_q2: vec![0.0; 3],
            penalty: 1.0,
            min_bin: 10,
        };
        assert_eq!(seg.bin_of(0), Some(0));
        assert_eq!(seg.bin_of(9), Some(0));
        assert_eq!(seg.bin_of(10), Some(1));
        assert_eq!(seg.bin_of(39), Some(2));
        assert_eq!(seg.bin_of(40), None);
    }

    #[test]
    fn slope_spread_cases() {
        let y = noisy(&vee(200, 100), 0.1, 6);
        let seg = shared_segmentation(&y, &y, default_penalty(&y).unwrap(), 10).unwrap();
        let flat = vec![0.0; 200];
        let s = surrogate_slope_spread(&flat, &flat, &seg).unwrap();
        assert_eq!((s.sigma_diff, s.sigma_abs_diff), (0.0, 0.0));
        let n1 = noisy(&flat, 1.0, 7);
        let n2 = noisy(&flat, 1.0, 8);
        let s = surrogate_slope_spread(&n1, &n2, &seg).unwrap();
        assert!(s.sigma_diff > 0.0 && s.sigma_diff.is_finite());

        let one_bin = TrendSegmentation {
            breakpoints: vec![0, 200],
            ..seg.clone()
        };
        assert!(surrogate_slope_spread(&n1, &n2, &one_bin).is_err());
        let mut gappy = n1.clone();
        gappy[..100].iter_mut().for_each(|v| *v = f64::NAN);
        let partial = surrogate_slope_spread(&gappy, &n2, &seg);
        assert!(partial.is_err());
    }

    /// Best partition with at most two breakpoints by exhaustive search.
    fn brute_force(y: &[f64], pen: f64, min_bin: usize) -> f64 {
        let n = y.len();
        let mut best = partition_cost(y, &[0, n], pen);
        for a in min_bin..=n - min_bin {
            best = best.min(partition_cost(y, &[0, a, n], pen));
            for b in a + min_bin..=n.saturating_sub(min_bin) {
                best = best.min(partition_cost(y, &[0, a, b, n], pen));
            }
        }
        best
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn optimal_against_exhaustive_search(
            seed in 0u64..10_000,
            n in 40usize..120,
            k1 in 0.1f64..0.9,
            sigma in 0.05f64..2.0,
        ) {
            let at = ((n as f64) * k1) as usize;
            let y = noisy(&vee(n, at.max(1)), sigma, seed);
            let pen = default_penalty(&y).unwrap();
            let bps = segment_trends(&y, pen, 8).unwrap();
            if bps.len() <= 4 {
                let dp = partition_cost(&y, &bps, pen);
                let bf = brute_force(&y, pen, 8);
                proptest::prop_assert!((dp - bf).abs() <= 1e-9 * (1.0 + bf.abs()), "dp {dp} bf {bf}");
            }
        }

        #[test]
        fn offset_and_scale_behaviour(seed in 0u64..1000, c in 0.1f64..10.0, shift in -50.0f64..50.0) {
            let y = noisy(&vee(150, 70), 1.0, seed);
            let pen = default_penalty(&y).unwrap();
            let base = shared_segmentation(&y, &y, pen, 10).unwrap();
            let shifted: Vec<f64> = y.iter().map(|v| v + shift).collect();
            let s = shared_segmentation(&shifted, &shifted, pen, 10).unwrap();
            proptest::prop_assert_eq!(&s.breakpoints, &base.breakpoints);
            for (a, b) in s.slopes_q1.iter().zip(&base.slopes_q1) {
                proptest::prop_assert!((a - b).abs() < 1e-9);
            }
            let scaled: Vec<f64> = y.iter().map(|v| v * c).collect();
            let s = shared_segmentation(&scaled, &scaled, pen * c * c, 10).unwrap();
            proptest::prop_assert_eq!(&s.breakpoints, &base.breakpoints);
            for (a, b) in s.slopes_q1.iter().zip(&base.slopes_q1) {
                proptest::prop_assert!((a - c * b).abs() < 1e-9 * (1.0 + b.abs() * c));
            }
        }
    }
}
