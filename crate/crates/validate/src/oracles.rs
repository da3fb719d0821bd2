//! Brute-force reference computations. Nothing here calls into the
//! optimized code paths of `wghe-core`.

/// Kernel weights from the definition: `exp(-s / theta)` normalized by a
/// directly accumulated sum.
pub fn kernel_weights(theta: f64, dt: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..dt).map(|s| (-(s as f64) / theta).exp()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Weighted mean of `|x(j) - x(j - tau)|^q` over the `dt - tau` increments
/// inside the window of `dt` log prices ending just before `end`, the
/// increment ending at `end - 1` carrying weight `exp(0)`.
pub fn structure_function(log_price: &[f64], end: usize, dt: usize, theta: f64, q: f64, tau: usize) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for s in 0..dt - tau {
        let j = end - 1 - s;
        let w = (-(s as f64) / theta).exp();
        num += w * (log_price[j] - log_price[j - tau]).abs().powf(q);
        den += w;
    }
    num / den
}

/// Residual sum of squares of the least-squares line through
/// `(i, y[i])`, recomputed from scratch.
pub fn line_rss(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let mx = (n - 1.0) / 2.0;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (i, v) in y.iter().enumerate() {
        let dx = i as f64 - mx;
        sxx += dx * dx;
        sxy += dx * (v - my);
    }
    let slope = sxy / sxx;
    y.iter()
        .enumerate()
        .map(|(i, v)| {
            let r = v - my - slope * (i as f64 - mx);
            r * r
        })
        .sum()
}

/// Best single breakpoint by exhaustive search: the `k` minimizing the
/// two-line RSS with both pieces at least `min_bin` long.
pub fn best_single_breakpoint(y: &[f64], min_bin: usize) -> usize {
    let n = y.len();
    let mut best = (f64::INFINITY, min_bin);
    for k in min_bin..=n - min_bin {
        let rss = line_rss(&y[..k]) + line_rss(&y[k..]);
        if rss < best.0 {
            best = (rss, k);
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_by_hand() {
        // theta = 1/ln 2 halves each step: 4/7, 2/7, 1/7
        let w = kernel_weights(1.0 / 2f64.ln(), 3);
        for (a, b) in w.iter().zip([4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn structure_function_by_hand() {
        // increments of lag 1 ending at 3, 2, 1: |4-1|, |1-3|, |3-0|
        let x = [0.0, 3.0, 1.0, 4.0];
        let theta = 1.0 / 2f64.ln();
        let xi = structure_function(&x, 4, 4, theta, 2.0, 1);
        let want = (4.0 * 9.0 + 2.0 * 4.0 + 1.0 * 9.0) / 7.0;
        assert!((xi - want).abs() < 1e-12);
    }

    #[test]
    fn breakpoint_of_a_kink() {
        let y: Vec<f64> = (0..60).map(|i| if i < 25 { i as f64 } else { 25.0 - 2.0 * (i - 25) as f64 }).collect();
        assert_eq!(best_single_breakpoint(&y, 10), 25);
        assert!(line_rss(&y[..25]) < 1e-20);
    }
}
