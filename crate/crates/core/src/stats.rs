//! Small numerical helpers shared by the estimators.

/// Arithmetic mean of the finite entries, `None` when there are none.
pub fn mean(values: &[f64]) -> Option<f64> {
    let (sum, n) = values
        .iter()
        .filter(|v| v.is_finite())
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Sample standard deviation (N - 1 denominator) of the finite entries.
pub fn sample_std(values: &[f64]) -> Option<f64> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.len() < 2 {
        return None;
    }
    let m = finite.iter().sum::<f64>() / finite.len() as f64;
    let ss: f64 = finite.iter().map(|v| (v - m) * (v - m)).sum();
    Some((ss / (finite.len() - 1) as f64).sqrt())
}

/// Ordinary least-squares line through `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; zero when the fit has no residual
    /// degrees of freedom.
    pub slope_se: f64,
    pub r_squared: f64,
}

pub fn ols(x: &[f64], y: &[f64]) -> Option<LineFit> {
    debug_assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let r = yi - intercept - slope * xi;
            r * r
        })
        .sum();
    let slope_se = if n > 2 {
        (rss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let r_squared = if syy > 0.0 { 1.0 - rss / syy } else { 1.0 };
    Some(LineFit {
        slope,
        intercept,
        slope_se,
        r_squared,
    })
}

/// Least-squares fit of `y` against the sample index `0..y.len()`, skipping
/// non-finite entries. Needs at least three finite points.
pub fn index_trend(y: &[f64]) -> Option<LineFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = y
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .map(|(i, v)| (i as f64, *v))
        .unzip();
    if xs.len() < 3 {
        return None;
    }
    ols(&xs, &ys)
}

/// Round to `digits` significant decimal digits.
pub fn round_sig(value: f64, digits: usize) -> f64 {
    if value == 0.0 || !value.is_finite() {
        return value;
    }
    // Scientific formatting rounds half-to-even on the exact binary value,
    // which is what a reader of the printed number expects.
    format!("{:.*e}", digits.saturating_sub(1), value)
        .parse()
        .unwrap_or(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn std_of_three_points() {
        let s = sample_std(&[0.4, 0.5, 0.6]).unwrap();
        assert!((s - 0.1).abs() < 1e-15);
    }

    #[test]
    fn nan_entries_are_ignored() {
        assert_eq!(mean(&[1.0, f64::NAN, 3.0]), Some(2.0));
        assert_eq!(sample_std(&[1.0, f64::NAN]), None);
    }

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 0.5 - 2.0 * v).collect();
        let fit = ols(&x, &y).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-14);
        assert!((fit.intercept - 0.5).abs() < 1e-14);
        assert!(fit.slope_se < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn significant_digit_rounding() {
        assert_eq!(round_sig(0.123456789, 6), 0.123457);
        assert_eq!(round_sig(-12345.678, 6), -12345.7);
        assert_eq!(round_sig(1.0e-7 * 3.14159265, 6), 3.14159e-7);
        assert!(round_sig(f64::NAN, 6).is_nan());
    }
}
