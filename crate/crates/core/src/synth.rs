//! Synthetic price series with known scaling.

use chrono::NaiveDate;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{business_days, PriceSeries};

pub const MIN_LENGTH: usize = 512;
pub const DEFAULT_SIGMA: f64 = 0.01;
pub const DEFAULT_INTERMITTENCY: f64 = 0.6;
const START_CLOSE: f64 = 100.0;

/// Generating process for the daily log returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    /// IID Gaussian returns.
    RandomWalk { sigma: f64 },
    /// Fractional Gaussian noise returns, i.e. fBm log price.
    Fbm { hurst: f64, sigma: f64 },
    /// Gaussian returns modulated by a log-normal binomial cascade; the
    /// intermittency is the standard deviation of the log multipliers.
    Cascade { intermittency: f64, sigma: f64 },
    /// Consecutive regimes joined with a continuous log price.
    Piecewise { regimes: Vec<Regime> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub model: Model,
    /// Number of prices the regime spans.
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub model: Model,
    /// Number of prices.
    pub length: usize,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(model: Model, length: usize, seed: u64) -> Self {
        Self { model, length, seed }
    }

    /// Two regimes of `half` prices each, switching at price index `half`.
    pub fn regime_switch(first: Model, second: Model, half: usize, seed: u64) -> Self {
        let regimes = vec![
            Regime {
                model: first,
                length: half,
            },
            Regime {
                model: second,
                length: half,
            },
        ];
        Self::new(Model::Piecewise { regimes }, 2 * half, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.length < MIN_LENGTH {
            return Err(Error::param(format!(
                "synthetic series need at least {MIN_LENGTH} prices, got {}",
                self.length
            )));
        }
        validate_model(&self.model, true)?;
        if let Model::Piecewise { regimes } = &self.model {
            let total: usize = regimes.iter().map(|r| r.length).sum();
            if total != self.length {
                return Err(Error::param(format!(
                    "regime lengths add up to {total}, series length is {}",
                    self.length
                )));
            }
        }
        Ok(())
    }
}

fn validate_model(model: &Model, top_level: bool) -> Result<()> {
    let positive = |name: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::param(format!("{name} must be positive, got {v}")))
        }
    };
    match model {
        Model::RandomWalk { sigma } => positive("sigma", *sigma),
        Model::Fbm { hurst, sigma } => {
            if !(*hurst > 0.0 && *hurst < 1.0) {
                return Err(Error::param(format!("fBm Hurst exponent must be in (0, 1), got {hurst}")));
            }
            positive("sigma", *sigma)
        }
        Model::Cascade { intermittency, sigma } => {
            if !(*intermittency >= 0.0 && *intermittency <= 1.0) {
                return Err(Error::param(format!(
                    "cascade intermittency must be in [0, 1], got {intermittency}"
                )));
            }
            positive("sigma", *sigma)
        }
        Model::Piecewise { regimes } => {
            if !top_level {
                return Err(Error::param("piecewise regimes cannot nest"));
            }
            if regimes.is_empty() {
                return Err(Error::param("piecewise series needs at least one regime"));
            }
            for r in regimes {
                if r.length < 2 {
                    return Err(Error::param("each regime needs at least 2 prices"));
                }
                validate_model(&r.model, false)?;
            }
            Ok(())
        }
    }
}

/// Generates the series; dates are business days from 2000-01-03 and the
/// first close is 100.
pub fn generate(spec: &SynthSpec) -> Result<PriceSeries> {
    spec.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let returns = match &spec.model {
        Model::Piecewise { regimes } => {
            let mut out = Vec::with_capacity(spec.length - 1);
            for (i, r) in regimes.iter().enumerate() {
                let mut sub = ChaCha20Rng::seed_from_u64(rng.next_u64());
                // the first regime also holds the starting price
                let n = if i == 0 { r.length - 1 } else { r.length };
                out.extend(model_returns(&r.model, n, &mut sub));
            }
            out
        }
        model => model_returns(model, spec.length - 1, &mut rng),
    };
    let mut log_price = Vec::with_capacity(spec.length);
    let mut x = START_CLOSE.ln();
    log_price.push(x);
    for r in returns {
        x += r;
        log_price.push(x);
    }
    let start = NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date");
    PriceSeries::from_log_prices(business_days(start, spec.length), log_price)
}

fn model_returns(model: &Model, n: usize, rng: &mut ChaCha20Rng) -> Vec<f64> {
    match *model {
        Model::RandomWalk { sigma } => (0..n).map(|_| sigma * normal(rng)).collect(),
        Model::Fbm { hurst, sigma } => fgn(n, hurst, rng).into_iter().map(|v| sigma * v).collect(),
        Model::Cascade { intermittency, sigma } => {
            let mu = cascade_measure(n, intermittency, rng);
            mu.into_iter().map(|m| sigma * m.sqrt() * normal(rng)).collect()
        }
        Model::Piecewise { .. } => unreachable!("nesting rejected by validation"),
    }
}

fn normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Autocovariance of unit-variance fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

/// Unit-variance fractional Gaussian noise by circulant embedding
/// (Davies-Harte).
pub fn fgn(n: usize, hurst: f64, rng: &mut impl Rng) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let half = n.next_power_of_two();
    let m = 2 * half;
    let mut c: Vec<Complex<f64>> = (0..m)
        .map(|j| {
            let lag = if j <= half { j } else { m - j };
            Complex::new(fgn_autocovariance(hurst, lag), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut c);
    let mf = m as f64;
    let mut w: Vec<Complex<f64>> = c
        .iter()
        .map(|lambda| {
            // the fGn embedding is nonnegative definite; clamp rounding
            let scale = (lambda.re.max(0.0) / mf).sqrt();
            Complex::new(scale * normal(rng), scale * normal(rng))
        })
        .collect();
    fft.process(&mut w);
    w.into_iter().take(n).map(|z| z.re).collect()
}

/// Unit-mean log-normal binomial cascade over `n` cells: every dyadic
/// interval passes to each half an independent `exp(lambda Z - lambda^2/2)`
/// factor.
pub fn cascade_measure(n: usize, lambda: f64, rng: &mut impl Rng) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let size = n.next_power_of_two();
    let mut mu = vec![1.0; size];
    let mut block = size;
    while block > 1 {
        let half = block / 2;
        for start in (0..size).step_by(half) {
            let w = (lambda * normal(rng) - 0.5 * lambda * lambda).exp();
            for v in &mut mu[start..start + half] {
                *v *= w;
            }
        }
        block = half;
    }
    mu.truncate(n);
    mu
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rw(n: usize, seed: u64) -> SynthSpec {
        SynthSpec::new(Model::RandomWalk { sigma: 0.01 }, n, seed)
    }

    #[test]
    fn random_walk_is_reproducible() {
        let a = generate(&rw(4096, 7)).unwrap();
        let b = generate(&rw(4096, 7)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate(&rw(4096, 8)).unwrap());
        assert_eq!(a.len(), 4096);
        assert!((a.close()[0] - 100.0).abs() < 1e-12);
        let sd = crate::stats::sample_std(a.log_return()).unwrap();
        assert!((sd - 0.01).abs() < 0.0005, "{sd}");
    }

    #[test]
    fn fgn_matches_theoretical_autocovariance() {
        for &h in &[0.3, 0.7] {
            let mut rng = ChaCha20Rng::seed_from_u64(11);
            let reps = 200;
            let n = 1024;
            let mut acov = [0.0; 11];
            let mut acov_sq = [0.0; 11];
            for _ in 0..reps {
                let x = fgn(n, h, &mut rng);
                for lag in 0..=10 {
                    let c: f64 = (0..n - lag).map(|i| x[i] * x[i + lag]).sum::<f64>() / (n - lag) as f64;
                    acov[lag] += c;
                    acov_sq[lag] += c * c;
                }
            }
            for lag in 0..=10 {
                let m = acov[lag] / reps as f64;
                let var = acov_sq[lag] / reps as f64 - m * m;
                let se = (var / reps as f64).sqrt();
                let want = fgn_autocovariance(h, lag);
                assert!((m - want).abs() < 3.0 * se + 1e-3, "H={h} lag={lag}: {m} vs {want}");
            }
        }
    }

    #[test]
    fn cascade_measure_has_unit_mean() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let reps = 50;
        let mut total = 0.0;
        for _ in 0..reps {
            let mu = cascade_measure(1 << 10, 0.3, &mut rng);
            assert!(mu.iter().all(|v| *v > 0.0));
            total += mu.iter().sum::<f64>() / mu.len() as f64;
        }
        let grand = total / reps as f64;
        assert!((grand - 1.0).abs() < 0.15, "{grand}");
        // no intermittency, no modulation
        assert!(cascade_measure(100, 0.0, &mut rng).iter().all(|v| *v == 1.0));
    }

    #[test]
    fn piecewise_is_continuous_and_sized() {
        let spec = SynthSpec::regime_switch(
            Model::RandomWalk { sigma: 0.01 },
            Model::Cascade {
                intermittency: DEFAULT_INTERMITTENCY,
                sigma: 0.01,
            },
            600,
            3,
        );
        let s = generate(&spec).unwrap();
        assert_eq!(s.len(), 1200);
        assert!(s.log_return().iter().all(|r| r.abs() < 0.5));
        assert_eq!(generate(&spec).unwrap(), s);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(generate(&rw(100, 0)).is_err());
        let bad_h = SynthSpec::new(Model::Fbm { hurst: 1.0, sigma: 0.01 }, 1024, 0);
        assert!(generate(&bad_h).is_err());
        let bad_len = SynthSpec {
            length: 1000,
            ..SynthSpec::regime_switch(Model::RandomWalk { sigma: 0.01 }, Model::RandomWalk { sigma: 0.01 }, 600, 0)
        };
        assert!(generate(&bad_len).is_err());
        let nested = SynthSpec::new(
            Model::Piecewise {
                regimes: vec![Regime {
                    model: Model::Piecewise { regimes: vec![] },
                    length: 1024,
                }],
            },
            1024,
            0,
        );
        assert!(generate(&nested).is_err());
    }

    #[test]
    fn spec_serializes_with_kind_tag() {
        let spec = SynthSpec::new(Model::Fbm { hurst: 0.3, sigma: 0.01 }, 4096, 5);
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"kind\":\"fbm\""), "{text}");
        let back: SynthSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }
}
