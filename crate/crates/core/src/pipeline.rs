//! End-to-end analysis of one price series.

use serde::{Deserialize, Serialize};

use crate::classify::{classify, ClassifierConfig, Metric, PatternTimeline};
use crate::cpa::{
    default_penalty, shared_segmentation_from, surrogate_slope_spread, Driver, SlopeSpread, TrendSegmentation,
    DEFAULT_MIN_BIN,
};
use crate::error::{Error, Result};
use crate::ghe::{ghe_series, ghe_series_at, linspace, merge_grids, GheConfig, GheSurface};
use crate::ingest::{weighted_volatility, PriceSeries, VolatilitySeries};
use crate::proxies::{
    proxy_tracks, standardize_with, surrogate_sigmas, ProxyScales, ProxyTracks, StandardizedTracks, H_STAR,
};
use crate::smooth::{smooth_track, SmoothConfig};
use crate::stats::mean;
use crate::surrogate::generate_surrogate;

/// Mean curvature-fit R² below which a report carries a warning.
pub const MIN_MEAN_B_QUALITY: f64 = 0.85;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    /// `q_grid` lists the exponents shown in the H' panels; the pair and the
    /// curvature grid are merged into it for the computation.
    pub ghe: GheConfig,
    pub q_pair: (f64, f64),
    pub b_range: (f64, f64),
    pub b_points: usize,
    pub classifier: ClassifierConfig,
    pub smooth: SmoothConfig,
    /// `None` selects the default BIC-style penalty per track.
    pub penalty: Option<f64>,
    pub min_bin: usize,
    pub driver: Driver,
    pub seed: u64,
    pub surrogate_reps: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            ghe: GheConfig::default(),
            q_pair: (0.1, 4.0),
            b_range: (0.1, 1.0),
            b_points: 23,
            classifier: ClassifierConfig::default(),
            smooth: SmoothConfig::default(),
            penalty: None,
            min_bin: DEFAULT_MIN_BIN,
            driver: Driver::Q1,
            seed: 0,
            surrogate_reps: 1,
        }
    }
}

impl AnalysisConfig {
    pub fn b_grid(&self) -> Vec<f64> {
        linspace(self.b_range.0, self.b_range.1, self.b_points)
    }

    /// The exponents actually estimated.
    pub fn full_q_grid(&self) -> Vec<f64> {
        merge_grids(&[&self.ghe.q_grid, &[self.q_pair.0, self.q_pair.1], &self.b_grid()])
    }

    pub fn estimation_config(&self) -> GheConfig {
        GheConfig {
            q_grid: self.full_q_grid(),
            ..self.ghe.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ghe.validate()?;
        self.classifier.validate()?;
        self.smooth.validate()?;
        if !(self.q_pair.0 > 0.0 && self.q_pair.0 < self.q_pair.1) {
            return Err(Error::param(format!("q pair needs 0 < q1 < q2, got {:?}", self.q_pair)));
        }
        if !(self.b_range.0 > 0.0 && self.b_range.0 < self.b_range.1) {
            return Err(Error::param(format!("curvature range needs 0 < lo < hi, got {:?}", self.b_range)));
        }
        if self.b_points < 3 {
            return Err(Error::param("curvature fit needs at least 3 exponents"));
        }
        if self.surrogate_reps == 0 {
            return Err(Error::param("surrogate_reps must be at least 1"));
        }
        if self.min_bin < 3 {
            return Err(Error::param("min_bin must be at least 3"));
        }
        if let Some(p) = self.penalty {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::param(format!("penalty must be nonnegative, got {p}")));
            }
        }
        Ok(())
    }

    /// Extreme exponents whose trends are compared under `metric`.
    pub fn extremes(&self, metric: Metric) -> (f64, f64) {
        match metric {
            Metric::Width => self.q_pair,
            Metric::Curvature => self.b_range,
        }
    }

    /// Seed of surrogate replicate `k`.
    pub fn surrogate_seed(&self, k: usize) -> u64 {
        self.seed.wrapping_add(k as u64)
    }
}

/// Segmentation and labels for one multiscaling metric.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricAnalysis {
    pub metric: Metric,
    pub extremes: (f64, f64),
    /// Smoothed standardized tracks on the evaluation axis.
    pub track_q1: Vec<f64>,
    pub track_q2: Vec<f64>,
    pub gamma: Vec<f64>,
    pub surr_track_q1: Vec<f64>,
    pub surr_track_q2: Vec<f64>,
    pub surr_gamma: Vec<f64>,
    pub segmentation: TrendSegmentation,
    pub spread: SlopeSpread,
    pub timeline: PatternTimeline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub config: AnalysisConfig,
    pub volatility: VolatilitySeries,
    pub surface: GheSurface,
    /// First surrogate, on the real evaluation dates.
    pub surrogate_surface: GheSurface,
    pub h_std: StandardizedTracks,
    pub surr_h_std: StandardizedTracks,
    pub proxies: ProxyTracks,
    pub surr_proxies: ProxyTracks,
    pub width: MetricAnalysis,
    pub curvature: MetricAnalysis,
    pub warnings: Vec<String>,
}

impl Analysis {
    /// The analysis for the configured metric.
    pub fn primary(&self) -> &MetricAnalysis {
        match self.config.classifier.metric {
            Metric::Width => &self.width,
            Metric::Curvature => &self.curvature,
        }
    }
}

/// GHE surface of a surrogate realization, realigned to `real`'s dates.
/// Real dates whose window starts before the surrogate do not exist on it.
pub fn surrogate_surface(
    series: &PriceSeries,
    volatility: &VolatilitySeries,
    real: &GheSurface,
    cfg: &GheConfig,
    seed: u64,
) -> Result<GheSurface> {
    let surr = generate_surrogate(series, volatility, seed)?;
    let offset = surr.offset();
    let ends: Vec<usize> = real
        .ends()
        .iter()
        .filter(|e| **e >= offset + cfg.dt)
        .map(|e| e - offset)
        .collect();
    if ends.len() < 2 {
        return Err(Error::TooShort {
            needed: 2 * cfg.dt + cfg.step,
            got: series.len(),
        });
    }
    Ok(ghe_series_at(&surr.base, cfg, &ends)?.align_to(real.times()))
}

pub fn analyze(series: &PriceSeries, cfg: &AnalysisConfig) -> Result<Analysis> {
    cfg.validate()?;
    let est = cfg.estimation_config();
    let volatility = weighted_volatility(series, est.dt, est.theta)?;
    let surface = ghe_series(series, &est)?;
    if surface.len() < cfg.smooth.window_points {
        return Err(Error::TooShort {
            needed: est.dt + est.step * cfg.smooth.window_points,
            got: series.len(),
        });
    }

    let surrogates = (0..cfg.surrogate_reps)
        .map(|k| surrogate_surface(series, &volatility, &surface, &est, cfg.surrogate_seed(k)))
        .collect::<Result<Vec<_>>>()?;
    let reps = surrogates.len() as f64;
    let mut sigmas = vec![0.0; est.q_grid.len()];
    let mut pooled_std = 0.0;
    let mut surr_b_std = 0.0;
    for s in &surrogates {
        for (acc, v) in sigmas.iter_mut().zip(surrogate_sigmas(&surface, s)?) {
            *acc += v / reps;
        }
        let scales = ProxyScales::from_surrogate(s, cfg.q_pair, cfg.b_range)?;
        pooled_std += scales.pooled_std / reps;
        surr_b_std += scales.surr_b_std / reps;
    }
    let scales = ProxyScales {
        pooled_std,
        surr_b_std,
    };

    let h_std = standardize_with(&surface, &sigmas, H_STAR)?;
    let proxies = proxy_tracks(&surface, scales, cfg.q_pair, cfg.b_range)?;
    let surr_views = surrogates
        .iter()
        .map(|s| {
            Ok((
                standardize_with(s, &sigmas, H_STAR)?,
                proxy_tracks(s, scales, cfg.q_pair, cfg.b_range)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let width = metric_analysis(Metric::Width, cfg, &h_std, &proxies, &surr_views)?;
    let curvature = metric_analysis(Metric::Curvature, cfg, &h_std, &proxies, &surr_views)?;

    let mut warnings = Vec::new();
    if let Some(q) = mean(&proxies.b_quality) {
        if q < MIN_MEAN_B_QUALITY {
            warnings.push(format!(
                "mean curvature fit R^2 is {q:.3}, below {MIN_MEAN_B_QUALITY}"
            ));
        }
    }
    let (surr_h_std, surr_proxies) = surr_views.into_iter().next().expect("at least one surrogate");
    let surrogate_surface = surrogates.into_iter().next().expect("at least one surrogate");
    Ok(Analysis {
        config: cfg.clone(),
        volatility,
        surface,
        surrogate_surface,
        h_std,
        surr_h_std,
        proxies,
        surr_proxies,
        width,
        curvature,
        warnings,
    })
}

fn gamma_track(metric: Metric, proxies: &ProxyTracks) -> Vec<f64> {
    match metric {
        Metric::Width => proxies.w_std.clone(),
        Metric::Curvature => proxies.b_std.iter().map(|b| -b).collect(),
    }
}

fn metric_analysis(
    metric: Metric,
    cfg: &AnalysisConfig,
    h_std: &StandardizedTracks,
    proxies: &ProxyTracks,
    surr_views: &[(StandardizedTracks, ProxyTracks)],
) -> Result<MetricAnalysis> {
    let (q1, q2) = cfg.extremes(metric);
    let smooth = |t: &[f64]| smooth_track(t, &cfg.smooth);
    let track_q1 = smooth(&h_std.column(q1)?)?;
    let track_q2 = smooth(&h_std.column(q2)?)?;
    let gamma = smooth(&gamma_track(metric, proxies))?;

    let driver = match cfg.driver {
        Driver::Q1 => &track_q1,
        Driver::Q2 => &track_q2,
        Driver::Gamma => &gamma,
    };
    let penalty = match cfg.penalty {
        Some(p) => p,
        None => default_penalty(driver)?,
    };
    let segmentation = shared_segmentation_from(driver, &track_q1, &track_q2, penalty, cfg.min_bin)?;

    let mut sigma_diff = 0.0;
    let mut sigma_abs_diff = 0.0;
    let mut bins = usize::MAX;
    let mut first = None;
    for (st, px) in surr_views {
        let s1 = smooth(&st.column(q1)?)?;
        let s2 = smooth(&st.column(q2)?)?;
        let spread = surrogate_slope_spread(&s1, &s2, &segmentation)?;
        sigma_diff += spread.sigma_diff / surr_views.len() as f64;
        sigma_abs_diff += spread.sigma_abs_diff / surr_views.len() as f64;
        bins = bins.min(spread.bins);
        if first.is_none() {
            first = Some((s1, s2, smooth(&gamma_track(metric, px))?));
        }
    }
    let spread = SlopeSpread {
        sigma_diff,
        sigma_abs_diff,
        bins,
    };
    let (surr_track_q1, surr_track_q2, surr_gamma) = first.ok_or_else(|| Error::param("no surrogate"))?;
    let classifier = ClassifierConfig {
        metric,
        ..cfg.classifier
    };
    let timeline = classify(
        &gamma,
        &segmentation,
        &spread,
        &track_q1,
        &track_q2,
        &h_std.times,
        &classifier,
    )?;
    Ok(MetricAnalysis {
        metric,
        extremes: (q1, q2),
        track_q1,
        track_q2,
        gamma,
        surr_track_q1,
        surr_track_q2,
        surr_gamma,
        segmentation,
        spread,
        timeline,
    })
}

/// The panel grid `{0.1, 1, 2, 3, 4}` merged with the default curvature grid.
pub fn default_full_grid() -> Vec<f64> {
    AnalysisConfig::default().full_q_grid()
}
