//! Serializable analysis report, plots and the two experiments.

mod experiments;
mod plot;

pub use experiments::{delete_events, scan_dt, ScanRow, ScanTable, PLATEAU_MIN_DT};
pub use plot::{render_panels, render_panels_svg};

use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classify::{Metric, PatternLabel};
use crate::cpa::{Driver, SlopeSpread};
use crate::error::{Error, Result};
use crate::ingest::{write_price_series, PriceSeries};
use crate::pipeline::{Analysis, AnalysisConfig, MetricAnalysis};
use crate::smooth::smooth_track;
use crate::stats::round_sig;
use crate::surrogate::RNG_ALGORITHM;

pub const SCHEMA_VERSION: u32 = 1;
/// Significant digits of every number the report writes.
pub const SIG_DIGITS: usize = 6;

fn r6(v: f64) -> Option<f64> {
    v.is_finite().then(|| round_sig(v, SIG_DIGITS))
}

fn r6v(v: &[f64]) -> Vec<Option<f64>> {
    v.iter().map(|x| r6(*x)).collect()
}

fn r6f(v: f64) -> f64 {
    round_sig(v, SIG_DIGITS)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub version: String,
    pub rng: String,
}

impl Default for Generator {
    fn default() -> Self {
        Self {
            name: "wghe".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            rng: RNG_ALGORITHM.into(),
        }
    }
}

/// Where the input came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: Option<String>,
    /// SHA-256 of the input bytes.
    pub sha256: String,
    pub rows: usize,
    pub dropped_rows: usize,
    pub first_date: NaiveDate,
    pub last_date: NaiveDate,
}

impl Provenance {
    pub fn from_file(path: impl AsRef<Path>, series: &PriceSeries, dropped_rows: usize) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::from_bytes(&bytes, Some(path.display().to_string()), series, dropped_rows))
    }

    /// Digest of the series written in the ingest format.
    pub fn from_series(series: &PriceSeries, source: Option<String>) -> Result<Self> {
        let mut bytes = Vec::new();
        write_price_series(series, &mut bytes)?;
        Ok(Self::from_bytes(&bytes, source, series, 0))
    }

    fn from_bytes(bytes: &[u8], source: Option<String>, series: &PriceSeries, dropped_rows: usize) -> Self {
        Self {
            source,
            sha256: hex::encode(Sha256::digest(bytes)),
            rows: series.len(),
            dropped_rows,
            first_date: series.dates()[0],
            last_date: series.dates()[series.len() - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceTrack {
    pub dates: Vec<NaiveDate>,
    pub close: Vec<Option<f64>>,
    /// Weighted volatility per day, absent before the first full window.
    pub volatility: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentTrack {
    pub q: f64,
    /// Surrogate standard deviation used as the denominator.
    pub sigma: f64,
    pub h: Vec<Option<f64>>,
    pub h_std: Vec<Option<f64>>,
    pub h_std_smoothed: Vec<Option<f64>>,
    pub surrogate_h: Vec<Option<f64>>,
    pub surrogate_h_std: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyTrack {
    /// `pooled` for the width, `sigma(B_surr)` for the curvature.
    pub scale: f64,
    pub raw: Vec<Option<f64>>,
    pub standardized: Vec<Option<f64>>,
    pub smoothed: Vec<Option<f64>>,
    pub surrogate_raw: Vec<Option<f64>>,
    pub surrogate_standardized: Vec<Option<f64>>,
    /// Fit R² per time (curvature only).
    pub quality: Option<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinReport {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub start_index: usize,
    pub end_index: usize,
    pub slope_q1: f64,
    pub slope_q2: f64,
    pub slope_err_q1: Option<f64>,
    pub slope_err_q2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineEntry {
    pub date: NaiveDate,
    pub label: PatternLabel,
    pub gamma: Option<f64>,
    pub beta_q1: f64,
    pub beta_q2: f64,
    pub divergence: Option<f64>,
    pub asymmetry: Option<f64>,
    pub reversed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric: Metric,
    pub q1: f64,
    pub q2: f64,
    pub track_q1: Vec<Option<f64>>,
    pub track_q2: Vec<Option<f64>>,
    pub gamma: Vec<Option<f64>>,
    pub surrogate_gamma: Vec<Option<f64>>,
    pub driver: Driver,
    pub penalty: f64,
    pub min_bin: usize,
    pub bins: Vec<BinReport>,
    pub spread: SlopeSpread,
    pub timeline: Vec<TimelineEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub generator: Generator,
    pub config: AnalysisConfig,
    pub provenance: Provenance,
    pub prices: PriceTrack,
    /// Evaluation dates shared by every track below.
    pub times: Vec<NaiveDate>,
    pub exponents: Vec<ExponentTrack>,
    pub width: ProxyTrack,
    pub curvature: ProxyTrack,
    pub width_analysis: MetricReport,
    pub curvature_analysis: MetricReport,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
}

impl AnalysisReport {
    pub fn new(series: &PriceSeries, analysis: &Analysis, provenance: Provenance) -> Result<Self> {
        let cfg = &analysis.config;
        let vol = analysis.volatility.aligned(series.len());
        let prices = PriceTrack {
            dates: series.dates().to_vec(),
            close: r6v(series.close()),
            volatility: r6v(&vol),
        };
        let mut exponents = Vec::with_capacity(cfg.ghe.q_grid.len());
        for &q in &cfg.ghe.q_grid {
            let h_std = analysis.h_std.column(q)?;
            let surr = analysis.surr_h_std.column(q)?;
            exponents.push(ExponentTrack {
                q,
                sigma: r6f(analysis.h_std.sigma(q)?),
                h: r6v(&analysis.surface.column(q)?),
                h_std_smoothed: r6v(&smooth_track(&h_std, &cfg.smooth)?),
                h_std: r6v(&h_std),
                surrogate_h: r6v(&analysis.surrogate_surface.column(q)?),
                surrogate_h_std: r6v(&surr),
            });
        }
        let p = &analysis.proxies;
        let sp = &analysis.surr_proxies;
        let width = ProxyTrack {
            scale: r6f(p.pooled_std),
            raw: r6v(&p.w),
            standardized: r6v(&p.w_std),
            smoothed: r6v(&smooth_track(&p.w_std, &cfg.smooth)?),
            surrogate_raw: r6v(&sp.w),
            surrogate_standardized: r6v(&sp.w_std),
            quality: None,
        };
        let curvature = ProxyTrack {
            scale: r6f(p.surr_b_std),
            raw: r6v(&p.b),
            standardized: r6v(&p.b_std),
            smoothed: r6v(&smooth_track(&p.b_std, &cfg.smooth)?),
            surrogate_raw: r6v(&sp.b),
            surrogate_standardized: r6v(&sp.b_std),
            quality: Some(r6v(&p.b_quality)),
        };
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            generator: Generator::default(),
            config: cfg.clone(),
            provenance,
            prices,
            times: analysis.surface.times().to_vec(),
            exponents,
            width,
            curvature,
            width_analysis: metric_report(&analysis.width, cfg),
            curvature_analysis: metric_report(&analysis.curvature, cfg),
            warnings: analysis.warnings.clone(),
            notes: Vec::new(),
        })
    }

    /// The analysis for the configured metric.
    pub fn primary(&self) -> &MetricReport {
        match self.config.classifier.metric {
            Metric::Width => &self.width_analysis,
            Metric::Curvature => &self.curvature_analysis,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(text)?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(Error::param(format!(
                "report schema {} is not the supported {SCHEMA_VERSION}",
                report.schema_version
            )));
        }
        Ok(report)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|source| Error::Write {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}

fn metric_report(m: &MetricAnalysis, cfg: &AnalysisConfig) -> MetricReport {
    let seg = &m.segmentation;
    let times = &m.timeline.times;
    let bins = seg
        .ranges()
        .enumerate()
        .map(|(i, r)| BinReport {
            start: times[r.start],
            end: times[r.end - 1],
            start_index: r.start,
            end_index: r.end,
            slope_q1: r6f(seg.slopes_q1[i]),
            slope_q2: r6f(seg.slopes_q2[i]),
            slope_err_q1: r6(seg.slope_errs_q1[i]),
            slope_err_q2: r6(seg.slope_errs_q2[i]),
        })
        .collect();
    let t = &m.timeline;
    let timeline = (0..t.labels.len())
        .map(|i| TimelineEntry {
            date: t.times[i],
            label: t.labels[i],
            gamma: r6(t.gamma_std[i]),
            beta_q1: r6f(t.slope_stats[i].beta_q1),
            beta_q2: r6f(t.slope_stats[i].beta_q2),
            divergence: r6(t.slope_stats[i].divergence),
            asymmetry: r6(t.slope_stats[i].asymmetry),
            reversed: t.reversed[i],
        })
        .collect();
    MetricReport {
        metric: m.metric,
        q1: m.extremes.0,
        q2: m.extremes.1,
        track_q1: r6v(&m.track_q1),
        track_q2: r6v(&m.track_q2),
        gamma: r6v(&m.gamma),
        surrogate_gamma: r6v(&m.surr_gamma),
        driver: cfg.driver,
        penalty: r6f(seg.penalty),
        min_bin: seg.min_bin,
        bins,
        spread: SlopeSpread {
            sigma_diff: r6f(m.spread.sigma_diff),
            sigma_abs_diff: r6f(m.spread.sigma_abs_diff),
            bins: m.spread.bins,
        },
        timeline,
    }
}
