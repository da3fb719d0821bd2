//! Time-dependent weighted generalized Hurst exponents and detection of
//! temporal multiscaling patterns in price series.
//!
//! The usual entry points are [`ingest::load_price_series`],
//! [`pipeline::analyze`] and [`report::AnalysisReport`].

pub mod classify;
pub mod cpa;
pub mod error;
pub mod ghe;
pub mod ingest;
pub mod pipeline;
pub mod proxies;
pub mod report;
pub mod smooth;
pub mod stats;
pub mod surrogate;
pub mod synth;

pub use classify::{ClassifierConfig, Metric, Pattern, PatternLabel, PatternTimeline, SlopeStats};
pub use cpa::{Driver, SlopeSpread, TrendSegmentation};
pub use error::{Error, Result};
pub use ghe::{GheConfig, GheSurface, HqEstimate, WeightKernel};
pub use ingest::{CsvFormat, LoadedSeries, PriceSeries, VolatilitySeries};
pub use pipeline::{analyze, Analysis, AnalysisConfig, MetricAnalysis};
pub use proxies::{ProxyTracks, StandardizedTracks};
pub use report::{AnalysisReport, Provenance, ScanTable};
pub use smooth::{SmoothConfig, SmoothMode};
pub use surrogate::SurrogateSeries;
pub use synth::{Model, SynthSpec};
