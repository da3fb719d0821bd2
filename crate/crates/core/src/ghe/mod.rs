//! Weighted generalized Hurst exponents over sliding windows.
//!
//! For each evaluation time the trailing window of `dt` log prices is
//! summarized by the weighted structure function
//! `Xi(tau, q) = E_theta[|X(t + tau) - X(t)|^q] ~ K_q tau^(q H_q)` and `H_q`
//! is read off the log-log slope.

mod fit;
mod kernel;
mod structure;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use fit::{fit_scaling, HqEstimate};
pub use kernel::WeightKernel;
pub use structure::{structure_function, LogIncrements, StructureTable};

use crate::error::{Error, Result};
use crate::ingest::PriceSeries;

/// Exponents matched by value with this absolute tolerance.
pub const Q_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GheConfig {
    /// Window length in trading days.
    pub dt: usize,
    /// Exponential decay time in trading days.
    pub theta: f64,
    /// Stride between evaluation times.
    pub step: usize,
    pub tau_max: usize,
    pub q_grid: Vec<f64>,
    /// Upper lags whose fits are averaged.
    pub tau_max_range: Vec<usize>,
}

impl Default for GheConfig {
    fn default() -> Self {
        Self {
            dt: 250,
            theta: 250.0,
            step: 5,
            tau_max: 19,
            q_grid: width_grid(),
            tau_max_range: (5..=19).collect(),
        }
    }
}

impl GheConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tau_max < 2 {
            return Err(Error::param("tau_max must be at least 2"));
        }
        if self.dt < self.tau_max + 2 {
            return Err(Error::param(format!(
                "window {} too short for tau_max {}",
                self.dt, self.tau_max
            )));
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(Error::param("theta must be positive"));
        }
        if self.step == 0 {
            return Err(Error::param("step must be at least 1"));
        }
        if self.q_grid.is_empty() {
            return Err(Error::param("empty q grid"));
        }
        if self.q_grid.iter().any(|q| !(*q > 0.0 && q.is_finite())) {
            return Err(Error::param("all q must be positive"));
        }
        if self.q_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("q grid must be strictly increasing"));
        }
        if self.tau_max_range.is_empty()
            || self
                .tau_max_range
                .iter()
                .any(|t| *t < 2 || *t > self.tau_max)
        {
            return Err(Error::param(format!(
                "tau_max_range must be a non-empty subset of [2, {}]",
                self.tau_max
            )));
        }
        Ok(())
    }

    pub fn kernel(&self) -> Result<WeightKernel> {
        WeightKernel::new(self.theta, self.dt)
    }
}

/// `{0.1, 1, 2, 3, 4}`, used for the width proxy and the H' panels.
pub fn width_grid() -> Vec<f64> {
    vec![0.1, 1.0, 2.0, 3.0, 4.0]
}

/// `n` equally spaced exponents from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Sorted union of exponent grids, merging values closer than [`Q_TOLERANCE`].
pub fn merge_grids(grids: &[&[f64]]) -> Vec<f64> {
    let mut all: Vec<f64> = grids.iter().flat_map(|g| g.iter().copied()).collect();
    all.sort_by(f64::total_cmp);
    all.dedup_by(|a, b| (*a - *b).abs() < Q_TOLERANCE);
    all
}

/// Estimates `H_q` from one window with the direct structure-function sum.
///
/// Returns `Ok(None)` for a degenerate window (zero moment at some lag).
pub fn estimate_hq(
    window: &[f64],
    kernel: &WeightKernel,
    q: f64,
    cfg: &GheConfig,
) -> Result<Option<HqEstimate>> {
    if window.len() != cfg.dt {
        return Err(Error::Misaligned(format!(
            "window of {} points, config expects {}",
            window.len(),
            cfg.dt
        )));
    }
    let xi = (1..=cfg.tau_max)
        .map(|tau| structure_function(window, kernel, q, tau))
        .collect::<Result<Vec<_>>>()?;
    Ok(fit_scaling(&xi, q, &cfg.tau_max_range))
}

/// `H_q(t)` on a (time x q) lattice. Gaps are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct GheSurface {
    times: Vec<NaiveDate>,
    /// One-based count of prices consumed at each evaluation time.
    ends: Vec<usize>,
    q_grid: Vec<f64>,
    h: Vec<f64>,
    h_err: Vec<f64>,
    quality: Vec<f64>,
}

impl GheSurface {
    /// Assembles a surface from row-major matrices; used for injected data.
    pub fn from_parts(
        times: Vec<NaiveDate>,
        ends: Vec<usize>,
        q_grid: Vec<f64>,
        h: Vec<f64>,
        h_err: Vec<f64>,
        quality: Vec<f64>,
    ) -> Result<Self> {
        let cells = times.len() * q_grid.len();
        if ends.len() != times.len() || h.len() != cells || h_err.len() != cells || quality.len() != cells {
            return Err(Error::Misaligned("surface matrix shapes disagree".into()));
        }
        Ok(Self {
            times,
            ends,
            q_grid,
            h,
            h_err,
            quality,
        })
    }

    /// A surface whose every row is `h_of_q` evaluated on `q_grid`.
    pub fn from_fn(
        times: Vec<NaiveDate>,
        q_grid: Vec<f64>,
        mut h_of: impl FnMut(usize, f64) -> f64,
    ) -> Self {
        let mut h = Vec::with_capacity(times.len() * q_grid.len());
        for i in 0..times.len() {
            for &q in &q_grid {
                h.push(h_of(i, q));
            }
        }
        let cells = h.len();
        let ends = (1..=times.len()).collect();
        Self {
            times,
            ends,
            q_grid,
            h,
            h_err: vec![0.0; cells],
            quality: vec![1.0; cells],
        }
    }

    pub fn times(&self) -> &[NaiveDate] {
        &self.times
    }

    pub fn ends(&self) -> &[usize] {
        &self.ends
    }

    pub fn q_grid(&self) -> &[f64] {
        &self.q_grid
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn q_index(&self, q: f64) -> Result<usize> {
        self.q_grid
            .iter()
            .position(|g| (g - q).abs() < Q_TOLERANCE)
            .ok_or(Error::MissingQ(q))
    }

    pub fn h(&self, row: usize, col: usize) -> f64 {
        self.h[row * self.q_grid.len() + col]
    }

    pub fn h_err(&self, row: usize, col: usize) -> f64 {
        self.h_err[row * self.q_grid.len() + col]
    }

    pub fn quality(&self, row: usize, col: usize) -> f64 {
        self.quality[row * self.q_grid.len() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let m = self.q_grid.len();
        &self.h[row * m..(row + 1) * m]
    }

    /// `H_q(t)` over all times for one exponent.
    pub fn column(&self, q: f64) -> Result<Vec<f64>> {
        let j = self.q_index(q)?;
        Ok((0..self.len()).map(|i| self.h(i, j)).collect())
    }

    pub fn err_column(&self, q: f64) -> Result<Vec<f64>> {
        let j = self.q_index(q)?;
        Ok((0..self.len()).map(|i| self.h_err(i, j)).collect())
    }

    /// Re-indexes rows onto `times`; rows with no matching date become gaps.
    pub fn align_to(&self, times: &[NaiveDate]) -> Self {
        let m = self.q_grid.len();
        let mut out = Self {
            times: times.to_vec(),
            ends: vec![0; times.len()],
            q_grid: self.q_grid.clone(),
            h: vec![f64::NAN; times.len() * m],
            h_err: vec![f64::NAN; times.len() * m],
            quality: vec![f64::NAN; times.len() * m],
        };
        for (i, t) in times.iter().enumerate() {
            if let Ok(k) = self.times.binary_search(t) {
                out.ends[i] = self.ends[k];
                let (dst, src) = (i * m, k * m);
                out.h[dst..dst + m].copy_from_slice(&self.h[src..src + m]);
                out.h_err[dst..dst + m].copy_from_slice(&self.h_err[src..src + m]);
                out.quality[dst..dst + m].copy_from_slice(&self.quality[src..src + m]);
            }
        }
        out
    }
}

/// Evaluation counts `dt, dt + step, ...` not exceeding `len`.
pub fn evaluation_ends(len: usize, dt: usize, step: usize) -> Vec<usize> {
    if len < dt || step == 0 {
        return Vec::new();
    }
    (dt..=len).step_by(step).collect()
}

/// The surface on the default grid `t = dt, dt + step, ...`.
pub fn ghe_series(series: &PriceSeries, cfg: &GheConfig) -> Result<GheSurface> {
    cfg.validate()?;
    if series.len() < cfg.dt + 1 {
        return Err(Error::TooShort {
            needed: cfg.dt + 1,
            got: series.len(),
        });
    }
    let ends = evaluation_ends(series.len(), cfg.dt, cfg.step);
    ghe_series_at(series, cfg, &ends)
}

/// The surface at explicit evaluation counts; `end` consumes prices
/// `end - dt .. end` (zero-based), so `dt <= end <= series.len()`.
pub fn ghe_series_at(series: &PriceSeries, cfg: &GheConfig, ends: &[usize]) -> Result<GheSurface> {
    cfg.validate()?;
    if ends.is_empty() {
        return Err(Error::TooShort {
            needed: cfg.dt,
            got: series.len(),
        });
    }
    if let Some(bad) = ends.iter().find(|e| **e < cfg.dt || **e > series.len()) {
        return Err(Error::param(format!(
            "evaluation end {bad} outside [{}, {}]",
            cfg.dt,
            series.len()
        )));
    }
    let kernel = cfg.kernel()?;
    let increments = LogIncrements::new(series.log_price(), cfg.tau_max);
    let m = cfg.q_grid.len();
    let cells = ends.len() * m;
    let mut h = vec![f64::NAN; cells];
    let mut h_err = vec![f64::NAN; cells];
    let mut quality = vec![f64::NAN; cells];
    let mut xi = vec![0.0; cfg.tau_max];
    for (j, &q) in cfg.q_grid.iter().enumerate() {
        let table = StructureTable::new(&increments, q);
        for (i, &end) in ends.iter().enumerate() {
            for (tau, slot) in (1..=cfg.tau_max).zip(xi.iter_mut()) {
                *slot = table.xi(end, &kernel, tau);
            }
            if let Some(est) = fit_scaling(&xi, q, &cfg.tau_max_range) {
                h[i * m + j] = est.h;
                h_err[i * m + j] = est.err;
                quality[i * m + j] = est.quality;
            }
        }
    }
    let times = ends.iter().map(|e| series.dates()[e - 1]).collect();
    Ok(GheSurface {
        times,
        ends: ends.to_vec(),
        q_grid: cfg.q_grid.clone(),
        h,
        h_err,
        quality,
    })
}
