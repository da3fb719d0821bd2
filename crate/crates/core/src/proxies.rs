//! Standardized exponents and the width / curvature multiscaling proxies.
//!
//! Every quantity is expressed in units of the corresponding surrogate
//! standard deviation computed over the whole timeline.

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::ghe::{GheSurface, Q_TOLERANCE};
use crate::stats::{ols, sample_std};

/// Exponent of an uncorrelated random walk.
pub const H_STAR: f64 = 0.5;

/// Sample standard deviation of the surrogate `H_q` series over all valid
/// evaluation times.
pub fn surrogate_sigma(surr: &GheSurface, q: f64) -> Result<f64> {
    let column = surr.column(q)?;
    sample_std(&column).ok_or_else(|| {
        Error::Degenerate(format!("fewer than 2 valid surrogate points at q = {q}"))
    })
}

/// `sqrt(sigma_1^2 + sigma_2^2)`.
pub fn pooled_sigma(sigma_q1: f64, sigma_q2: f64) -> f64 {
    sigma_q1.hypot(sigma_q2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedTracks {
    pub times: Vec<NaiveDate>,
    pub q_grid: Vec<f64>,
    /// Row-major `(times x q_grid)`, NaN for gaps.
    pub h_std: Vec<f64>,
    pub surr_std: Vec<f64>,
    pub h_star: f64,
}

impl StandardizedTracks {
    pub fn column(&self, q: f64) -> Result<Vec<f64>> {
        let m = self.q_grid.len();
        let j = self
            .q_grid
            .iter()
            .position(|g| (g - q).abs() < Q_TOLERANCE)
            .ok_or(Error::MissingQ(q))?;
        Ok((0..self.times.len()).map(|i| self.h_std[i * m + j]).collect())
    }

    pub fn sigma(&self, q: f64) -> Result<f64> {
        self.q_grid
            .iter()
            .position(|g| (g - q).abs() < Q_TOLERANCE)
            .map(|j| self.surr_std[j])
            .ok_or(Error::MissingQ(q))
    }
}

/// Per-q surrogate sigmas on `surr`'s grid, which must match `surface`'s.
pub fn surrogate_sigmas(surface: &GheSurface, surr: &GheSurface) -> Result<Vec<f64>> {
    check_grids(surface, surr)?;
    surface
        .q_grid()
        .iter()
        .map(|&q| surrogate_sigma(surr, q))
        .collect()
}

fn check_grids(a: &GheSurface, b: &GheSurface) -> Result<()> {
    let same = a.q_grid().len() == b.q_grid().len()
        && a
            .q_grid()
            .iter()
            .zip(b.q_grid())
            .all(|(x, y)| (x - y).abs() < Q_TOLERANCE);
    if same {
        Ok(())
    } else {
        Err(Error::Misaligned("real and surrogate q grids differ".into()))
    }
}

/// `H'_q(t) = (H_q(t) - 0.5) / sigma(H^surr_q)`.
pub fn standardize(surface: &GheSurface, surr: &GheSurface) -> Result<StandardizedTracks> {
    let sigmas = surrogate_sigmas(surface, surr)?;
    standardize_with(surface, &sigmas, H_STAR)
}

/// Standardization with externally supplied denominators (e.g. averaged
/// over several surrogates, or applied to the surrogate itself).
pub fn standardize_with(surface: &GheSurface, sigmas: &[f64], h_star: f64) -> Result<StandardizedTracks> {
    let m = surface.q_grid().len();
    if sigmas.len() != m {
        return Err(Error::Misaligned(format!(
            "{} sigmas for {m} exponents",
            sigmas.len()
        )));
    }
    if let Some(j) = sigmas.iter().position(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::Degenerate(format!(
            "surrogate sigma at q = {} is {}",
            surface.q_grid()[j],
            sigmas[j]
        )));
    }
    let mut h_std = Vec::with_capacity(surface.len() * m);
    for i in 0..surface.len() {
        for (j, s) in sigmas.iter().enumerate() {
            h_std.push((surface.h(i, j) - h_star) / s);
        }
    }
    Ok(StandardizedTracks {
        times: surface.times().to_vec(),
        q_grid: surface.q_grid().to_vec(),
        h_std,
        surr_std: sigmas.to_vec(),
        h_star,
    })
}

/// `W(t) = H_q1(t) - H_q2(t)` and `W'(t) = W(t) / pooled`.
pub fn width_track(surface: &GheSurface, q1: f64, q2: f64, pooled: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(q1 < q2) {
        return Err(Error::param(format!("width needs q1 < q2, got {q1}, {q2}")));
    }
    if !(pooled > 0.0 && pooled.is_finite()) {
        return Err(Error::Degenerate(format!("pooled sigma is {pooled}")));
    }
    let a = surface.column(q1)?;
    let b = surface.column(q2)?;
    let w: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    let w_std = w.iter().map(|v| v / pooled).collect();
    Ok((w, w_std))
}

/// Per-time fit of `H_q = A + B q` over the grid points inside `q_range`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTrack {
    pub b: Vec<f64>,
    pub a: Vec<f64>,
    pub r_squared: Vec<f64>,
    /// Number of exponents used in each fit.
    pub points: usize,
}

pub fn curvature_track(surface: &GheSurface, q_range: (f64, f64)) -> Result<CurvatureTrack> {
    let (lo, hi) = q_range;
    if !(lo < hi) {
        return Err(Error::param(format!("empty q range [{lo}, {hi}]")));
    }
    let cols: Vec<usize> = surface
        .q_grid()
        .iter()
        .enumerate()
        .filter(|(_, q)| **q >= lo - Q_TOLERANCE && **q <= hi + Q_TOLERANCE)
        .map(|(j, _)| j)
        .collect();
    if cols.len() < 3 {
        return Err(Error::param(format!(
            "{} exponents inside [{lo}, {hi}], need at least 3",
            cols.len()
        )));
    }
    let qs: Vec<f64> = cols.iter().map(|j| surface.q_grid()[*j]).collect();
    let n = surface.len();
    let mut out = CurvatureTrack {
        b: vec![f64::NAN; n],
        a: vec![f64::NAN; n],
        r_squared: vec![f64::NAN; n],
        points: cols.len(),
    };
    let mut hs = vec![0.0; cols.len()];
    for i in 0..n {
        for (slot, j) in hs.iter_mut().zip(&cols) {
            *slot = surface.h(i, *j);
        }
        if hs.iter().any(|h| !h.is_finite()) {
            continue;
        }
        if let Some(fit) = ols(&qs, &hs) {
            out.b[i] = fit.slope;
            out.a[i] = fit.intercept;
            out.r_squared[i] = fit.r_squared;
        }
    }
    if out.b.iter().all(|b| b.is_nan()) {
        return Err(Error::Degenerate("every time row has a gap".into()));
    }
    Ok(out)
}

/// Width and curvature proxies of a real surface standardized by its
/// surrogate.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxyTracks {
    pub w: Vec<f64>,
    pub w_std: Vec<f64>,
    pub b: Vec<f64>,
    pub b_std: Vec<f64>,
    pub a: Vec<f64>,
    pub b_quality: Vec<f64>,
    pub pooled_std: f64,
    pub surr_b_std: f64,
    pub q_pair: (f64, f64),
    pub q_range_b: (f64, f64),
}

/// Denominators for the proxies, taken from one or more surrogates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxyScales {
    pub pooled_std: f64,
    pub surr_b_std: f64,
}

impl ProxyScales {
    pub fn from_surrogate(surr: &GheSurface, q_pair: (f64, f64), q_range_b: (f64, f64)) -> Result<Self> {
        let pooled_std = pooled_sigma(
            surrogate_sigma(surr, q_pair.0)?,
            surrogate_sigma(surr, q_pair.1)?,
        );
        let b = curvature_track(surr, q_range_b)?.b;
        let surr_b_std = sample_std(&b)
            .ok_or_else(|| Error::Degenerate("fewer than 2 surrogate curvature points".into()))?;
        Ok(Self {
            pooled_std,
            surr_b_std,
        })
    }
}

pub fn proxy_tracks(
    surface: &GheSurface,
    scales: ProxyScales,
    q_pair: (f64, f64),
    q_range_b: (f64, f64),
) -> Result<ProxyTracks> {
    let (w, w_std) = width_track(surface, q_pair.0, q_pair.1, scales.pooled_std)?;
    if !(scales.surr_b_std > 0.0 && scales.surr_b_std.is_finite()) {
        return Err(Error::Degenerate(format!(
            "surrogate curvature sigma is {}",
            scales.surr_b_std
        )));
    }
    let curv = curvature_track(surface, q_range_b)?;
    let b_std = curv.b.iter().map(|b| b / scales.surr_b_std).collect();
    Ok(ProxyTracks {
        w,
        w_std,
        b: curv.b,
        b_std,
        a: curv.a,
        b_quality: curv.r_squared,
        pooled_std: scales.pooled_std,
        surr_b_std: scales.surr_b_std,
        q_pair,
        q_range_b,
    })
}
