use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ghe::{ghe_series, GheConfig};
use crate::ingest::{weighted_volatility, PriceSeries};
use crate::pipeline::surrogate_surface;
use crate::stats::{mean, round_sig, sample_std};

use super::SIG_DIGITS;

/// Windows at least this long define the width plateau.
pub const PLATEAU_MIN_DT: usize = 250;
const DT_RANGE: (usize, usize) = (60, 1250);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub dt: usize,
    pub real_mean: f64,
    pub real_stderr: f64,
    pub surrogate_mean: f64,
    pub surrogate_std: f64,
    /// Percent reduction per day of the distance to the plateau between this
    /// window and the next; absent on the last row.
    pub improvement_pct_per_day: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub q1: f64,
    pub q2: f64,
    pub rows: Vec<ScanRow>,
    pub plateau: f64,
    /// Windows averaged into the plateau.
    pub plateau_dts: Vec<usize>,
}

impl ScanTable {
    pub fn to_csv(&self) -> String {
        let f = |v: f64| round_sig(v, SIG_DIGITS).to_string();
        let mut out = String::from(
            "dt,real_mean_width,real_stderr,surrogate_mean_width,surrogate_std,improvement_pct_per_day\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.dt,
                f(r.real_mean),
                f(r.real_stderr),
                f(r.surrogate_mean),
                f(r.surrogate_std),
                r.improvement_pct_per_day.map(f).unwrap_or_default()
            ));
        }
        out
    }
}

/// Mean width `H_q1 - H_q2` of the real series and of a volatility-matched
/// surrogate for each window length, with `theta = dt`.
pub fn scan_dt(
    series: &PriceSeries,
    dt_list: &[usize],
    q1: f64,
    q2: f64,
    base: &GheConfig,
    seed: u64,
) -> Result<ScanTable> {
    if !(q1 < q2) {
        return Err(Error::param(format!("scan needs q1 < q2, got {q1}, {q2}")));
    }
    let mut dts = dt_list.to_vec();
    dts.sort_unstable();
    dts.dedup();
    if dts.is_empty() {
        return Err(Error::param("empty window list"));
    }
    if let Some(bad) = dts.iter().find(|d| **d < DT_RANGE.0 || **d > DT_RANGE.1) {
        return Err(Error::param(format!(
            "window {bad} outside [{}, {}]",
            DT_RANGE.0, DT_RANGE.1
        )));
    }
    let mut rows = Vec::with_capacity(dts.len());
    for &dt in &dts {
        let cfg = GheConfig {
            dt,
            theta: dt as f64,
            q_grid: vec![q1, q2],
            ..base.clone()
        };
        let real = ghe_series(series, &cfg)?;
        let vol = weighted_volatility(series, dt, dt as f64)?;
        let surr = surrogate_surface(series, &vol, &real, &cfg, seed)?;
        let width = |s: &crate::ghe::GheSurface| -> Result<Vec<f64>> {
            let a = s.column(q1)?;
            let b = s.column(q2)?;
            Ok(a.iter().zip(&b).map(|(x, y)| x - y).filter(|w| w.is_finite()).collect())
        };
        let wr = width(&real)?;
        let ws = width(&surr)?;
        let (Some(real_mean), Some(real_std), Some(surrogate_mean), Some(surrogate_std)) =
            (mean(&wr), sample_std(&wr), mean(&ws), sample_std(&ws))
        else {
            return Err(Error::TooShort {
                needed: 2 * dt + 2 * cfg.step,
                got: series.len(),
            });
        };
        rows.push(ScanRow {
            dt,
            real_mean,
            real_stderr: real_std / (wr.len() as f64).sqrt(),
            surrogate_mean,
            surrogate_std,
            improvement_pct_per_day: None,
        });
    }
    let plateau_dts: Vec<usize> = match dts.iter().filter(|d| **d >= PLATEAU_MIN_DT).count() {
        0 => vec![*dts.last().expect("non-empty")],
        _ => dts.iter().copied().filter(|d| *d >= PLATEAU_MIN_DT).collect(),
    };
    let plateau = rows
        .iter()
        .filter(|r| plateau_dts.contains(&r.dt))
        .map(|r| r.real_mean)
        .sum::<f64>()
        / plateau_dts.len() as f64;
    for i in 0..rows.len().saturating_sub(1) {
        let d0 = (rows[i].real_mean - plateau).abs();
        let d1 = (rows[i + 1].real_mean - plateau).abs();
        let days = (rows[i + 1].dt - rows[i].dt) as f64;
        rows[i].improvement_pct_per_day = (d0 > 0.0).then(|| 100.0 * (d0 - d1) / d0 / days);
    }
    Ok(ScanTable {
        q1,
        q2,
        rows,
        plateau,
        plateau_dts,
    })
}

/// Removes the listed days and their returns. Every later log price moves by
/// the removed returns so all remaining daily returns are unchanged; dropping
/// the first day also drops the return into the second.
pub fn delete_events(series: &PriceSeries, dates: &[NaiveDate]) -> Result<PriceSeries> {
    let mut drop = vec![false; series.len()];
    for d in dates {
        let i = series.index_of(*d).ok_or(Error::DateNotFound(*d))?;
        drop[i] = true;
    }
    if !drop.contains(&true) {
        return Ok(series.clone());
    }
    let lr = series.log_return();
    let mut shift = 0.0;
    let mut kept_dates = Vec::new();
    let mut kept_close = Vec::new();
    for (i, &gone) in drop.iter().enumerate() {
        if gone {
            if i > 0 {
                shift += lr[i - 1];
            }
            continue;
        }
        if kept_dates.is_empty() {
            // nothing before this day survives, so nothing to splice
            shift = 0.0;
        }
        kept_dates.push(series.dates()[i]);
        kept_close.push(if shift == 0.0 {
            series.close()[i]
        } else {
            series.close()[i] * (-shift).exp()
        });
    }
    if kept_dates.len() < 2 {
        return Err(Error::param("deletion leaves fewer than 2 days"));
    }
    PriceSeries::new(kept_dates, kept_close)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::business_days;
    use crate::synth::{generate, Model, SynthSpec};

    fn day(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    fn small() -> PriceSeries {
        let closes = vec![100.0, 101.0, 106.05, 104.0, 105.0, 103.0];
        PriceSeries::new(business_days(day(2000, 1, 3), 6), closes).unwrap()
    }

    #[test]
    fn deleting_a_jump_splices_it_out() {
        let s = small();
        let gone = s.dates()[2]; // +5% day
        let out = delete_events(&s, &[gone]).unwrap();
        assert_eq!(out.len(), 5);
        assert_eq!(out.index_of(gone), None);
        let shift = 1.05f64.ln();
        for (k, i) in [(2usize, 3usize), (3, 4), (4, 5)] {
            assert!((out.log_price()[k] - (s.log_price()[i] - shift)).abs() < 1e-12);
        }
        let expected: Vec<f64> = [0usize, 2, 3, 4].iter().map(|i| s.log_return()[*i]).collect();
        for (a, b) in out.log_return().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(out.close()[..2], s.close()[..2]);
    }

    #[test]
    fn crash_days_leave_no_crash_return() {
        let dates = vec![day(1987, 10, 15), day(1987, 10, 16), day(1987, 10, 19), day(1987, 10, 20), day(1987, 10, 21), day(1987, 10, 22), day(1987, 10, 23)];
        let closes = vec![298.08, 282.70, 224.84, 236.83, 258.38, 248.25, 248.22];
        let s = PriceSeries::new(dates.clone(), closes).unwrap();
        assert!(s.log_return().iter().any(|r| r.exp_m1() <= -0.20));
        let out = delete_events(&s, &dates[2..6]).unwrap();
        assert!(out.log_return().iter().all(|r| r.exp_m1() > -0.20));
        assert_eq!(out.len(), 3);
    }

    #[test]
    fn deleting_nothing_or_missing_dates() {
        let s = small();
        assert_eq!(delete_events(&s, &[]).unwrap(), s);
        assert!(matches!(
            delete_events(&s, &[day(1999, 1, 1)]),
            Err(Error::DateNotFound(_))
        ));
    }

    #[test]
    fn deleting_the_first_day_drops_its_successor_return() {
        let s = small();
        let out = delete_events(&s, &[s.dates()[0]]).unwrap();
        assert_eq!(out.close(), &s.close()[1..]);
        assert_eq!(out.log_return(), &s.log_return()[1..]);
    }

    fn rw(n: usize) -> PriceSeries {
        generate(&SynthSpec::new(Model::RandomWalk { sigma: 0.01 }, n, 5)).unwrap()
    }

    #[test]
    fn single_window_scan_is_its_own_plateau() {
        let t = scan_dt(&rw(1500), &[250], 1.0, 4.0, &GheConfig::default(), 1).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.plateau, t.rows[0].real_mean);
        assert_eq!(t.plateau_dts, vec![250]);
        assert!(t.rows[0].improvement_pct_per_day.is_none());
        assert_eq!(t.to_csv().lines().count(), 2);
    }

    #[test]
    fn scan_rejects_out_of_range_windows() {
        let s = rw(1500);
        assert!(scan_dt(&s, &[30], 1.0, 4.0, &GheConfig::default(), 1).is_err());
        assert!(scan_dt(&s, &[1000], 1.0, 4.0, &GheConfig::default(), 1).is_err());
        assert!(scan_dt(&s, &[250], 4.0, 1.0, &GheConfig::default(), 1).is_err());
    }
}
