//! Daily close-price ingestion and the weighted volatility profile.
//!
//! The time axis is the trading-day index: rows with a missing or
//! non-positive close are dropped, never interpolated.

use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::ghe::WeightKernel;

/// Dated close prices with the derived log-price and log-return vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    dates: Vec<NaiveDate>,
    close: Vec<f64>,
    log_price: Vec<f64>,
    log_return: Vec<f64>,
}

impl PriceSeries {
    /// Builds a series from strictly increasing dates and positive closes.
    pub fn new(dates: Vec<NaiveDate>, close: Vec<f64>) -> Result<Self> {
        if dates.len() != close.len() {
            return Err(Error::Misaligned(format!(
                "{} dates for {} closes",
                dates.len(),
                close.len()
            )));
        }
        if let Some(bad) = close.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return Err(Error::param(format!("close must be positive, got {bad}")));
        }
        check_dates(&dates)?;
        let log_price: Vec<f64> = close.iter().map(|c| c.ln()).collect();
        let log_return = diff(&log_price);
        Ok(Self {
            dates,
            close,
            log_price,
            log_return,
        })
    }

    /// Builds a series from log prices; closes are `exp(log_price)`.
    pub fn from_log_prices(dates: Vec<NaiveDate>, log_price: Vec<f64>) -> Result<Self> {
        if dates.len() != log_price.len() {
            return Err(Error::Misaligned(format!(
                "{} dates for {} log prices",
                dates.len(),
                log_price.len()
            )));
        }
        if log_price.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("log price must be finite"));
        }
        check_dates(&dates)?;
        let close = log_price.iter().map(|x| x.exp()).collect();
        let log_return = diff(&log_price);
        Ok(Self {
            dates,
            close,
            log_price,
            log_return,
        })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn close(&self) -> &[f64] {
        &self.close
    }

    pub fn log_price(&self) -> &[f64] {
        &self.log_price
    }

    /// `log_return()[i] = log_price()[i + 1] - log_price()[i]`.
    pub fn log_return(&self) -> &[f64] {
        &self.log_return
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        self.dates.binary_search(&date).ok()
    }

    /// Contiguous sub-series `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.len() {
            return Err(Error::param(format!(
                "slice {start}..{end} out of range for length {}",
                self.len()
            )));
        }
        Ok(Self {
            dates: self.dates[start..end].to_vec(),
            close: self.close[start..end].to_vec(),
            log_price: self.log_price[start..end].to_vec(),
            log_return: self.log_return[start..end - 1].to_vec(),
        })
    }
}

fn diff(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}

fn check_dates(dates: &[NaiveDate]) -> Result<()> {
    for w in dates.windows(2) {
        if w[1] == w[0] {
            return Err(Error::DuplicateDate(w[0]));
        }
        if w[1] < w[0] {
            return Err(Error::Misaligned(format!(
                "dates not increasing at {} -> {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// Column selector for delimited input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Name(String),
    Index(usize),
}

impl std::str::FromStr for Column {
    type Err = std::convert::Infallible;

    /// A bare integer selects by zero-based index, anything else by name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => Column::Index(i),
            Err(_) => Column::Name(s.to_string()),
        })
    }
}

#[derive(Debug, Clone)]
pub struct CsvFormat {
    pub date: Column,
    pub close: Column,
    pub delimiter: u8,
    /// chrono format string; ISO-8601 by default.
    pub date_format: String,
    pub has_header: bool,
    /// Minimum number of valid rows after cleaning.
    pub min_rows: usize,
}

impl Default for CsvFormat {
    fn default() -> Self {
        Self {
            date: Column::Name("date".into()),
            close: Column::Name("close".into()),
            delimiter: b',',
            date_format: "%Y-%m-%d".into(),
            has_header: true,
            min_rows: 2,
        }
    }
}

impl CsvFormat {
    /// Requires room for one full window of length `dt` plus a return.
    pub fn with_window(mut self, dt: usize) -> Self {
        self.min_rows = dt + 2;
        self
    }
}

#[derive(Debug, Clone)]
pub struct LoadedSeries {
    pub series: PriceSeries,
    /// Rows dropped for a missing, unparseable or non-positive close.
    pub dropped: usize,
}

pub fn load_price_series(path: impl AsRef<Path>, format: &CsvFormat) -> Result<LoadedSeries> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    read_price_series(file, format)
}

pub fn read_price_series(reader: impl Read, format: &CsvFormat) -> Result<LoadedSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(format.delimiter)
        .has_headers(format.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let resolve = |col: &Column, headers: Option<&csv::StringRecord>| -> Result<usize> {
        match col {
            Column::Index(i) => Ok(*i),
            Column::Name(name) => headers
                .and_then(|h| h.iter().position(|f| f.eq_ignore_ascii_case(name)))
                .ok_or_else(|| Error::MissingColumn(name.clone())),
        }
    };
    let headers = if format.has_header {
        Some(rdr.headers()?.clone())
    } else {
        None
    };
    let date_col = resolve(&format.date, headers.as_ref())?;
    let close_col = resolve(&format.close, headers.as_ref())?;

    let mut rows: Vec<(NaiveDate, f64)> = Vec::new();
    let mut dropped = 0;
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1 + usize::from(format.has_header);
        let raw_date = record.get(date_col).unwrap_or("");
        if raw_date.is_empty() && record.iter().all(str::is_empty) {
            continue;
        }
        let date = NaiveDate::parse_from_str(raw_date, &format.date_format).map_err(|_| {
            Error::Date {
                row,
                value: raw_date.to_string(),
            }
        })?;
        match record.get(close_col).and_then(|c| c.parse::<f64>().ok()) {
            Some(c) if c.is_finite() && c > 0.0 => rows.push((date, c)),
            _ => dropped += 1,
        }
    }
    rows.sort_by_key(|(d, _)| *d);
    if rows.len() < format.min_rows {
        return Err(Error::TooShort {
            needed: format.min_rows,
            got: rows.len(),
        });
    }
    let (dates, close): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(LoadedSeries {
        series: PriceSeries::new(dates, close)?,
        dropped,
    })
}

/// Writes `date,close` rows in the default input format.
///
/// Closes use the shortest representation that parses back to the same
/// value, so a written series reloads bit-identically.
pub fn write_price_series(series: &PriceSeries, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "close"])?;
    for (d, c) in series.dates().iter().zip(series.close()) {
        w.write_record([d.format("%Y-%m-%d").to_string(), c.to_string()])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn save_price_series(series: &PriceSeries, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })?;
    write_price_series(series, std::io::BufWriter::new(file))
}

/// Weighted volatility `V(t)` on the trading-day axis.
#[derive(Debug, Clone, PartialEq)]
pub struct VolatilitySeries {
    values: Vec<f64>,
    window: usize,
    theta: f64,
}

impl VolatilitySeries {
    /// Wraps externally supplied volatilities; `values[k]` belongs to price
    /// index `window - 1 + k`.
    pub fn from_values(values: Vec<f64>, window: usize, theta: f64) -> Result<Self> {
        if window < 2 {
            return Err(Error::param("volatility window must be at least 2"));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::param(format!("volatility must be >= 0, got {v}")));
        }
        Ok(Self {
            values,
            window,
            theta,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Price index of the first defined value.
    pub fn offset(&self) -> usize {
        self.window - 1
    }

    /// Volatility at price index `i`, if defined there.
    pub fn at(&self, i: usize) -> Option<f64> {
        i.checked_sub(self.offset())
            .and_then(|k| self.values.get(k).copied())
    }

    /// Values spread over the full price axis, NaN before the first window.
    pub fn aligned(&self, len: usize) -> Vec<f64> {
        (0..len).map(|i| self.at(i).unwrap_or(f64::NAN)).collect()
    }
}

/// Standard deviation of the weight-multiplied log returns over each
/// trailing window of `dt` prices (`dt - 1` returns).
///
/// The most recent return carries the largest weight. Weights follow the
/// exponential kernel rescaled to unit mean, so that `theta -> inf` yields
/// the plain sample standard deviation and `V` keeps the units of a daily
/// log return.
pub fn weighted_volatility(series: &PriceSeries, dt: usize, theta: f64) -> Result<VolatilitySeries> {
    if dt < 2 {
        return Err(Error::param("volatility window must be at least 2"));
    }
    if !(theta > 0.0) {
        return Err(Error::param("theta must be positive"));
    }
    if series.len() < dt {
        return Err(Error::TooShort {
            needed: dt,
            got: series.len(),
        });
    }
    let n = dt - 1;
    let kernel = WeightKernel::new(theta, n)?;
    let scale = n as f64;
    let r = series.log_return();
    let mut weighted = vec![0.0; n];
    let values = (dt..=series.len())
        .map(|end| {
            // returns r[end - dt ..= end - 2]; s = 0 is the latest
            for (s, slot) in weighted.iter_mut().enumerate() {
                *slot = r[end - 2 - s] * kernel.weights()[s] * scale;
            }
            if n < 2 {
                0.0
            } else {
                crate::stats::sample_std(&weighted).unwrap_or(0.0)
            }
        })
        .collect();
    Ok(VolatilitySeries {
        values,
        window: dt,
        theta,
    })
}

/// Consecutive business days (Mon-Fri) starting at `start`.
pub fn business_days(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    use chrono::{Datelike, Weekday};
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d.succ_opt().expect("date overflow");
    }
    out
}
