//! Five stacked panels as a standalone SVG document:
//! (a) closes and volatility, (b) H' tracks with width-based pattern bands,
//! (c) W' against the surrogate, (d) low-q H' tracks with curvature-based
//! bands, (e) B' against the surrogate.

use std::fmt::Write as _;
use std::path::Path;

use chrono::{Datelike, NaiveDate};

use crate::classify::{Pattern, PatternLabel};
use crate::error::{Error, Result};

use super::{AnalysisReport, TimelineEntry};

const WIDTH: f64 = 1200.0;
const PANEL_H: f64 = 190.0;
const GAP: f64 = 34.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 70.0;
const TOP: f64 = 30.0;
const LEGEND_H: f64 = 60.0;

const LINE_COLORS: [&str; 6] = ["#1f4e9c", "#2a9d8f", "#8a5a00", "#9c2f6b", "#c0392b", "#555555"];

fn pattern_color(p: Pattern) -> &'static str {
    match p {
        Pattern::S => "#d9d9d9",
        Pattern::M => "#e74c3c",
        Pattern::ML => "#f5b7b1",
        Pattern::AMinus => "#1f77b4",
        Pattern::APlus => "#17becf",
        Pattern::AZero => "#2ca02c",
        Pattern::MirrorAMinus => "#9467bd",
        Pattern::MirrorAPlus => "#e377c2",
        Pattern::MirrorAZero => "#bcbd22",
        Pattern::AL => "#ff7f0e",
        Pattern::MirrorAL => "#8c564b",
    }
}

fn band_opacity(label: PatternLabel) -> &'static str {
    if label.is_reversed() {
        "0.22"
    } else {
        "0.45"
    }
}

pub fn render_panels(report: &AnalysisReport, out: impl AsRef<Path>) -> Result<()> {
    let svg = render_panels_svg(report)?;
    let out = out.as_ref();
    std::fs::write(out, svg).map_err(|source| Error::Write {
        path: out.to_path_buf(),
        source,
    })
}

struct Frame {
    top: f64,
    x0: NaiveDate,
    span_days: f64,
    ymin: f64,
    ymax: f64,
}

impl Frame {
    fn x(&self, d: NaiveDate) -> f64 {
        let days = (d - self.x0).num_days() as f64;
        LEFT + (WIDTH - LEFT - RIGHT) * days / self.span_days
    }

    fn y(&self, v: f64) -> f64 {
        let f = (v - self.ymin) / (self.ymax - self.ymin);
        self.top + PANEL_H * (1.0 - f)
    }

    fn with_range(&self, ymin: f64, ymax: f64) -> Frame {
        Frame {
            top: self.top,
            x0: self.x0,
            span_days: self.span_days,
            ymin,
            ymax,
        }
    }
}

fn range_of<'a>(tracks: impl IntoIterator<Item = &'a [Option<f64>]>, extra: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for t in tracks {
        for v in t.iter().flatten() {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    for v in extra {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn polyline(svg: &mut String, f: &Frame, dates: &[NaiveDate], values: &[Option<f64>], color: &str, width: f64, dash: bool) {
    let mut run: Vec<(f64, f64)> = Vec::new();
    let flush = |svg: &mut String, run: &mut Vec<(f64, f64)>| {
        if run.len() > 1 {
            let pts: Vec<String> = run.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="{width}"{} points="{}"/>"#,
                if dash { r#" stroke-dasharray="4 3""# } else { "" },
                pts.join(" ")
            );
        }
        run.clear();
    };
    for (d, v) in dates.iter().zip(values) {
        match v {
            Some(v) => run.push((f.x(*d), f.y(*v))),
            None => flush(svg, &mut run),
        }
    }
    flush(svg, &mut run);
}

fn hline(svg: &mut String, f: &Frame, v: f64, color: &str) {
    if v > f.ymin && v < f.ymax {
        let _ = writeln!(
            svg,
            r#"<line x1="{LEFT:.2}" x2="{:.2}" y1="{y:.2}" y2="{y:.2}" stroke="{color}" stroke-width="0.8" stroke-dasharray="2 3"/>"#,
            WIDTH - RIGHT,
            y = f.y(v)
        );
    }
}

fn bands(svg: &mut String, f: &Frame, timeline: &[TimelineEntry], last_date: NaiveDate) {
    let mut i = 0;
    while i < timeline.len() {
        let label = timeline[i].label;
        let mut j = i;
        while j + 1 < timeline.len() && timeline[j + 1].label == label {
            j += 1;
        }
        let x0 = f.x(timeline[i].date);
        let x1 = f.x(timeline.get(j + 1).map_or(last_date, |e| e.date));
        let _ = writeln!(
            svg,
            r#"<rect class="band" data-label="{label}" x="{x0:.2}" y="{:.2}" width="{:.2}" height="{PANEL_H:.2}" fill="{}" fill-opacity="{}"/>"#,
            f.top,
            (x1 - x0).max(0.5),
            pattern_color(label.pattern()),
            band_opacity(label)
        );
        i = j + 1;
    }
}

fn frame_box(svg: &mut String, f: &Frame, title: &str, ylabel: &str) {
    let _ = writeln!(
        svg,
        r##"<rect x="{LEFT:.2}" y="{:.2}" width="{:.2}" height="{PANEL_H:.2}" fill="none" stroke="#333333" stroke-width="1"/>"##,
        f.top,
        WIDTH - LEFT - RIGHT
    );
    let _ = writeln!(
        svg,
        r#"<text x="{LEFT:.2}" y="{:.2}" font-size="13" font-weight="bold">{title}</text>"#,
        f.top - 6.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{y:.2}" font-size="11" transform="rotate(-90 14 {y:.2})" text-anchor="middle">{ylabel}</text>"#,
        y = f.top + PANEL_H / 2.0
    );
    for v in [f.ymin, 0.5 * (f.ymin + f.ymax), f.ymax] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{}</text>"#,
            LEFT - 4.0,
            f.y(v) + 3.0,
            tick(v)
        );
    }
}

fn tick(v: f64) -> String {
    if v.abs() >= 1000.0 || (v != 0.0 && v.abs() < 0.01) {
        format!("{v:.2e}")
    } else {
        format!("{v:.2}")
    }
}

fn year_ticks(svg: &mut String, f: &Frame, first: NaiveDate, last: NaiveDate, bottom: f64) {
    let years = (last.year() - first.year()).max(1);
    let every = ((years as f64 / 12.0).ceil() as i32).max(1);
    let mut y = first.year() + 1;
    while y <= last.year() {
        if (y - first.year()) % every == 0 {
            let d = NaiveDate::from_ymd_opt(y, 1, 1).expect("valid date");
            let x = f.x(d);
            let _ = writeln!(
                svg,
                r##"<line x1="{x:.2}" x2="{x:.2}" y1="{TOP:.2}" y2="{bottom:.2}" stroke="#bbbbbb" stroke-width="0.5"/>"##
            );
            let _ = writeln!(
                svg,
                r#"<text x="{x:.2}" y="{:.2}" font-size="10" text-anchor="middle">{y}</text>"#,
                bottom + 14.0
            );
        }
        y += 1;
    }
}

/// Labels present in either timeline, in legend order.
pub(crate) fn present_labels(report: &AnalysisReport) -> Vec<PatternLabel> {
    let mut seen: Vec<PatternLabel> = Vec::new();
    for e in report
        .width_analysis
        .timeline
        .iter()
        .chain(&report.curvature_analysis.timeline)
    {
        if !seen.contains(&e.label) {
            seen.push(e.label);
        }
    }
    PatternLabel::all().into_iter().filter(|l| seen.contains(l)).collect()
}

pub fn render_panels_svg(report: &AnalysisReport) -> Result<String> {
    if report.width_analysis.timeline.is_empty() || report.times.is_empty() {
        return Err(Error::Degenerate("report has an empty pattern timeline".into()));
    }
    let dates = &report.prices.dates;
    let (first, last) = (dates[0], dates[dates.len() - 1]);
    let span_days = ((last - first).num_days() as f64).max(1.0);
    let height = TOP + 5.0 * (PANEL_H + GAP) + LEGEND_H;
    let frame = |k: usize| Frame {
        top: TOP + k as f64 * (PANEL_H + GAP),
        x0: first,
        span_days,
        ymin: 0.0,
        ymax: 1.0,
    };
    let times = &report.times;
    let cfg = &report.config.classifier;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}" font-family="sans-serif">"#
    );
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n");

    // (a)
    let (lo, hi) = range_of([report.prices.close.as_slice()], &[]);
    let fa = frame(0).with_range(lo, hi);
    frame_box(&mut svg, &fa, "(a) close and weighted volatility", "close");
    polyline(&mut svg, &fa, dates, &report.prices.close, "#000000", 1.0, false);
    let (vlo, vhi) = range_of([report.prices.volatility.as_slice()], &[0.0]);
    let fv = fa.with_range(vlo, vhi);
    polyline(&mut svg, &fv, dates, &report.prices.volatility, "#c0392b", 0.8, false);
    let _ = writeln!(
        svg,
        r##"<text x="{:.2}" y="{:.2}" font-size="10" fill="#c0392b">V max {}</text>"##,
        WIDTH - RIGHT + 4.0,
        fv.top + 10.0,
        tick(vhi)
    );

    // (b)
    let tracks: Vec<&[Option<f64>]> = report.exponents.iter().map(|e| e.h_std_smoothed.as_slice()).collect();
    let (lo, hi) = range_of(tracks.iter().copied(), &[0.0]);
    let fb = frame(1).with_range(lo, hi);
    bands(&mut svg, &fb, &report.width_analysis.timeline, last);
    frame_box(&mut svg, &fb, "(b) smoothed H'_q, width-based patterns", "H'");
    for (k, e) in report.exponents.iter().enumerate() {
        polyline(&mut svg, &fb, times, &e.h_std_smoothed, LINE_COLORS[k % LINE_COLORS.len()], 1.2, false);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" fill="{}">q={}</text>"#,
            WIDTH - RIGHT + 4.0,
            fb.top + 12.0 + 12.0 * k as f64,
            LINE_COLORS[k % LINE_COLORS.len()],
            e.q
        );
    }

    // (c)
    let w = &report.width;
    let (lo, hi) = range_of([w.smoothed.as_slice(), w.surrogate_standardized.as_slice()], &[cfg.phi_h, 0.0]);
    let fc = frame(2).with_range(lo, hi);
    frame_box(&mut svg, &fc, "(c) standardized width W', real and surrogate", "W'");
    hline(&mut svg, &fc, cfg.phi_l, "#888888");
    hline(&mut svg, &fc, cfg.phi_h, "#888888");
    polyline(&mut svg, &fc, times, &w.surrogate_standardized, "#7f7f7f", 0.8, true);
    polyline(&mut svg, &fc, times, &w.smoothed, "#1f4e9c", 1.2, false);

    // (d)
    let ca = &report.curvature_analysis;
    let (lo, hi) = range_of([ca.track_q1.as_slice(), ca.track_q2.as_slice()], &[0.0]);
    let fd = frame(3).with_range(lo, hi);
    bands(&mut svg, &fd, &ca.timeline, last);
    frame_box(&mut svg, &fd, "(d) smoothed low-q H'_q, curvature-based patterns", "H'");
    polyline(&mut svg, &fd, times, &ca.track_q1, LINE_COLORS[0], 1.2, false);
    polyline(&mut svg, &fd, times, &ca.track_q2, LINE_COLORS[1], 1.2, false);

    // (e)
    let b = &report.curvature;
    let (lo, hi) = range_of([b.smoothed.as_slice(), b.surrogate_standardized.as_slice()], &[-cfg.phi_h, 0.0]);
    let fe = frame(4).with_range(lo, hi);
    frame_box(&mut svg, &fe, "(e) standardized curvature B', real and surrogate", "B'");
    hline(&mut svg, &fe, -cfg.phi_l, "#888888");
    hline(&mut svg, &fe, -cfg.phi_h, "#888888");
    polyline(&mut svg, &fe, times, &b.surrogate_standardized, "#7f7f7f", 0.8, true);
    polyline(&mut svg, &fe, times, &b.smoothed, "#1f4e9c", 1.2, false);

    year_ticks(&mut svg, &fa, first, last, fe.top + PANEL_H);

    // legend
    let ly = TOP + 5.0 * (PANEL_H + GAP) + 10.0;
    for (k, label) in present_labels(report).iter().enumerate() {
        let x = LEFT + 70.0 * (k % 14) as f64;
        let y = ly + 22.0 * (k / 14) as f64;
        let _ = writeln!(
            svg,
            r#"<g class="legend-item" data-label="{label}"><rect x="{x:.2}" y="{y:.2}" width="14" height="12" fill="{}" fill-opacity="{}"/><text x="{:.2}" y="{:.2}" font-size="11">{label}</text></g>"#,
            pattern_color(label.pattern()),
            band_opacity(*label),
            x + 18.0,
            y + 10.0
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
