//! Temporal pattern labelling.
//!
//! Each evaluation time is graded by its standardized multiscaling magnitude
//! (uniscaling, weak, strong) and then, using the trend slopes of the two
//! extreme-q tracks in its bin, by the symmetry of their co-evolution.
//! When the low-q track lies below the high-q one the roles of the two
//! tracks are interchanged and the label gets an `r` prefix.

use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::cpa::{SlopeSpread, TrendSegmentation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Width,
    Curvature,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "width" => Ok(Self::Width),
            "curvature" => Ok(Self::Curvature),
            other => Err(Error::param(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub phi_l: f64,
    pub phi_h: f64,
    pub phi_s: f64,
    pub metric: Metric,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            phi_l: 0.32,
            phi_h: 1.64,
            phi_s: 1.64,
            metric: Metric::Width,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.phi_l && self.phi_l < self.phi_h) {
            return Err(Error::param(format!(
                "thresholds need 0 < phi_l < phi_h, got {} and {}",
                self.phi_l, self.phi_h
            )));
        }
        if !(self.phi_s > 0.0) {
            return Err(Error::param("phi_s must be positive"));
        }
        Ok(())
    }
}

/// Pattern family, without the reversal prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pattern {
    /// Uniscaling.
    S,
    /// Strong symmetric multiscaling: parallel extreme-q trends.
    M,
    /// Weak symmetric multiscaling.
    ML,
    /// Steeper high-q trend, falling.
    AMinus,
    /// Steeper low-q trend, high-q rising.
    APlus,
    /// Diverging trends of similar steepness.
    AZero,
    MirrorAMinus,
    MirrorAPlus,
    MirrorAZero,
    /// Weak, diverging.
    AL,
    /// Weak, converging.
    MirrorAL,
}

impl Pattern {
    pub const ALL: [Pattern; 11] = [
        Pattern::S,
        Pattern::M,
        Pattern::ML,
        Pattern::AMinus,
        Pattern::APlus,
        Pattern::AZero,
        Pattern::MirrorAMinus,
        Pattern::MirrorAPlus,
        Pattern::MirrorAZero,
        Pattern::AL,
        Pattern::MirrorAL,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Pattern::S => "S",
            Pattern::M => "M",
            Pattern::ML => "ML",
            Pattern::AMinus => "A-",
            Pattern::APlus => "A+",
            Pattern::AZero => "A0",
            Pattern::MirrorAMinus => "mA-",
            Pattern::MirrorAPlus => "mA+",
            Pattern::MirrorAZero => "mA0",
            Pattern::AL => "AL",
            Pattern::MirrorAL => "mAL",
        }
    }

    /// Strong asymmetric patterns (A-, A+, A0 and mirrors).
    pub fn is_asymmetric_strong(self) -> bool {
        matches!(
            self,
            Pattern::AMinus
                | Pattern::APlus
                | Pattern::AZero
                | Pattern::MirrorAMinus
                | Pattern::MirrorAPlus
                | Pattern::MirrorAZero
        )
    }

    /// M or any strong asymmetric pattern.
    pub fn is_strong(self) -> bool {
        self == Pattern::M || self.is_asymmetric_strong()
    }

    /// The pattern with both trends' signs flipped.
    pub fn mirror(self) -> Pattern {
        match self {
            Pattern::AMinus => Pattern::MirrorAMinus,
            Pattern::MirrorAMinus => Pattern::AMinus,
            Pattern::APlus => Pattern::MirrorAPlus,
            Pattern::MirrorAPlus => Pattern::APlus,
            Pattern::AZero => Pattern::MirrorAZero,
            Pattern::MirrorAZero => Pattern::AZero,
            Pattern::AL => Pattern::MirrorAL,
            Pattern::MirrorAL => Pattern::AL,
            other => other,
        }
    }
}

/// A pattern plus the reversal flag. `S` is never reversed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternLabel {
    pattern: Pattern,
    reversed: bool,
}

impl PatternLabel {
    pub fn new(pattern: Pattern, reversed: bool) -> Self {
        Self {
            pattern,
            reversed: reversed && pattern != Pattern::S,
        }
    }

    pub fn pattern(self) -> Pattern {
        self.pattern
    }

    pub fn is_reversed(self) -> bool {
        self.reversed
    }

    /// Every label, in legend order.
    pub fn all() -> Vec<PatternLabel> {
        let mut out: Vec<PatternLabel> = Pattern::ALL.iter().map(|p| Self::new(*p, false)).collect();
        out.extend(Pattern::ALL[1..].iter().map(|p| Self::new(*p, true)));
        out
    }
}

impl fmt::Display for PatternLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.reversed {
            f.write_str("r")?;
        }
        f.write_str(self.pattern.as_str())
    }
}

impl std::str::FromStr for PatternLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let find = |name: &str| Pattern::ALL.iter().copied().find(|p| p.as_str() == name);
        if let Some(p) = find(s) {
            return Ok(Self::new(p, false));
        }
        match s.strip_prefix('r').and_then(find) {
            Some(p) if p != Pattern::S => Ok(Self::new(p, true)),
            _ => Err(Error::param(format!("unknown pattern label {s:?}"))),
        }
    }
}

impl Serialize for PatternLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PatternLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Slope evidence behind one label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeStats {
    pub beta_q1: f64,
    pub beta_q2: f64,
    /// `|b1 - b2| / sigma_diff`.
    pub divergence: f64,
    /// `| |b1| - |b2| | / sigma_abs_diff`.
    pub asymmetry: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternTimeline {
    pub times: Vec<NaiveDate>,
    pub labels: Vec<PatternLabel>,
    /// Magnitude used for grading, sign-adjusted for reversal.
    pub gamma_std: Vec<f64>,
    pub slope_stats: Vec<SlopeStats>,
    pub reversed: Vec<bool>,
    pub config: ClassifierConfig,
}

impl PatternTimeline {
    pub fn count(&self, pred: impl Fn(PatternLabel) -> bool) -> usize {
        self.labels.iter().filter(|l| pred(**l)).count()
    }

    pub fn fraction(&self, pred: impl Fn(PatternLabel) -> bool) -> f64 {
        if self.labels.is_empty() {
            0.0
        } else {
            self.count(pred) as f64 / self.labels.len() as f64
        }
    }
}

/// Labels one time point from its oriented quantities: `gamma` and the
/// slopes `(b1, b2)` already swapped if the tracks are reversed.
pub fn label_point(gamma: f64, b1: f64, b2: f64, spread: &SlopeSpread, cfg: &ClassifierConfig) -> (Pattern, SlopeStats) {
    let divergence = (b1 - b2).abs() / spread.sigma_diff;
    let asymmetry = ((b1.abs() - b2.abs()) / spread.sigma_abs_diff).abs();
    let stats = SlopeStats {
        beta_q1: b1,
        beta_q2: b2,
        divergence,
        asymmetry,
    };
    let distinct_trends = divergence > cfg.phi_s;
    let diverging = b1 > b2;
    let zero_family = if diverging {
        Pattern::AZero
    } else {
        Pattern::MirrorAZero
    };
    let pattern = if gamma < cfg.phi_l {
        Pattern::S
    } else if gamma > cfg.phi_h {
        if !distinct_trends {
            Pattern::M
        } else if !(asymmetry > cfg.phi_s) || b2 == 0.0 || b1.abs() == b2.abs() {
            // no measurable asymmetry direction
            zero_family
        } else if b1.abs() < b2.abs() {
            if b2 < 0.0 {
                Pattern::AMinus
            } else {
                Pattern::MirrorAMinus
            }
        } else if b2 > 0.0 {
            Pattern::APlus
        } else {
            Pattern::MirrorAPlus
        }
    } else if !distinct_trends {
        Pattern::ML
    } else if diverging {
        Pattern::AL
    } else {
        Pattern::MirrorAL
    };
    (pattern, stats)
}

/// Labels every time of the shared axis.
///
/// `gamma_std` is the standardized magnitude in the natural orientation
/// (`W'` or `-B'`); it is negated where the tracks are reversed, as is the
/// slope pair's role.
pub fn classify(
    gamma_std: &[f64],
    segmentation: &TrendSegmentation,
    spread: &SlopeSpread,
    h_std_q1: &[f64],
    h_std_q2: &[f64],
    times: &[NaiveDate],
    cfg: &ClassifierConfig,
) -> Result<PatternTimeline> {
    cfg.validate()?;
    let n = gamma_std.len();
    if h_std_q1.len() != n || h_std_q2.len() != n || times.len() != n {
        return Err(Error::Misaligned(format!(
            "gamma has {n} points, tracks {} and {}, times {}",
            h_std_q1.len(),
            h_std_q2.len(),
            times.len()
        )));
    }
    if !(spread.sigma_diff > 0.0 && spread.sigma_abs_diff > 0.0) {
        return Err(Error::Degenerate(format!(
            "surrogate slope spread is zero (diff {}, abs diff {})",
            spread.sigma_diff, spread.sigma_abs_diff
        )));
    }
    let mut out = PatternTimeline {
        times: times.to_vec(),
        labels: Vec::with_capacity(n),
        gamma_std: Vec::with_capacity(n),
        slope_stats: Vec::with_capacity(n),
        reversed: Vec::with_capacity(n),
        config: *cfg,
    };
    for i in 0..n {
        let bin = segmentation
            .bin_of(i)
            .ok_or_else(|| Error::Misaligned(format!("point {i} is outside every bin")))?;
        let reversed = h_std_q1[i] < h_std_q2[i];
        let (b1, b2) = (segmentation.slopes_q1[bin], segmentation.slopes_q2[bin]);
        let (gamma, b1, b2) = if reversed {
            (-gamma_std[i], b2, b1)
        } else {
            (gamma_std[i], b1, b2)
        };
        let (pattern, stats) = label_point(gamma, b1, b2, spread, cfg);
        out.labels.push(PatternLabel::new(pattern, reversed));
        out.gamma_std.push(gamma);
        out.slope_stats.push(stats);
        out.reversed.push(reversed);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spread(d: f64, a: f64) -> SlopeSpread {
        SlopeSpread {
            sigma_diff: d,
            sigma_abs_diff: a,
            bins: 5,
        }
    }

    fn one_bin(n: usize, b1: f64, b2: f64) -> TrendSegmentation {
        TrendSegmentation {
            breakpoints: vec![0, n],
            slopes_q1: vec![b1],
            slopes_q2: vec![b2],
            slope_errs_q1: vec![0.0],
            slope_errs_q2: vec![0.0],
            penalty: 1.0,
            min_bin: 2,
        }
    }

    fn dates(n: usize) -> Vec<NaiveDate> {
        crate::ingest::business_days(NaiveDate::from_ymd_opt(2000, 1, 3).unwrap(), n)
    }

    fn run(gamma: f64, b1: f64, b2: f64, sp: SlopeSpread) -> PatternTimeline {
        let n = 4;
        classify(
            &vec![gamma; n],
            &one_bin(n, b1, b2),
            &sp,
            &vec![1.0; n],
            &vec![0.0; n],
            &dates(n),
            &ClassifierConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn low_magnitude_is_uniscaling_whatever_the_slopes() {
        let t = run(0.1, 0.5, -0.5, spread(0.001, 0.001));
        assert!(t.labels.iter().all(|l| l.pattern() == Pattern::S));
    }

    #[test]
    fn parallel_trends_are_symmetric() {
        let t = run(2.0, 0.01, 0.01, spread(0.005, 0.005));
        assert_eq!(t.labels[0].to_string(), "M");
        assert_eq!(t.slope_stats[0].divergence, 0.0);
    }

    #[test]
    fn high_q_collapse_is_a_minus() {
        let t = run(2.0, 0.001, -0.020, spread(0.005, 0.005));
        let st = t.slope_stats[0];
        assert!((st.divergence - 4.2).abs() < 1e-12);
        assert!((st.asymmetry - 3.8).abs() < 1e-12);
        assert_eq!(t.labels[0].to_string(), "A-");
    }

    #[test]
    fn weak_diverging_is_al() {
        let t = run(1.0, 0.01, -0.01, spread(0.005, 0.005));
        assert_eq!(t.labels[0].to_string(), "AL");
    }

    #[test]
    fn reversal_swaps_roles_and_prefixes() {
        let n = 3;
        let t = classify(
            &vec![-2.0; n],
            &one_bin(n, -0.020, 0.001),
            &spread(0.005, 0.005),
            &vec![-1.0; n],
            &vec![1.0; n],
            &dates(n),
            &ClassifierConfig::default(),
        )
        .unwrap();
        assert_eq!(t.labels[0].to_string(), "rA-");
        assert!(t.reversed[0]);
        assert_eq!(t.gamma_std[0], 2.0);
    }

    #[test]
    fn degenerate_spread_and_coverage() {
        let n = 3;
        let err = classify(
            &vec![2.0; n],
            &one_bin(n, 0.0, 0.0),
            &spread(0.0, 0.0),
            &vec![1.0; n],
            &vec![0.0; n],
            &dates(n),
            &ClassifierConfig::default(),
        );
        assert!(matches!(err, Err(Error::Degenerate(_))));
        let err = classify(
            &vec![2.0; n + 1],
            &one_bin(n, 0.0, 0.0),
            &spread(1.0, 1.0),
            &vec![1.0; n + 1],
            &vec![0.0; n + 1],
            &dates(n + 1),
            &ClassifierConfig::default(),
        );
        assert!(matches!(err, Err(Error::Misaligned(_))));
    }

    #[test]
    fn label_text_round_trips() {
        for l in PatternLabel::all() {
            let back: PatternLabel = l.to_string().parse().unwrap();
            assert_eq!(back, l);
        }
        assert_eq!(PatternLabel::all().len(), 21);
        assert!("rS".parse::<PatternLabel>().is_err());
        assert!(!PatternLabel::new(Pattern::S, true).is_reversed());
    }

    #[test]
    fn config_validation() {
        let bad = ClassifierConfig {
            phi_l: 2.0,
            ..ClassifierConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = ClassifierConfig {
            phi_s: 0.0,
            ..ClassifierConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
