use std::time::Duration;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use wghe_core::classify::{classify, label_point};
use wghe_core::cpa::{default_penalty, segment_trends, shared_segmentation};
use wghe_core::ghe::{LogIncrements, StructureTable};
use wghe_core::ingest::{business_days, load_price_series};
use wghe_core::report::delete_events;
use wghe_core::stats::mean;
use wghe_core::synth::{generate, DEFAULT_INTERMITTENCY, DEFAULT_SIGMA};
use wghe_core::{
    analyze, Analysis, AnalysisConfig, ClassifierConfig, CsvFormat, Metric, Model, Pattern, PatternLabel, SlopeSpread,
    SmoothMode, SynthSpec, TrendSegmentation, WeightKernel,
};

use crate::oracles;
use crate::{Criterion, Verdict};

/// Environment variable naming a `date,close` file of S&P 500 daily closes.
pub const SP500_ENV: &str = "WGHE_SP500_CSV";

/// Surrogate seeds sit this far above the series seeds so the two streams
/// never coincide.
const SURROGATE_SEED_BASE: u64 = 1000;
const SEEDS: u64 = 20;

pub fn all() -> Vec<Criterion> {
    let secs = |s| Some(Duration::from_secs(s));
    vec![
        Criterion { id: 1, name: "weight kernel", budget: secs(1), check: weight_kernel },
        Criterion { id: 2, name: "null calibration", budget: secs(120), check: null_calibration },
        Criterion { id: 3, name: "fBm recovery", budget: secs(180), check: fbm_recovery },
        Criterion { id: 4, name: "multiscaling detection", budget: secs(180), check: cascade_detection },
        Criterion { id: 5, name: "structure function oracle", budget: None, check: structure_oracle },
        Criterion { id: 6, name: "CPA recovery", budget: secs(60), check: cpa_recovery },
        Criterion { id: 7, name: "classifier truth table", budget: None, check: truth_table },
        Criterion { id: 8, name: "regime-switch warning", budget: None, check: regime_switch },
        Criterion { id: 9, name: "schematic replay", budget: None, check: schematic_replay },
        Criterion { id: 10, name: "S&P 500 mean exponents", budget: secs(600), check: sp500_means },
        Criterion { id: 11, name: "S&P 500 event deletion", budget: None, check: sp500_deletion },
    ]
}

fn grand_mean(v: &[f64]) -> f64 {
    mean(v).unwrap_or(f64::NAN)
}

fn finite_mean(v: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = v.into_iter().filter(|x| x.is_finite()).collect();
    grand_mean(&v)
}

fn run_synthetic(model: Model, length: usize, seed: u64, cfg: &AnalysisConfig) -> Result<Analysis, String> {
    let series = generate(&SynthSpec::new(model, length, seed)).map_err(|e| e.to_string())?;
    let cfg = AnalysisConfig {
        seed: SURROGATE_SEED_BASE + seed,
        ..cfg.clone()
    };
    analyze(&series, &cfg).map_err(|e| format!("seed {seed}: {e}"))
}

fn weight_kernel() -> Verdict {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let mut worst_sum: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    let mut ratios = 0usize;
    for _ in 0..1000 {
        // log-uniform theta so both sharp and nearly flat kernels occur
        let theta = 10f64.powf(rng.random_range(0.0..3.5));
        let dt = rng.random_range(20..=1500);
        let k = match WeightKernel::new(theta, dt) {
            Ok(k) => k,
            Err(e) => return Verdict::new(false, format!("theta {theta}, dt {dt}: {e}")),
        };
        let w = k.weights();
        worst_sum = worst_sum.max((w.iter().sum::<f64>() - 1.0).abs());
        let expected = (1.0 / theta).exp();
        for s in 0..dt - 1 {
            // subnormal weights carry too few bits for a 1e-10 ratio
            if w[s + 1].is_normal() {
                worst_ratio = worst_ratio.max((w[s] / w[s + 1] / expected - 1.0).abs());
                ratios += 1;
            }
        }
        for (a, b) in w.iter().zip(oracles::kernel_weights(theta, dt)) {
            if b.is_normal() {
                worst_oracle = worst_oracle.max((a / b - 1.0).abs());
            }
        }
    }
    Verdict::new(
        worst_sum <= 1e-12 && worst_ratio <= 1e-10 && worst_oracle <= 1e-10,
        format!(
            "max |sum-1| {worst_sum:.1e} (tol 1e-12), max ratio rel err {worst_ratio:.1e} over {ratios} pairs (tol 1e-10), max rel err vs direct weights {worst_oracle:.1e}"
        ),
    )
}

fn null_calibration() -> Verdict {
    let mut cfg = AnalysisConfig::default();
    cfg.smooth.mode = SmoothMode::Causal;
    let (mut h1, mut w, mut b, mut s) = (vec![], vec![], vec![], vec![]);
    for seed in 0..SEEDS {
        let a = match run_synthetic(Model::RandomWalk { sigma: DEFAULT_SIGMA }, 5000, seed, &cfg) {
            Ok(a) => a,
            Err(e) => return Verdict::new(false, e),
        };
        h1.push(finite_mean(a.surface.column(1.0).unwrap_or_default()));
        w.push(finite_mean(a.proxies.w_std.iter().copied()));
        b.push(finite_mean(a.proxies.b_std.iter().copied()));
        s.push(a.width.timeline.fraction(|l| l.pattern() == Pattern::S));
    }
    let (h1, w, b, s) = (grand_mean(&h1), grand_mean(&w), grand_mean(&b), grand_mean(&s));
    let ok_h = (0.45..=0.55).contains(&h1);
    let ok_w = (-0.3..=0.3).contains(&w);
    let ok_b = (-0.3..=0.3).contains(&b);
    let ok_s = s >= 0.60;
    Verdict::new(
        ok_h && ok_w && ok_b && ok_s,
        format!(
            "H1 {h1:.4} in [0.45,0.55] {}; W' {w:.3} in [-0.3,0.3] {}; B' {b:.3} in [-0.3,0.3] {}; S fraction {s:.3} >= 0.60 {}",
            mark(ok_h),
            mark(ok_w),
            mark(ok_b),
            mark(ok_s)
        ),
    )
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "MISS"
    }
}

fn fbm_recovery() -> Verdict {
    let cfg = AnalysisConfig::default();
    let mut passed = true;
    let mut parts = vec![];
    for hurst in [0.3, 0.5, 0.7] {
        let (mut h1, mut w) = (vec![], vec![]);
        for seed in 0..SEEDS {
            let model = Model::Fbm { hurst, sigma: DEFAULT_SIGMA };
            let a = match run_synthetic(model, 4096, seed, &cfg) {
                Ok(a) => a,
                Err(e) => return Verdict::new(false, e),
            };
            h1.push(finite_mean(a.surface.column(1.0).unwrap_or_default()));
            w.push(finite_mean(a.proxies.w_std.iter().copied()));
        }
        let h_bad = h1.iter().filter(|h| !((*h - hurst).abs() <= 0.08)).count();
        let w_bad = w.iter().filter(|v| !(v.abs() <= 0.5)).count();
        passed &= h_bad == 0 && w_bad == 0;
        parts.push(format!(
            "H={hurst}: mean H1 {:.4}, seeds off by >0.08: {h_bad}, mean W' {:.3}, seeds with |W'|>0.5: {w_bad}",
            grand_mean(&h1),
            grand_mean(&w)
        ));
    }
    Verdict::new(passed, parts.join("; "))
}

fn cascade_detection() -> Verdict {
    let mut cfg = AnalysisConfig::default();
    cfg.classifier.metric = Metric::Curvature;
    let (mut mag, mut strong) = (vec![], vec![]);
    for seed in 0..SEEDS {
        let model = Model::Cascade {
            intermittency: DEFAULT_INTERMITTENCY,
            sigma: DEFAULT_SIGMA,
        };
        let a = match run_synthetic(model, 1 << 13, seed, &cfg) {
            Ok(a) => a,
            Err(e) => return Verdict::new(false, e),
        };
        mag.push(finite_mean(a.proxies.b_std.iter().map(|b| -b)));
        strong.push(a.curvature.timeline.fraction(|l| l.pattern().is_strong()));
    }
    let (mag, strong) = (grand_mean(&mag), grand_mean(&strong));
    let phi_h = ClassifierConfig::default().phi_h;
    Verdict::new(
        mag > phi_h && strong >= 0.5,
        format!("mean -B' {mag:.3} > {phi_h}; M/A-family fraction {strong:.3} >= 0.50"),
    )
}

fn structure_oracle() -> Verdict {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let n = 3000;
    let mut x = vec![0.0f64];
    for _ in 1..n {
        let step: f64 = rng.random_range(-0.02..0.02);
        x.push(x.last().unwrap() + step);
    }
    let tau_max = 19;
    let inc = LogIncrements::new(&x, tau_max);
    let kernels: Vec<WeightKernel> = [(250, 250.0), (120, 60.0), (750, 750.0), (60, 1e4)]
        .iter()
        .map(|(dt, th)| WeightKernel::new(*th, *dt).expect("valid kernel"))
        .collect();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let k = &kernels[rng.random_range(0..kernels.len())];
        let q: f64 = rng.random_range(0.05..5.0);
        let tau = rng.random_range(1..=tau_max);
        let end = rng.random_range(k.dt()..=n);
        let fast = StructureTable::new(&inc, q).xi(end, k, tau);
        let slow = oracles::structure_function(&x, end, k.dt(), k.theta(), q, tau);
        worst = worst.max((fast / slow - 1.0).abs());
    }
    Verdict::new(
        worst <= 1e-10,
        format!("max relative deviation {worst:.1e} over 1000 (t, q, tau) triples (tol 1e-10)"),
    )
}

/// Two lines meeting between samples `k - 1` and `k`, so the breakpoint is
/// unique.
fn kink(n: usize, k: usize, s1: f64, s2: f64) -> Vec<f64> {
    let at = k as f64 - 0.5;
    (0..n)
        .map(|i| {
            let t = i as f64;
            if t < at {
                s1 * t
            } else {
                s1 * at + s2 * (t - at)
            }
        })
        .collect()
}

fn cpa_recovery() -> Verdict {
    let n = 200;
    let min_bin = 10;
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let mut exact_fail = 0;
    for _ in 0..50 {
        let k = rng.random_range(30..=170);
        let a: f64 = rng.random_range(0.01..0.03);
        let y = kink(n, k, a, -a);
        let got = default_penalty(&y).and_then(|p| segment_trends(&y, p, min_bin));
        if got.ok() != Some(vec![0, k, n]) || oracles::best_single_breakpoint(&y, min_bin) != k {
            exact_fail += 1;
        }
    }
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let trials = 200;
    let mut close = 0;
    for _ in 0..trials {
        let k = rng.random_range(40..=160);
        let a: f64 = rng.random_range(0.01..0.03);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let sigma = 0.1 * a;
        let mut y = kink(n, k, sign * a, -sign * a);
        for v in &mut y {
            *v += sigma * gaussian(&mut rng);
        }
        let oracle = oracles::best_single_breakpoint(&y, min_bin);
        if let Ok(bps) = default_penalty(&y).and_then(|p| segment_trends(&y, p, min_bin)) {
            if bps.len() == 3 && bps[1].abs_diff(oracle) <= 3 {
                close += 1;
            }
        }
    }
    let frac = close as f64 / trials as f64;
    Verdict::new(
        exact_fail == 0 && frac >= 0.95,
        format!(
            "noiseless exact {}/50; noisy single break within 3 of exhaustive oracle {close}/{trials} ({:.1}%, need 95%)",
            50 - exact_fail,
            100.0 * frac
        ),
    )
}

/// Box-Muller, kept local so the noise does not depend on the library's
/// sampler.
fn gaussian(rng: &mut impl Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

struct Row {
    gamma: f64,
    /// Slopes of the q1 and q2 tracks as computed, before any reorientation.
    b_q1: f64,
    b_q2: f64,
    reversed: bool,
    want: &'static str,
}

const fn row(gamma: f64, b_q1: f64, b_q2: f64, reversed: bool, want: &'static str) -> Row {
    Row {
        gamma,
        b_q1,
        b_q2,
        reversed,
        want,
    }
}

/// Hand-enumerated with spreads of 0.005 and thresholds 0.32/1.64/1.64.
/// Reversed rows carry the natural-orientation width, hence negative gamma,
/// and slopes in natural order; the labeler sees them swapped.
const TRUTH_TABLE: [Row; 24] = [
    row(0.1, 0.01, 0.01, false, "S"),
    row(2.0, 0.01, 0.01, false, "M"),
    row(2.0, 0.001, -0.020, false, "A-"),
    row(2.0, -0.001, 0.020, false, "mA-"),
    row(2.0, 0.020, 0.001, false, "A+"),
    row(2.0, 0.020, -0.001, false, "mA+"),
    // |b1| == |b2|: no asymmetry direction
    row(2.0, 0.010, -0.010, false, "A0"),
    row(2.0, -0.012, 0.010, false, "mA0"),
    // b2 == 0 ties
    row(2.0, 0.030, 0.0, false, "A0"),
    row(2.0, -0.030, 0.0, false, "mA0"),
    // gates are inclusive on the weak side
    row(0.32, 0.003, -0.003, false, "ML"),
    row(1.64, 0.01, -0.01, false, "AL"),
    row(1.0, -0.01, 0.01, false, "mAL"),
    row(-0.1, 0.02, -0.02, true, "S"),
    row(-2.0, 0.01, 0.01, true, "rM"),
    row(-2.0, -0.020, 0.001, true, "rA-"),
    row(-2.0, 0.020, -0.001, true, "rmA-"),
    row(-2.0, 0.001, 0.020, true, "rA+"),
    row(-2.0, -0.001, 0.020, true, "rmA+"),
    row(-2.0, -0.010, 0.010, true, "rA0"),
    row(-2.0, 0.010, -0.010, true, "rmA0"),
    row(-1.0, 0.01, 0.01, true, "rML"),
    row(-1.0, -0.01, 0.01, true, "rAL"),
    row(-1.0, 0.01, -0.01, true, "rmAL"),
];

fn one_bin(n: usize, b_q1: f64, b_q2: f64) -> TrendSegmentation {
    TrendSegmentation {
        breakpoints: vec![0, n],
        slopes_q1: vec![b_q1],
        slopes_q2: vec![b_q2],
        slope_errs_q1: vec![0.0],
        slope_errs_q2: vec![0.0],
        penalty: 0.0,
        min_bin: 1,
    }
}

fn label_one(gamma: f64, b_q1: f64, b_q2: f64, reversed: bool, spread: &SlopeSpread) -> Result<PatternLabel, String> {
    let (h1, h2) = if reversed { (0.0, 1.0) } else { (1.0, 0.0) };
    let day = NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date");
    classify(
        &[gamma],
        &one_bin(1, b_q1, b_q2),
        spread,
        &[h1],
        &[h2],
        &[day],
        &ClassifierConfig::default(),
    )
    .map(|t| t.labels[0])
    .map_err(|e| e.to_string())
}

fn truth_table() -> Verdict {
    let spread = SlopeSpread {
        sigma_diff: 0.005,
        sigma_abs_diff: 0.005,
        bins: 10,
    };
    let mut wrong = vec![];
    let mut seen = std::collections::BTreeSet::new();
    for (i, r) in TRUTH_TABLE.iter().enumerate() {
        match label_one(r.gamma, r.b_q1, r.b_q2, r.reversed, &spread) {
            Ok(l) => {
                seen.insert(l);
                if l.to_string() != r.want {
                    wrong.push(format!("row {} got {l} want {}", i + 1, r.want));
                }
            }
            Err(e) => wrong.push(format!("row {}: {e}", i + 1)),
        }
    }
    let missing = PatternLabel::all().into_iter().filter(|l| !seen.contains(l)).count();

    let cfg = ClassifierConfig::default();
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let mut mirror_bad = 0;
    let mut swap_bad = 0;
    for _ in 0..1000 {
        let gamma: f64 = rng.random_range(-0.5..3.0);
        let b1: f64 = rng.random_range(-0.03..0.03);
        let b2: f64 = rng.random_range(-0.03..0.03);
        let sp = SlopeSpread {
            sigma_diff: rng.random_range(0.001..0.02),
            sigma_abs_diff: rng.random_range(0.001..0.02),
            bins: 10,
        };
        let (p, _) = label_point(gamma, b1, b2, &sp, &cfg);
        let (pm, _) = label_point(gamma, -b1, -b2, &sp, &cfg);
        if pm != p.mirror() {
            mirror_bad += 1;
        }
        let plain = label_one(gamma, b1, b2, false, &sp);
        let swapped = label_one(-gamma, b2, b1, true, &sp);
        match (plain, swapped) {
            (Ok(a), Ok(b)) if b == PatternLabel::new(a.pattern(), true) && !a.is_reversed() => {}
            _ => swap_bad += 1,
        }
    }
    Verdict::new(
        wrong.is_empty() && missing == 0 && mirror_bad == 0 && swap_bad == 0,
        format!(
            "{} of 24 rows match{}; labels not covered {missing}; mirror violations {mirror_bad}/1000; swap-reversal violations {swap_bad}/1000",
            24 - wrong.len(),
            if wrong.is_empty() { String::new() } else { format!(" ({})", wrong.join(", ")) }
        ),
    )
}

fn regime_switch() -> Verdict {
    let half = 2000;
    let mut cfg = AnalysisConfig::default();
    cfg.smooth.mode = SmoothMode::Causal;
    let mut hits = 0;
    for seed in 0..SEEDS {
        let spec = SynthSpec::regime_switch(
            Model::RandomWalk { sigma: DEFAULT_SIGMA },
            Model::Cascade {
                intermittency: DEFAULT_INTERMITTENCY,
                sigma: DEFAULT_SIGMA,
            },
            half,
            seed,
        );
        let series = match generate(&spec) {
            Ok(s) => s,
            Err(e) => return Verdict::new(false, e.to_string()),
        };
        let run_cfg = AnalysisConfig {
            seed: SURROGATE_SEED_BASE + seed,
            ..cfg.clone()
        };
        let a = match analyze(&series, &run_cfg) {
            Ok(a) => a,
            Err(e) => return Verdict::new(false, format!("seed {seed}: {e}")),
        };
        let t = &a.primary().timeline;
        // the window ending at `end` labels price index end - 1
        let hit = a.surface.ends().iter().zip(&t.labels).any(|(end, l)| {
            let day = *end as i64 - 1;
            let p = l.pattern();
            (day - half as i64).abs() <= 300 && (p == Pattern::AL || p.is_asymmetric_strong())
        });
        hits += hit as usize;
    }
    let frac = hits as f64 / SEEDS as f64;
    Verdict::new(
        frac >= 0.8,
        format!("A_L or strong A-family label within 300 days of the switch in {hits}/{SEEDS} seeds (need 80%)"),
    )
}

struct Segment {
    /// Mid-segment gamma.
    gamma: f64,
    b_q1: f64,
    b_q2: f64,
    want: Pattern,
}

/// Uniscaling, a weak diverging transition, the three strong asymmetric
/// shapes, strong then weak symmetric multiscaling, a weak converging
/// transition and back to uniscaling.
const SCHEMATIC: [Segment; 9] = [
    Segment { gamma: 0.1, b_q1: 0.0, b_q2: 0.0, want: Pattern::S },
    Segment { gamma: 1.0, b_q1: 0.01, b_q2: -0.01, want: Pattern::AL },
    Segment { gamma: 2.6, b_q1: 0.001, b_q2: -0.02, want: Pattern::AMinus },
    Segment { gamma: 2.6, b_q1: 0.01, b_q2: -0.01, want: Pattern::AZero },
    Segment { gamma: 2.6, b_q1: 0.02, b_q2: 0.001, want: Pattern::APlus },
    Segment { gamma: 2.6, b_q1: -0.01, b_q2: -0.01, want: Pattern::M },
    Segment { gamma: 1.0, b_q1: 0.005, b_q2: 0.005, want: Pattern::ML },
    Segment { gamma: 1.0, b_q1: -0.01, b_q2: 0.01, want: Pattern::MirrorAL },
    Segment { gamma: 0.1, b_q1: 0.0, b_q2: 0.0, want: Pattern::S },
];

fn schematic_replay() -> Verdict {
    let len = 40;
    let mid = (len - 1) as f64 / 2.0;
    let (mut h1, mut h2) = (vec![], vec![]);
    for (k, seg) in SCHEMATIC.iter().enumerate() {
        // a level step on the q1 track at every boundary
        let level = 0.8 * k as f64;
        for u in 0..len {
            let du = u as f64 - mid;
            h1.push(level + seg.b_q1 * du);
            h2.push(level - std::f64::consts::SQRT_2 * seg.gamma + seg.b_q2 * du);
        }
    }
    let gamma: Vec<f64> = h1
        .iter()
        .zip(&h2)
        .map(|(a, b)| (a - b) / std::f64::consts::SQRT_2)
        .collect();
    // noiseless tracks: any positive penalty separates exact linear pieces
    let seg = match shared_segmentation(&h1, &h2, 1e-6, 10) {
        Ok(s) => s,
        Err(e) => return Verdict::new(false, e.to_string()),
    };
    let want_bps: Vec<usize> = (0..=SCHEMATIC.len()).map(|k| k * len).collect();
    let spread = SlopeSpread {
        sigma_diff: 0.004,
        sigma_abs_diff: 0.004,
        bins: SCHEMATIC.len(),
    };
    let times = business_days(NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date"), h1.len());
    let t = match classify(&gamma, &seg, &spread, &h1, &h2, &times, &ClassifierConfig::default()) {
        Ok(t) => t,
        Err(e) => return Verdict::new(false, e.to_string()),
    };
    let mut got = vec![];
    let mut mismatched = 0;
    for (k, s) in SCHEMATIC.iter().enumerate() {
        let labels = &t.labels[k * len..(k + 1) * len];
        let want = PatternLabel::new(s.want, false);
        mismatched += labels.iter().filter(|l| **l != want).count();
        got.push(labels[len / 2].to_string());
    }
    let expected: Vec<String> = SCHEMATIC.iter().map(|s| s.want.as_str().to_string()).collect();
    Verdict::new(
        seg.breakpoints == want_bps && mismatched == 0,
        format!(
            "bins found {}/{}; sequence {} (want {}); mislabeled points {mismatched}",
            seg.bins(),
            SCHEMATIC.len(),
            got.join(" "),
            expected.join(" ")
        ),
    )
}

fn sp500() -> Option<Result<wghe_core::PriceSeries, String>> {
    let path = std::env::var_os(SP500_ENV)?;
    Some(
        load_price_series(&path, &CsvFormat::default())
            .map(|l| l.series)
            .map_err(|e| e.to_string()),
    )
}

fn sp500_means() -> Verdict {
    let series = match sp500() {
        None => return Verdict::skip(format!("set {SP500_ENV} to a date,close file of S&P 500 daily closes")),
        Some(Err(e)) => return Verdict::new(false, e),
        Some(Ok(s)) => s,
    };
    let mut cfg = AnalysisConfig::default();
    cfg.ghe.dt = 750;
    cfg.ghe.theta = 750.0;
    let a = match analyze(&series, &cfg) {
        Ok(a) => a,
        Err(e) => return Verdict::new(false, e.to_string()),
    };
    let width_abs = |s: &wghe_core::GheSurface| -> Vec<f64> {
        let lo = s.column(0.1).unwrap_or_default();
        let hi = s.column(4.0).unwrap_or_default();
        lo.iter().zip(&hi).map(|(a, b)| (a - b).abs()).collect()
    };
    let h1 = finite_mean(a.surface.column(1.0).unwrap_or_default());
    let w = finite_mean(width_abs(&a.surface));
    let b = finite_mean(a.proxies.b.iter().copied());
    let sh1 = finite_mean(a.surrogate_surface.column(1.0).unwrap_or_default());
    let sw = finite_mean(width_abs(&a.surrogate_surface));
    let checks = [
        ("H1", h1, 0.5244, 0.01),
        ("|W|", w, 0.1058, 0.01),
        ("B", b, -0.0295, 0.005),
        ("surrogate H1", sh1, 0.494, 0.01),
        ("surrogate |W|", sw, 0.009, 0.005),
    ];
    let ok = checks.iter().all(|(_, v, t, tol)| (v - t).abs() <= *tol);
    let detail: Vec<String> = checks
        .iter()
        .map(|(n, v, t, tol)| format!("{n} {v:.4} vs {t}±{tol}"))
        .collect();
    Verdict::new(ok, format!("{} days; {}", series.len(), detail.join(", ")))
}

fn sp500_deletion() -> Verdict {
    let series = match sp500() {
        None => return Verdict::skip(format!("set {SP500_ENV} to a date,close file of S&P 500 daily closes")),
        Some(Err(e)) => return Verdict::new(false, e),
        Some(Ok(s)) => s,
    };
    let d = |m, day| NaiveDate::from_ymd_opt(1987, m, day).expect("valid date");
    let black_monday = [d(10, 19), d(10, 20), d(10, 21), d(10, 22)];
    let modified = match delete_events(&series, &black_monday) {
        Ok(s) => s,
        Err(e) => return Verdict::new(false, e.to_string()),
    };
    let cfg = AnalysisConfig::default();
    let (real, cut) = match (analyze(&series, &cfg), analyze(&modified, &cfg)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return Verdict::new(false, e.to_string()),
    };
    let post = (d(10, 19), NaiveDate::from_ymd_opt(1988, 10, 19).expect("valid date"));
    let pre = (NaiveDate::from_ymd_opt(1986, 1, 1).expect("valid date"), d(10, 16));
    let count = |a: &Analysis, (from, to): (NaiveDate, NaiveDate), pred: &dyn Fn(Pattern) -> bool| {
        let t = &a.width.timeline;
        t.times
            .iter()
            .zip(&t.labels)
            .filter(|(day, l)| **day >= from && **day <= to && pred(l.pattern()))
            .count()
    };
    let is_a_minus = |p: Pattern| p == Pattern::AMinus;
    let is_warning = |p: Pattern| p == Pattern::AL || p.is_asymmetric_strong();
    let band_before = count(&real, post, &is_a_minus);
    let band_after = count(&cut, post, &is_a_minus);
    let warning = count(&cut, pre, &is_warning);
    let removed = band_before >= 10 && band_after * 5 <= band_before;
    Verdict::new(
        removed && warning > 0,
        format!(
            "A- points in the year after 1987-10-19: {band_before} real, {band_after} modified (need >=10 then at most a fifth); A-family/AL points 1986-01-01..1987-10-16 after deletion: {warning} (need >0)"
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criterion_ids_are_unique_and_ordered() {
        let ids: Vec<u8> = all().iter().map(|c| c.id).collect();
        assert_eq!(ids, (1..=11).collect::<Vec<u8>>());
    }

    #[test]
    fn kink_breaks_between_samples() {
        let y = kink(20, 8, 1.0, -1.0);
        assert_eq!(y[7], 7.0);
        assert_eq!(y[8], 7.0);
        assert_eq!(oracles::best_single_breakpoint(&y, 3), 8);
    }

    #[test]
    fn truth_table_lists_every_label() {
        let wanted: std::collections::BTreeSet<&str> = TRUTH_TABLE.iter().map(|r| r.want).collect();
        for l in PatternLabel::all() {
            assert!(wanted.contains(l.to_string().as_str()), "{l}");
        }
    }

    #[test]
    fn schematic_segments_stay_in_their_gamma_band() {
        let cfg = ClassifierConfig::default();
        for s in &SCHEMATIC {
            let half_swing = (s.b_q1 - s.b_q2).abs() * 19.5 / std::f64::consts::SQRT_2;
            let (lo, hi) = (s.gamma - half_swing, s.gamma + half_swing);
            match s.want {
                Pattern::S => assert!(hi < cfg.phi_l),
                p if p.is_strong() => assert!(lo > cfg.phi_h),
                _ => assert!(lo >= cfg.phi_l && hi <= cfg.phi_h),
            }
        }
    }
}
