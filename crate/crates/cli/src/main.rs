use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};

use wghe_core::ingest::{load_price_series, save_price_series, Column};
use wghe_core::report::{delete_events, render_panels, scan_dt};
use wghe_core::synth::{generate, Regime, DEFAULT_INTERMITTENCY, DEFAULT_SIGMA};
use wghe_core::{
    analyze, AnalysisConfig, AnalysisReport, CsvFormat, GheConfig, LoadedSeries, Metric, Model, PatternLabel,
    Provenance, SmoothMode, SynthSpec,
};

const SPLICE_NOTE: &str = "deleted days are spliced out: their returns are removed and every later close is \
rescaled so all remaining daily returns are unchanged (no composite return spans a gap)";

#[derive(Parser)]
#[command(name = "wghe", version, about = "Weighted generalized Hurst exponents and temporal multiscaling patterns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write a JSON report and an SVG panel plot.
    Analyze(AnalyzeArgs),
    /// Mean width of the real series and its surrogate across window lengths.
    ScanDt(ScanArgs),
    /// Remove trading days from a price file.
    DeleteEvents(DeleteArgs),
    /// Write a synthetic price series.
    Synth(SynthArgs),
    /// Run the acceptance suite.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Delimited file with a date and a close column.
    input: PathBuf,
    /// Date column, by header name or zero-based index.
    #[arg(long, default_value = "date")]
    date_col: String,
    /// Close column, by header name or zero-based index.
    #[arg(long, default_value = "close")]
    close_col: String,
    #[arg(long, default_value = "%Y-%m-%d")]
    date_format: String,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    #[arg(long)]
    no_header: bool,
}

impl InputArgs {
    fn load(&self, min_rows: usize) -> Result<LoadedSeries> {
        if !self.delimiter.is_ascii() {
            bail!("delimiter must be a single ASCII character");
        }
        let format = CsvFormat {
            date: self.date_col.parse::<Column>().expect("infallible"),
            close: self.close_col.parse::<Column>().expect("infallible"),
            delimiter: self.delimiter as u8,
            date_format: self.date_format.clone(),
            has_header: !self.no_header,
            min_rows,
        };
        load_price_series(&self.input, &format).with_context(|| format!("loading {}", self.input.display()))
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Directory for report.json and panels.svg.
    #[arg(long, short, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 250)]
    dt: usize,
    /// Decay time; defaults to the window length.
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, default_value_t = 5)]
    step: usize,
    #[arg(long, default_value_t = 19)]
    tau_max: usize,
    /// Exponents shown in the H' panels.
    #[arg(long, value_delimiter = ',', default_value = "0.1,1,2,3,4")]
    q_grid: Vec<f64>,
    /// Extreme exponents of the width metric.
    #[arg(long, value_parser = parse_pair, default_value = "0.1,4")]
    q_pair: (f64, f64),
    /// Exponent range of the curvature fit.
    #[arg(long, value_parser = parse_pair, default_value = "0.1,1")]
    b_range: (f64, f64),
    #[arg(long, default_value_t = 0.32)]
    phi_l: f64,
    #[arg(long, default_value_t = 1.64)]
    phi_h: f64,
    #[arg(long, default_value_t = 1.64)]
    phi_s: f64,
    #[arg(long, value_enum, default_value_t = MetricArg::Width)]
    metric: MetricArg,
    #[arg(long, value_enum, default_value_t = SmoothArg::Centered)]
    smooth_mode: SmoothArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    surrogate_reps: usize,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [a, b] = parts[..] else {
        return Err(format!("expected two comma-separated numbers, got {s:?}"));
    };
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Width,
    Curvature,
}

#[derive(Clone, Copy, ValueEnum)]
enum SmoothArg {
    Centered,
    Causal,
}

impl AnalyzeArgs {
    fn config(&self) -> AnalysisConfig {
        let mut cfg = AnalysisConfig::default();
        cfg.ghe = GheConfig {
            dt: self.dt,
            theta: self.theta.unwrap_or(self.dt as f64),
            step: self.step,
            tau_max: self.tau_max,
            q_grid: self.q_grid.clone(),
            tau_max_range: (5.min(self.tau_max)..=self.tau_max).collect(),
        };
        cfg.q_pair = self.q_pair;
        cfg.b_range = self.b_range;
        cfg.classifier.phi_l = self.phi_l;
        cfg.classifier.phi_h = self.phi_h;
        cfg.classifier.phi_s = self.phi_s;
        cfg.classifier.metric = match self.metric {
            MetricArg::Width => Metric::Width,
            MetricArg::Curvature => Metric::Curvature,
        };
        cfg.smooth.mode = match self.smooth_mode {
            SmoothArg::Centered => SmoothMode::Centered,
            SmoothArg::Causal => SmoothMode::Causal,
        };
        cfg.seed = self.seed;
        cfg.surrogate_reps = self.surrogate_reps;
        cfg
    }
}

fn run_analyze(args: &AnalyzeArgs) -> Result<()> {
    let cfg = args.config();
    cfg.validate()?;
    let loaded = args.input.load(cfg.ghe.dt + 2)?;
    let analysis = analyze(&loaded.series, &cfg)?;
    let provenance = Provenance::from_file(&args.input.input, &loaded.series, loaded.dropped)?;
    let report = AnalysisReport::new(&loaded.series, &analysis, provenance)?;
    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let json = args.out_dir.join("report.json");
    let svg = args.out_dir.join("panels.svg");
    report.save(&json)?;
    render_panels(&report, &svg)?;

    let timeline = &analysis.primary().timeline;
    let mut counts: BTreeMap<PatternLabel, usize> = BTreeMap::new();
    for l in &timeline.labels {
        *counts.entry(*l).or_default() += 1;
    }
    println!(
        "{} days, {} dropped rows, {} evaluation times, {} bins",
        loaded.series.len(),
        loaded.dropped,
        timeline.labels.len(),
        analysis.primary().segmentation.bins()
    );
    let shares: Vec<String> = counts
        .iter()
        .map(|(l, n)| format!("{l} {:.1}%", 100.0 * *n as f64 / timeline.labels.len() as f64))
        .collect();
    println!("patterns: {}", shares.join(", "));
    for w in &analysis.warnings {
        eprintln!("warning: {w}");
    }
    println!("wrote {} and {}", json.display(), svg.display());
    Ok(())
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_delimiter = ',', default_value = "60,120,250,375,500,750,1000,1250")]
    dts: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    q1: f64,
    #[arg(long, default_value_t = 4.0)]
    q2: f64,
    #[arg(long, default_value_t = 5)]
    step: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination; standard output when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn run_scan(args: &ScanArgs) -> Result<()> {
    let loaded = args.input.load(2)?;
    let base = GheConfig {
        step: args.step,
        ..GheConfig::default()
    };
    let table = scan_dt(&loaded.series, &args.dts, args.q1, args.q2, &base, args.seed)?;
    let csv = table.to_csv();
    match &args.out {
        Some(p) => {
            fs::write(p, csv).with_context(|| format!("writing {}", p.display()))?;
            println!("plateau {:.6} from windows {:?}", table.plateau, table.plateau_dts);
        }
        None => print!("{csv}"),
    }
    Ok(())
}

#[derive(Args)]
struct DeleteArgs {
    #[command(flatten)]
    input: InputArgs,
    /// File with one YYYY-MM-DD date per line; blank lines and lines
    /// starting with '#' are ignored.
    #[arg(long)]
    dates: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
}

fn read_dates(path: &Path) -> Result<Vec<NaiveDate>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| NaiveDate::parse_from_str(l, "%Y-%m-%d").with_context(|| format!("bad date {l:?}")))
        .collect()
}

fn run_delete(args: &DeleteArgs) -> Result<()> {
    let loaded = args.input.load(2)?;
    let dates = read_dates(&args.dates)?;
    let out = delete_events(&loaded.series, &dates)?;
    save_price_series(&out, &args.out)?;
    println!(
        "removed {} of {} days, wrote {}",
        loaded.series.len() - out.len(),
        loaded.series.len(),
        args.out.display()
    );
    println!("note: {SPLICE_NOTE}");
    Ok(())
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    RandomWalk,
    Fbm,
    Cascade,
    /// Random walk for the first half, cascade for the second.
    Switch,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum, required_unless_present = "spec")]
    model: Option<ModelArg>,
    #[arg(long, default_value_t = 4096)]
    length: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_SIGMA)]
    sigma: f64,
    #[arg(long, default_value_t = 0.5)]
    hurst: f64,
    #[arg(long, default_value_t = DEFAULT_INTERMITTENCY)]
    intermittency: f64,
    /// JSON spec file; overrides the model flags.
    #[arg(long, conflicts_with = "model")]
    spec: Option<PathBuf>,
    #[arg(long, short)]
    out: PathBuf,
}

impl SynthArgs {
    fn spec(&self) -> Result<SynthSpec> {
        let cascade = Model::Cascade {
            intermittency: self.intermittency,
            sigma: self.sigma,
        };
        let Some(kind) = self.model else {
            bail!("either --model or --spec is required");
        };
        let model = match kind {
            ModelArg::RandomWalk => Model::RandomWalk { sigma: self.sigma },
            ModelArg::Fbm => Model::Fbm {
                hurst: self.hurst,
                sigma: self.sigma,
            },
            ModelArg::Cascade => cascade,
            ModelArg::Switch => {
                let first = self.length / 2;
                Model::Piecewise {
                    regimes: vec![
                        Regime {
                            model: Model::RandomWalk { sigma: self.sigma },
                            length: first,
                        },
                        Regime {
                            model: cascade,
                            length: self.length - first,
                        },
                    ],
                }
            }
        };
        Ok(SynthSpec::new(model, self.length, self.seed))
    }
}

fn run_synth(args: &SynthArgs) -> Result<()> {
    let spec = match &args.spec {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => args.spec()?,
    };
    let series = generate(&spec)?;
    save_price_series(&series, &args.out)?;
    println!("wrote {} days to {}", series.len(), args.out.display());
    Ok(())
}

#[derive(Args)]
struct ValidateArgs {
    /// Criteria to run, e.g. 1,5,7; all when absent.
    #[arg(long, value_delimiter = ',')]
    only: Vec<u8>,
}

fn run_validate(args: &ValidateArgs) -> Result<bool> {
    let outcomes = wghe_validate::run(&args.only, |o| println!("{o}"));
    Ok(!wghe_validate::any_failed(&outcomes))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(a) => run_analyze(a).map(|_| true),
        Command::ScanDt(a) => run_scan(a).map(|_| true),
        Command::DeleteEvents(a) => run_delete(a).map(|_| true),
        Command::Synth(a) => run_synth(a).map(|_| true),
        Command::Validate(a) => run_validate(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
