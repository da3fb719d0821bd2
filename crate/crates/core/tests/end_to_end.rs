use std::fs;

use wghe_core::ingest::{load_price_series, save_price_series, CsvFormat};
use wghe_core::report::{delete_events, render_panels, AnalysisReport, Provenance};
use wghe_core::synth::{generate, Model, SynthSpec, DEFAULT_INTERMITTENCY};
use wghe_core::{analyze, AnalysisConfig, Metric, Pattern};

fn cascade(seed: u64) -> wghe_core::PriceSeries {
    let model = Model::Cascade {
        intermittency: DEFAULT_INTERMITTENCY,
        sigma: 0.01,
    };
    generate(&SynthSpec::new(model, 3000, seed)).unwrap()
}

#[test]
fn file_to_report_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("prices.csv");
    let series = cascade(1);
    save_price_series(&series, &csv).unwrap();

    let loaded = load_price_series(&csv, &CsvFormat::default().with_window(250)).unwrap();
    assert_eq!(loaded.dropped, 0);
    assert_eq!(loaded.series, series);

    let cfg = AnalysisConfig {
        seed: 3,
        ..AnalysisConfig::default()
    };
    let analysis = analyze(&loaded.series, &cfg).unwrap();
    let prov = Provenance::from_file(&csv, &loaded.series, loaded.dropped).unwrap();
    let report = AnalysisReport::new(&loaded.series, &analysis, prov).unwrap();

    let json = dir.path().join("report.json");
    report.save(&json).unwrap();
    assert_eq!(AnalysisReport::load(&json).unwrap(), report);

    let a = dir.path().join("a.svg");
    let b = dir.path().join("b.svg");
    render_panels(&report, &a).unwrap();
    render_panels(&report, &b).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn replaying_the_echoed_config_reproduces_the_report() {
    let series = cascade(2);
    let cfg = AnalysisConfig {
        seed: 11,
        surrogate_reps: 2,
        ..AnalysisConfig::default()
    };
    let prov = Provenance::from_series(&series, None).unwrap();
    let first = AnalysisReport::new(&series, &analyze(&series, &cfg).unwrap(), prov.clone()).unwrap();
    let replay_cfg = first.config.clone();
    let second = AnalysisReport::new(&series, &analyze(&series, &replay_cfg).unwrap(), prov).unwrap();
    assert_eq!(first.to_json().unwrap(), second.to_json().unwrap());
}

#[test]
fn cascade_is_mostly_multiscaling() {
    let series = cascade(4);
    let mut cfg = AnalysisConfig::default();
    cfg.classifier.metric = Metric::Curvature;
    let a = analyze(&series, &cfg).unwrap();
    let t = &a.primary().timeline;
    assert!(t.fraction(|l| l.pattern() != Pattern::S) > 0.5);
    for (g, l) in t.gamma_std.iter().zip(&t.labels) {
        assert_eq!(*g < cfg.classifier.phi_l, l.pattern() == Pattern::S);
        assert_eq!(*g > cfg.classifier.phi_h, l.pattern().is_strong());
    }
}

#[test]
fn deleting_days_keeps_the_pipeline_running() {
    let series = cascade(5);
    let gone = [series.dates()[1000], series.dates()[1001]];
    let spliced = delete_events(&series, &gone).unwrap();
    assert_eq!(spliced.len(), series.len() - 2);
    assert!(analyze(&spliced, &AnalysisConfig::default()).is_ok());
}
