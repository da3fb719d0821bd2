//! One line per acceptance criterion. `WGHE_CRITERIA=2,8` runs a subset.

use std::process::ExitCode;

fn main() -> ExitCode {
    let ids: Vec<u8> = std::env::var("WGHE_CRITERIA")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect())
        .unwrap_or_default();
    let outcomes = wghe_validate::run(&ids, |o| println!("{o}"));
    let count = |s| outcomes.iter().filter(|o| o.status == s).count();
    println!(
        "acceptance: {} passed, {} failed, {} skipped",
        count(wghe_validate::Status::Pass),
        count(wghe_validate::Status::Fail),
        count(wghe_validate::Status::Skip)
    );
    if wghe_validate::any_failed(&outcomes) {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
