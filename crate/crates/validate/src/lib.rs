//! Acceptance checks for `wghe-core`.
//!
//! Each criterion is a self-contained experiment returning an [`Outcome`];
//! reference values come from the brute-force routines in [`oracles`] or
//! from hand enumeration, never from the code under test.

pub mod criteria;
pub mod oracles;

use std::fmt;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Needs external data that is not available.
    Skip,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} criterion {:>2} {:<28} {:>8.2}s  {}",
            self.status,
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

/// What a check reports before timing is attached.
pub struct Verdict {
    pub status: Status,
    pub detail: String,
}

impl Verdict {
    pub fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            status: if passed { Status::Pass } else { Status::Fail },
            detail: detail.into(),
        }
    }

    pub fn skip(detail: impl Into<String>) -> Self {
        Self {
            status: Status::Skip,
            detail: detail.into(),
        }
    }
}

pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    /// Wall-clock budget; exceeding it fails an otherwise passing check.
    pub budget: Option<Duration>,
    pub check: fn() -> Verdict,
}

impl Criterion {
    pub fn run(&self) -> Outcome {
        let start = Instant::now();
        let mut v = (self.check)();
        let elapsed = start.elapsed();
        if let Some(budget) = self.budget {
            let over = elapsed > budget;
            v.detail.push_str(&format!("; budget {}s", budget.as_secs()));
            if over && v.status == Status::Pass {
                v.status = Status::Fail;
                v.detail.push_str(" exceeded");
            }
        }
        Outcome {
            id: self.id,
            name: self.name,
            status: v.status,
            detail: v.detail,
            elapsed,
        }
    }
}

/// Runs the selected criteria (all when `ids` is empty) in order.
pub fn run(ids: &[u8], mut on_done: impl FnMut(&Outcome)) -> Vec<Outcome> {
    criteria::all()
        .iter()
        .filter(|c| ids.is_empty() || ids.contains(&c.id))
        .map(|c| {
            let o = c.run();
            on_done(&o);
            o
        })
        .collect()
}

pub fn any_failed(outcomes: &[Outcome]) -> bool {
    outcomes.iter().any(|o| o.status == Status::Fail)
}
