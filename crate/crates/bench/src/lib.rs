//! Fixtures shared by the benchmarks.

use wghe_core::synth::{generate, DEFAULT_INTERMITTENCY, DEFAULT_SIGMA};
use wghe_core::{Model, PriceSeries, SynthSpec};

pub fn random_walk(length: usize) -> PriceSeries {
    generate(&SynthSpec::new(Model::RandomWalk { sigma: DEFAULT_SIGMA }, length, 1)).expect("valid spec")
}

pub fn cascade(length: usize) -> PriceSeries {
    let model = Model::Cascade {
        intermittency: DEFAULT_INTERMITTENCY,
        sigma: DEFAULT_SIGMA,
    };
    generate(&SynthSpec::new(model, length, 1)).expect("valid spec")
}

/// A noisy piecewise-linear track with a slope change every `every` points.
pub fn zigzag_track(n: usize, every: usize) -> Vec<f64> {
    let mut y = Vec::with_capacity(n);
    let mut level = 0.0;
    let mut state = 0x2545_f491_4f6c_dd1d_u64;
    for i in 0..n {
        let slope = if (i / every) % 2 == 0 { 0.01 } else { -0.01 };
        level += slope;
        // xorshift noise; quality is irrelevant here
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        y.push(level + 0.002 * ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5));
    }
    y
}
