//! Shared inputs for the benchmarks.

use fracheat_core::{ModelParams, SpdeConfig, TimeGrid};

pub fn params(h: f64, d: u8) -> ModelParams {
    ModelParams::new(h, d).expect("benchmark parameters are valid")
}

pub fn grid(n: usize) -> TimeGrid {
    TimeGrid::uniform(n, 1.0).expect("positive horizon")
}

/// Reduced version of the acceptance SPDE configuration.
pub fn small_spde(n_paths: usize) -> SpdeConfig {
    SpdeConfig { h: 0.75, horizon: 1.0, nt: 64, half_width: 8.0, nx: 256, c: 0.5, n_paths, seed: 1 }
}
