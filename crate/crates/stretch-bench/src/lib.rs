//! Shared fixtures for the benchmark targets: deterministic instances drawn
//! through the library's own generator so timings stay comparable run to run.

use stretch_core::{random_instance, GenConfig, Instance, Rational, SpreadMode};

/// A seeded single-machine instance on the default grid.
pub fn single_instance(seed: u64, n: u32) -> Instance {
    instance(seed, n, 1, SpreadMode::Dense)
}

/// A seeded parallel instance with bursty releases, the heaviest shape for
/// the block partition.
pub fn parallel_instance(seed: u64, n: u32, machines: u32) -> Instance {
    instance(seed, n, machines, SpreadMode::Bursty)
}

fn instance(seed: u64, n: u32, machines: u32, mode: SpreadMode) -> Instance {
    let config = GenConfig {
        seed,
        n,
        machines,
        delta_max: Rational::from_int(3),
        mode,
        tie_bias_percent: 25,
        grid: 6,
        tie_salt: 0,
    };
    random_instance(&config).expect("fixture config is valid")
}
