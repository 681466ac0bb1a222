//! Workloads shared by the correlator benchmarks.

use qradar_core::channel::propagate;
use qradar_core::source::{generate_pairs, SourceConfig};
use qradar_core::{ChannelConfig, HypothesisGrid, Target, TimeTagStream};

/// Reference and received streams for a point target at `range_m` with an
/// ideal channel carrying `pairs` pairs on average.
pub fn point_target_streams(pairs: f64, range_m: f64, seed: u64) -> (TimeTagStream, TimeTagStream) {
    let duration_s = 0.01;
    let (signal, idler) = generate_pairs(&SourceConfig {
        pair_rate: pairs / duration_s,
        duration_s,
        seed,
    })
    .expect("valid source");
    let channel = ChannelConfig {
        telescope_diameter_m: 0.05,
        photon_speed_mps: qradar_core::SPEED_OF_LIGHT_AIR,
        collection_constant: 1e9,
        jammer_rate: 0.0,
        background_rate: 0.0,
    };
    let recv = propagate(&idler, &Target::point(range_m, 0.0), &channel, seed ^ 1).expect("valid channel");
    (signal, recv)
}

/// Delay-only grid covering `[0, span_ps)`.
pub fn delay_grid(span_ps: i64, step_ps: u64) -> HypothesisGrid {
    HypothesisGrid::stationary(0, span_ps, step_ps)
}

/// Grid with `n_doppler` offsets spread over `±half_width`.
pub fn doppler_grid(span_ps: i64, step_ps: u64, n_doppler: usize, half_width: f64) -> HypothesisGrid {
    let mut grid = delay_grid(span_ps, step_ps);
    grid.doppler_offsets = (0..n_doppler)
        .map(|k| {
            let f = if n_doppler > 1 {
                k as f64 / (n_doppler - 1) as f64
            } else {
                0.5
            };
            -half_width * (1.0 - f) + half_width * f
        })
        .collect();
    grid
}
