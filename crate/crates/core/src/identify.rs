//! Target depth from the correlogram width, and target/decoy classification.
//!
//! Photons scattered from different depths of the target arrive with
//! different delays, so the delay profile of the peak cell widens with the
//! target's extent along the line of sight.

use serde::Serialize;

use crate::correlator::{background, Correlogram, Peak, GUARD_BINS};
use crate::error::{Error, Result};

/// Default fraction of the peak above background used to measure width.
pub const DEFAULT_THRESHOLD_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthProfile {
    pub tau_min_ps: i64,
    pub tau_step_ps: u64,
    pub tau_slice: Vec<u64>,
    pub background_mean: f64,
    /// First and last bins at or above the threshold.
    pub first_bin: usize,
    pub last_bin: usize,
    pub width_ps: u64,
    pub depth_m: f64,
}

struct Extent {
    first: usize,
    last: usize,
    background: f64,
}

fn extent(slice: &[u64], threshold_fraction: f64) -> Result<Option<Extent>> {
    if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
        return Err(Error::config(format!(
            "threshold_fraction must lie in (0, 1), got {threshold_fraction}"
        )));
    }
    if slice.is_empty() {
        return Err(Error::config("delay profile is empty"));
    }
    let (peak, max) = slice
        .iter()
        .enumerate()
        .fold((0, 0u64), |(bk, bv), (k, &v)| if v > bv { (k, v) } else { (bk, bv) });
    let bg = background(slice, peak, GUARD_BINS).mean;
    if (max as f64) <= bg {
        return Ok(None);
    }
    let level = bg + threshold_fraction * (max as f64 - bg);
    let above = |&c: &u64| c as f64 >= level;
    let first = slice.iter().position(above);
    let last = slice.iter().rposition(above);
    Ok(first.zip(last).map(|(first, last)| Extent {
        first,
        last,
        background: bg,
    }))
}

/// Distance (ps) between the first and last bins whose count reaches
/// `background + threshold_fraction·(max − background)`.
///
/// `Ok(None)` means nothing stands above the background.
pub fn correlogram_width(slice: &[u64], tau_step_ps: u64, threshold_fraction: f64) -> Result<Option<u64>> {
    Ok(extent(slice, threshold_fraction)?.map(|e| (e.last - e.first) as u64 * tau_step_ps))
}

/// Round-trip delay spread converted to depth: `c_a·width/2`.
pub fn depth_from_width(width_ps: u64, c_a: f64) -> f64 {
    c_a * width_ps as f64 * 1e-12 / 2.0
}

impl DepthProfile {
    pub fn from_slice(
        slice: &[u64],
        tau_min_ps: i64,
        tau_step_ps: u64,
        threshold_fraction: f64,
        c_a: f64,
    ) -> Result<Option<Self>> {
        let Some(e) = extent(slice, threshold_fraction)? else {
            return Ok(None);
        };
        let width_ps = (e.last - e.first) as u64 * tau_step_ps;
        Ok(Some(DepthProfile {
            tau_min_ps,
            tau_step_ps,
            tau_slice: slice.to_vec(),
            background_mean: e.background,
            first_bin: e.first,
            last_bin: e.last,
            width_ps,
            depth_m: depth_from_width(width_ps, c_a),
        }))
    }

    /// Profile of the cell holding `peak`.
    pub fn at_peak(cg: &Correlogram, peak: &Peak, threshold_fraction: f64, c_a: f64) -> Result<Option<Self>> {
        let grid = cg.grid();
        Self::from_slice(
            cg.slice(peak.gamma_idx, peak.doppler_idx),
            grid.tau_min_ps,
            grid.tau_step_ps,
            threshold_fraction,
            c_a,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    Target,
    Decoy,
}

/// Anything that can label a depth profile.
pub trait Discriminator {
    fn classify(&self, profile: &DepthProfile) -> Classification;
}

/// Labels bodies at least `threshold_m` deep as targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthThreshold {
    threshold_m: f64,
}

impl DepthThreshold {
    pub fn new(threshold_m: f64) -> Result<Self> {
        if !(threshold_m > 0.0 && threshold_m.is_finite()) {
            return Err(Error::config(format!(
                "classification threshold must be positive, got {threshold_m}"
            )));
        }
        Ok(DepthThreshold { threshold_m })
    }
}

impl Discriminator for DepthThreshold {
    fn classify(&self, profile: &DepthProfile) -> Classification {
        classify_depth(profile.depth_m, self.threshold_m)
    }
}

fn classify_depth(depth_m: f64, threshold_m: f64) -> Classification {
    // a tie is a target
    if depth_m >= threshold_m {
        Classification::Target
    } else {
        Classification::Decoy
    }
}

pub fn classify(depth_m: f64, threshold_m: f64) -> Result<Classification> {
    let t = DepthThreshold::new(threshold_m)?;
    Ok(classify_depth(depth_m, t.threshold_m))
}
