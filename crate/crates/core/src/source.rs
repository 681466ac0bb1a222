//! Photon-pair emission and single-photon detector models.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stage_rng, KeyedRng, Stage};
use crate::timetag::TimeTagStream;

/// Channel id assigned to the reference (signal) arm.
pub const SIGNAL_CHANNEL: u32 = 0;
/// Channel id assigned to the transmitted (idler) arm.
pub const IDLER_CHANNEL: u32 = 1;

/// Largest expected event count a single Poisson draw may request.
pub const MAX_EXPECTED_EVENTS: f64 = 4_294_967_296.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    /// Mean pair emission rate (pairs/s).
    pub pair_rate: f64,
    /// Acquisition length (s).
    pub duration_s: f64,
    pub seed: u64,
}

impl SourceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pair_rate > 0.0 && self.pair_rate.is_finite()) {
            return Err(Error::config(format!(
                "pair_rate must be positive, got {}",
                self.pair_rate
            )));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::config(format!(
                "duration_s must be positive, got {}",
                self.duration_s
            )));
        }
        if self.duration_ps() == 0 {
            return Err(Error::config("duration_s is shorter than one picosecond"));
        }
        Ok(())
    }

    pub fn duration_ps(&self) -> u64 {
        (self.duration_s * 1e12).round() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    /// Detection probability per incident photon.
    pub efficiency: f64,
    /// Standard deviation of the Gaussian timing jitter (ps).
    #[serde(default)]
    pub jitter_sigma_ps: f64,
    /// Non-paralyzable hold-off after each registered click (ps).
    #[serde(default)]
    pub dead_time_ps: u64,
    /// Dark count rate (counts/s).
    #[serde(default)]
    pub dark_rate: f64,
    /// Time-to-digital converter tick (ps); timestamps are floored to it.
    #[serde(default = "one")]
    pub tdc_resolution_ps: u64,
}

fn one() -> u64 {
    1
}

impl DetectorConfig {
    /// Noise-free detector that registers every photon exactly.
    pub fn ideal() -> Self {
        DetectorConfig {
            efficiency: 1.0,
            jitter_sigma_ps: 0.0,
            dead_time_ps: 0,
            dark_rate: 0.0,
            tdc_resolution_ps: 1,
        }
    }

    pub fn with_efficiency(efficiency: f64) -> Self {
        DetectorConfig {
            efficiency,
            ..Self::ideal()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::config(format!(
                "efficiency must lie in [0, 1], got {}",
                self.efficiency
            )));
        }
        if !(self.jitter_sigma_ps >= 0.0 && self.jitter_sigma_ps.is_finite()) {
            return Err(Error::config(format!(
                "jitter_sigma_ps must be >= 0, got {}",
                self.jitter_sigma_ps
            )));
        }
        if !(self.dark_rate >= 0.0 && self.dark_rate.is_finite()) {
            return Err(Error::config(format!("dark_rate must be >= 0, got {}", self.dark_rate)));
        }
        if self.tdc_resolution_ps == 0 {
            return Err(Error::config("tdc_resolution_ps must be at least 1"));
        }
        Ok(())
    }
}

/// Homogeneous Poisson arrival times on `[0, duration_ps]`, sorted.
pub(crate) fn poisson_arrivals(rng: &mut ChaCha8Rng, rate: f64, duration_ps: u64) -> Result<Vec<u64>> {
    if rate <= 0.0 {
        return Ok(Vec::new());
    }
    let mean = rate * duration_ps as f64 * 1e-12;
    if mean > MAX_EXPECTED_EVENTS {
        return Err(Error::Capacity {
            what: "expected Poisson event count",
            requested: mean as u128,
            limit: MAX_EXPECTED_EVENTS as u128,
        });
    }
    let n = Poisson::new(mean)
        .map_err(|e| Error::config(format!("invalid Poisson mean {mean}: {e}")))?
        .sample(rng) as usize;
    let mut tags: Vec<u64> = (0..n).map(|_| rng.random_range(0..=duration_ps)).collect();
    tags.sort_unstable();
    Ok(tags)
}

/// Emits photon pairs as a Poisson process and returns the signal and idler
/// emission streams. Both arms carry identical timestamps.
pub fn generate_pairs(cfg: &SourceConfig) -> Result<(TimeTagStream, TimeTagStream)> {
    cfg.validate()?;
    let duration = cfg.duration_ps();
    let mut rng = stage_rng(cfg.seed, Stage::PairEmission);
    let tags = poisson_arrivals(&mut rng, cfg.pair_rate, duration)?;
    let signal = TimeTagStream::from_sorted(tags.clone(), SIGNAL_CHANNEL, duration);
    let idler = TimeTagStream::from_sorted(tags, IDLER_CHANNEL, duration);
    Ok((signal, idler))
}

/// Passes a photon stream through a detector.
///
/// In order: each photon is registered with probability `efficiency` and
/// smeared by the jitter; dark counts are added; timestamps are floored to
/// the TDC tick; clicks falling inside the dead time of a registered click
/// are lost. The fate of a photon depends only on `seed` and its own
/// timestamp, not on the other photons in the stream.
pub fn apply_detector(stream: &TimeTagStream, det: &DetectorConfig, seed: u64) -> Result<TimeTagStream> {
    det.validate()?;
    let duration = stream.duration();
    let jitter = if det.jitter_sigma_ps > 0.0 {
        Some(Normal::new(0.0, det.jitter_sigma_ps).map_err(|e| Error::config(e.to_string()))?)
    } else {
        None
    };
    let fate = KeyedRng::new(seed, Stage::DetectorFate);

    let mut out = Vec::with_capacity((stream.len() as f64 * det.efficiency) as usize + 16);
    let tags = stream.tags();
    let mut dup = 0u64;
    for (k, &t) in tags.iter().enumerate() {
        dup = if k > 0 && tags[k - 1] == t { dup + 1 } else { 0 };
        let mut rng = fate.for_key(t, dup);
        if rng.random::<f64>() >= det.efficiency {
            continue;
        }
        let t = match &jitter {
            Some(n) => (t as f64 + n.sample(&mut rng)).round().clamp(0.0, duration as f64) as u64,
            None => t,
        };
        out.push(t);
    }
    let mut dark_rng = stage_rng(seed, Stage::DarkCounts);
    out.extend(poisson_arrivals(&mut dark_rng, det.dark_rate, duration)?);

    if det.tdc_resolution_ps > 1 {
        let r = det.tdc_resolution_ps;
        for t in &mut out {
            *t -= *t % r;
        }
    }
    out.sort_unstable();

    if det.dead_time_ps > 0 {
        let mut last: Option<u64> = None;
        out.retain(|&t| match last {
            Some(prev) if t - prev < det.dead_time_ps => false,
            _ => {
                last = Some(t);
                true
            }
        });
    }
    Ok(TimeTagStream::from_sorted(out, stream.channel(), duration))
}
