//! Free-space channel between the transmit telescope and the receiver.
//!
//! Each transmitted photon survives the round trip with a probability set by
//! inverse-square collection and target absorption, reflects off one facet
//! of the target, and is delayed and time-scaled by the target's range and
//! radial motion. Uncorrelated jammer and background photons are added on
//! top.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{doppler_scale, SPEED_OF_LIGHT, SPEED_OF_LIGHT_AIR};
use crate::rng::{stage_rng, Stage};
use crate::source::{poisson_arrivals, IDLER_CHANNEL};
use crate::timetag::TimeTagStream;

/// Largest admissible |radial velocity| as a fraction of `c_a`.
pub const MAX_BETA: f64 = 0.22;

/// One scattering surface of the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Facet {
    /// Distance behind the nearest point of the target along the line of sight (m).
    pub depth_m: f64,
    /// Relative share of the scattered photons.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    pub facets: Vec<Facet>,
    /// Range to depth offset zero (m).
    pub base_range_m: f64,
    /// Rate of change of range (m/s); negative when approaching.
    #[serde(default)]
    pub radial_velocity_mps: f64,
    /// Fraction of incident photons absorbed by the surface.
    pub absorptivity: f64,
}

impl Target {
    /// A single facet at `range_m`.
    pub fn point(range_m: f64, absorptivity: f64) -> Self {
        Target {
            facets: vec![Facet {
                depth_m: 0.0,
                weight: 1.0,
            }],
            base_range_m: range_m,
            radial_velocity_mps: 0.0,
            absorptivity,
        }
    }

    /// `n` equally weighted facets spread evenly over `depth_m`.
    pub fn uniform_depth(range_m: f64, depth_m: f64, n: usize, absorptivity: f64) -> Self {
        let n = n.max(1);
        let facets = (0..n)
            .map(|k| Facet {
                depth_m: if n == 1 {
                    0.0
                } else {
                    depth_m * k as f64 / (n - 1) as f64
                },
                weight: 1.0,
            })
            .collect();
        Target {
            facets,
            base_range_m: range_m,
            radial_velocity_mps: 0.0,
            absorptivity,
        }
    }

    /// Extent of the facets along the line of sight (m).
    pub fn depth_span(&self) -> f64 {
        let (lo, hi) = self
            .facets
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), f| {
                (lo.min(f.depth_m), hi.max(f.depth_m))
            });
        if lo.is_finite() {
            hi - lo
        } else {
            0.0
        }
    }

    pub fn validate(&self, c_a: f64) -> Result<()> {
        if self.facets.is_empty() {
            return Err(Error::config("target needs at least one facet"));
        }
        for (k, f) in self.facets.iter().enumerate() {
            if !(f.depth_m >= 0.0 && f.depth_m.is_finite()) {
                return Err(Error::config(format!(
                    "facet {k}: depth_m must be >= 0, got {}",
                    f.depth_m
                )));
            }
            if !(f.weight >= 0.0 && f.weight.is_finite()) {
                return Err(Error::config(format!(
                    "facet {k}: weight must be >= 0, got {}",
                    f.weight
                )));
            }
        }
        if self.facets.iter().all(|f| f.weight == 0.0) {
            return Err(Error::config("facet weights are all zero"));
        }
        if !(self.base_range_m > 0.0 && self.base_range_m.is_finite()) {
            return Err(Error::config(format!(
                "base_range_m must be positive, got {}",
                self.base_range_m
            )));
        }
        if !(self.radial_velocity_mps.abs() < MAX_BETA * c_a) {
            return Err(Error::config(format!(
                "|radial_velocity_mps| = {} exceeds {MAX_BETA}·c_a",
                self.radial_velocity_mps.abs()
            )));
        }
        if !(0.0..=1.0).contains(&self.absorptivity) {
            return Err(Error::config(format!(
                "absorptivity must lie in [0, 1], got {}",
                self.absorptivity
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub telescope_diameter_m: f64,
    /// Photon group speed in the medium, `c_a` (m/s).
    #[serde(default = "default_photon_speed")]
    pub photon_speed_mps: f64,
    /// Proportionality constant of the `D²/R²` collection law.
    pub collection_constant: f64,
    /// Jammer photons reaching the receiver (photons/s).
    #[serde(default)]
    pub jammer_rate: f64,
    /// Ambient background photons reaching the receiver (photons/s).
    #[serde(default)]
    pub background_rate: f64,
}

fn default_photon_speed() -> f64 {
    SPEED_OF_LIGHT_AIR
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("telescope_diameter_m", self.telescope_diameter_m)?;
        positive("photon_speed_mps", self.photon_speed_mps)?;
        positive("collection_constant", self.collection_constant)?;
        if self.photon_speed_mps > SPEED_OF_LIGHT {
            return Err(Error::config(format!(
                "photon_speed_mps {} exceeds the vacuum speed of light",
                self.photon_speed_mps
            )));
        }
        for (name, v) in [
            ("jammer_rate", self.jammer_rate),
            ("background_rate", self.background_rate),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Probability that a transmitted photon is scattered back into the telescope:
/// `min(1, k·D²/R²·(1 − absorptivity))`.
pub fn survival_probability(target: &Target, ch: &ChannelConfig) -> Result<f64> {
    let d = ch.telescope_diameter_m;
    let r = target.base_range_m;
    let p = ch.collection_constant * (d * d) / (r * r) * (1.0 - target.absorptivity);
    if p.is_nan() || p < 0.0 {
        return Err(Error::config(format!("survival probability evaluates to {p}")));
    }
    Ok(p.min(1.0))
}

/// Round-trip delay (ps) for a reflection at `range_m`.
pub fn round_trip_ps(range_m: f64, c_a: f64) -> f64 {
    2.0 * range_m / c_a * 1e12
}

/// Angle subtended by a target of extent `span` at `range`: `span/range` (rad).
pub fn radiant_angle(span: f64, range: f64) -> Result<f64> {
    if !(range > 0.0) {
        return Err(Error::domain(format!("range must be positive, got {range}")));
    }
    Ok(span / range)
}

/// Maps transmitted idler timestamps to the received stream.
///
/// A surviving photon emitted at `t` reflects off facet `k` (chosen with
/// probability proportional to its weight) and arrives at
/// `s·t + 2(R + depth_k)/c_a`, with `s` the round-trip Doppler scale. The
/// received window is `[0, s·duration + max delay]`; jammer and background
/// arrivals are drawn over that whole window.
pub fn propagate(idler: &TimeTagStream, target: &Target, ch: &ChannelConfig, seed: u64) -> Result<TimeTagStream> {
    ch.validate()?;
    target.validate(ch.photon_speed_mps)?;
    let c_a = ch.photon_speed_mps;
    let p = survival_probability(target, ch)?;
    let s = doppler_scale(target.radial_velocity_mps, c_a)?;
    let delays: Vec<f64> = target
        .facets
        .iter()
        .map(|f| round_trip_ps(target.base_range_m + f.depth_m, c_a))
        .collect();
    let max_delay = delays.iter().copied().fold(0.0, f64::max);
    let picker = WeightedIndex::new(target.facets.iter().map(|f| f.weight))
        .map_err(|e| Error::config(format!("facet weights: {e}")))?;

    let duration = (s * idler.duration() as f64 + max_delay).ceil() as u64 + 1;
    let mut rng = stage_rng(seed, Stage::Survival);
    let mut out = Vec::with_capacity((idler.len() as f64 * p) as usize + 16);
    for &t in idler.tags() {
        if rng.random::<f64>() >= p {
            continue;
        }
        let k = picker.sample(&mut rng);
        let arrival = (s * t as f64 + delays[k]).round();
        out.push((arrival as u64).min(duration));
    }
    out.extend(poisson_arrivals(
        &mut stage_rng(seed, Stage::Jammer),
        ch.jammer_rate,
        duration,
    )?);
    out.extend(poisson_arrivals(
        &mut stage_rng(seed, Stage::Background),
        ch.background_rate,
        duration,
    )?);
    out.sort_unstable();
    Ok(TimeTagStream::from_sorted(out, IDLER_CHANNEL, duration))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{generate_pairs, SourceConfig};
    use crate::timetag::{coincidence_count_with, CoincidenceMode};

    const C: f64 = SPEED_OF_LIGHT_AIR;

    fn lossless() -> ChannelConfig {
        ChannelConfig {
            telescope_diameter_m: 0.05,
            photon_speed_mps: C,
            collection_constant: 1e9,
            jammer_rate: 0.0,
            background_rate: 0.0,
        }
    }

    fn idler(rate: f64, seed: u64) -> TimeTagStream {
        generate_pairs(&SourceConfig {
            pair_rate: rate,
            duration_s: 0.01,
            seed,
        })
        .unwrap()
        .1
    }

    #[test]
    fn stationary_target_translates_every_tag() {
        let tx = idler(1e5, 1);
        let rx = propagate(&tx, &Target::point(10.0, 0.0), &lossless(), 3).unwrap();
        // 2·10 m / c_a
        let delay = 66_732.832_937_852_87f64;
        assert!((round_trip_ps(10.0, C) - delay).abs() < 1e-6);
        let expected: Vec<u64> = tx.tags().iter().map(|&t| t + delay.round() as u64).collect();
        assert_eq!(rx.tags(), &expected[..]);
        assert!(rx.duration() >= tx.duration() + 66_733);
    }

    #[test]
    fn absorptivity_sets_survival() {
        let tx = idler(1e6, 2);
        let target = Target::point(10.0, 0.87);
        assert_eq!(survival_probability(&target, &lossless()).unwrap(), 1.0);
        // k·D²/R² = 1 at 10 m
        let ch = ChannelConfig {
            collection_constant: 40_000.0,
            ..lossless()
        };
        assert!((survival_probability(&target, &ch).unwrap() - 0.13).abs() < 1e-12);
        let rx = propagate(&tx, &target, &ch, 4).unwrap();
        let n = tx.len() as f64;
        let sigma = (n * 0.13 * 0.87).sqrt();
        assert!((rx.len() as f64 - 0.13 * n).abs() < 5.0 * sigma);
    }

    #[test]
    fn inverse_square_collection() {
        let tx = idler(2e6, 5);
        let ch = ChannelConfig {
            collection_constant: 40.0,
            ..lossless()
        };
        let count = |ch: &ChannelConfig, r: f64| propagate(&tx, &Target::point(r, 0.0), ch, 6).unwrap().len() as f64;
        let near = count(&ch, 1.0);
        let far = count(&ch, 2.0);
        // expected survival at 1 m is 0.1
        assert!((near / far - 4.0).abs() < 4.0 * 5.0 * (1.0 / far).sqrt());
        let wide = ChannelConfig {
            telescope_diameter_m: 0.1,
            ..ch
        };
        let big = count(&wide, 2.0);
        assert!((big / far - 4.0).abs() < 4.0 * 5.0 * (1.0 / far).sqrt());
    }

    #[test]
    fn two_facets_give_two_delay_modes() {
        let tx = idler(2e5, 7);
        let target = Target {
            facets: vec![
                Facet {
                    depth_m: 0.0,
                    weight: 1.0,
                },
                Facet {
                    depth_m: 1.5,
                    weight: 1.0,
                },
            ],
            ..Target::point(10.0, 0.0)
        };
        let rx = propagate(&tx, &target, &lossless(), 8).unwrap();
        let d1 = round_trip_ps(10.0, C).round() as i64;
        let d2 = round_trip_ps(11.5, C).round() as i64;
        assert_eq!(d2 - d1, 10_010);
        assert!((round_trip_ps(1.5, C) - 10_009.924_940_677_93).abs() < 1e-6);
        let at = |lag: i64| coincidence_count_with(&tx, &rx, lag, 0, CoincidenceMode::AllPairs) as f64;
        let n = tx.len() as f64;
        let (m1, m2) = (at(d1), at(d2));
        assert!((m1 - n / 2.0).abs() < 5.0 * (n / 4.0).sqrt());
        assert!((m1 + m2 - n).abs() < 1.0);
        let between = at((d1 + d2) / 2);
        assert!(between < 0.01 * n);
    }

    #[test]
    fn approaching_target_compresses_arrivals() {
        let tx = idler(1e5, 9);
        let target = Target {
            radial_velocity_mps: -0.01 * C,
            ..Target::point(10.0, 0.0)
        };
        let rx = propagate(&tx, &target, &lossless(), 10).unwrap();
        let s = doppler_scale(-0.01 * C, C).unwrap();
        assert!(s < 1.0);
        let span_tx = (tx.tags().last().unwrap() - tx.tags()[0]) as f64;
        let span_rx = (rx.tags().last().unwrap() - rx.tags()[0]) as f64;
        assert!((span_rx / span_tx - s).abs() < 1e-6);
    }

    #[test]
    fn jammer_photons_are_added_uniformly() {
        let tx = idler(1e4, 11);
        let ch = ChannelConfig {
            jammer_rate: 1e6,
            background_rate: 1e5,
            ..lossless()
        };
        let rx = propagate(&tx, &Target::point(10.0, 1.0), &ch, 12).unwrap();
        let expected = 1.1e6 * rx.duration() as f64 * 1e-12;
        assert!((rx.len() as f64 - expected).abs() < 5.0 * expected.sqrt());
    }

    #[test]
    fn validation() {
        let tx = idler(1e3, 1);
        let fast = Target {
            radial_velocity_mps: 0.3 * C,
            ..Target::point(10.0, 0.0)
        };
        assert!(matches!(propagate(&tx, &fast, &lossless(), 0), Err(Error::Config(_))));
        let empty = Target {
            facets: vec![],
            ..Target::point(10.0, 0.0)
        };
        assert!(propagate(&tx, &empty, &lossless(), 0).is_err());
        let zero = Target {
            facets: vec![Facet {
                depth_m: 0.0,
                weight: 0.0,
            }],
            ..Target::point(10.0, 0.0)
        };
        assert!(propagate(&tx, &zero, &lossless(), 0).is_err());
        let neg = Target {
            facets: vec![Facet {
                depth_m: -1.0,
                weight: 1.0,
            }],
            ..Target::point(10.0, 0.0)
        };
        assert!(propagate(&tx, &neg, &lossless(), 0).is_err());
        let superluminal = ChannelConfig {
            photon_speed_mps: 3.1e8,
            ..lossless()
        };
        assert!(propagate(&tx, &Target::point(10.0, 0.0), &superluminal, 0).is_err());
        let nan = ChannelConfig {
            collection_constant: f64::INFINITY,
            ..lossless()
        };
        assert!(propagate(&tx, &Target::point(10.0, 0.0), &nan, 0).is_err());
    }

    #[test]
    fn radiant_angle_examples() {
        assert!((radiant_angle(10.0, 1e4).unwrap() - 1e-3).abs() < 1e-15);
        assert_eq!(radiant_angle(0.0, 1e4).unwrap(), 0.0);
        assert!((radiant_angle(5.0, 2500.0).unwrap() - 2e-3).abs() < 1e-15);
        assert!(radiant_angle(1.0, 0.0).is_err());
    }

    #[test]
    fn depth_span() {
        assert_eq!(Target::uniform_depth(10.0, 10.0, 5, 0.0).depth_span(), 10.0);
        assert_eq!(Target::point(10.0, 0.0).depth_span(), 0.0);
    }
}
