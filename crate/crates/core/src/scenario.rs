//! Scenario files.
//!
//! A scenario is a TOML document describing one acquisition: the pair
//! source, both detectors, the target, the channel and the hypothesis grid.
//! All randomness derives from the top-level `seed`. See
//! `scenarios/README.md` in the repository for the annotated schema.

use std::path::Path;

use serde::Deserialize;

use crate::channel::{ChannelConfig, Target};
use crate::correlator::{CorrelatorConfig, Engine, HypothesisGrid, DEFAULT_CELL_BUDGET};
use crate::error::{Error, Result};
use crate::identify::DEFAULT_THRESHOLD_FRACTION;
use crate::source::DetectorConfig;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    pub seed: u64,
    pub classify_threshold_m: f64,
    pub source: SourceSpec,
    pub detectors: Detectors,
    pub target: Target,
    pub channel: ChannelConfig,
    pub grid: GridSpec,
    #[serde(default)]
    pub identify: IdentifySpec,
    #[serde(default)]
    pub correlator: CorrelatorSpec,
    #[serde(default)]
    pub metadata: Metadata,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub pair_rate: f64,
    pub duration_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Detectors {
    pub reference: DetectorConfig,
    pub receive: DetectorConfig,
}

/// An axis given either as explicit values or as `count` evenly spaced
/// values from `min` to `max` inclusive.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum AxisSpec {
    List(Vec<f64>),
    Linspace { min: f64, max: f64, count: usize },
}

impl AxisSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        match *self {
            AxisSpec::List(ref v) => Ok(v.clone()),
            AxisSpec::Linspace { min, max, count } => match count {
                0 => Err(Error::config("axis count must be at least 1")),
                1 => Ok(vec![min]),
                _ => {
                    let last = (count - 1) as f64;
                    // blend form keeps the midpoint of a symmetric axis at exactly zero
                    Ok((0..count)
                        .map(|k| {
                            let f = k as f64 / last;
                            min * (1.0 - f) + max * f
                        })
                        .collect())
                }
            },
        }
    }
}

fn default_doppler() -> AxisSpec {
    AxisSpec::List(vec![0.0])
}

fn default_gamma() -> AxisSpec {
    AxisSpec::List(vec![1.0])
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub tau_min_ps: i64,
    pub tau_max_ps: i64,
    pub tau_step_ps: u64,
    #[serde(default = "default_doppler")]
    pub doppler_offsets: AxisSpec,
    #[serde(default = "default_gamma")]
    pub gammas: AxisSpec,
}

impl GridSpec {
    pub fn to_grid(&self) -> Result<HypothesisGrid> {
        let grid = HypothesisGrid {
            tau_min_ps: self.tau_min_ps,
            tau_max_ps: self.tau_max_ps,
            tau_step_ps: self.tau_step_ps,
            doppler_offsets: self.doppler_offsets.values()?,
            gammas: self.gammas.values()?,
        };
        grid.validate()?;
        Ok(grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentifySpec {
    #[serde(default = "default_threshold_fraction")]
    pub threshold_fraction: f64,
    /// Peak excess over background, in standard deviations, required to
    /// declare a detection. The variance is floored at one count.
    #[serde(default = "default_min_significance")]
    pub min_significance: f64,
}

fn default_threshold_fraction() -> f64 {
    DEFAULT_THRESHOLD_FRACTION
}

fn default_min_significance() -> f64 {
    5.0
}

impl Default for IdentifySpec {
    fn default() -> Self {
        IdentifySpec {
            threshold_fraction: DEFAULT_THRESHOLD_FRACTION,
            min_significance: default_min_significance(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelatorSpec {
    #[serde(default)]
    pub engine: Engine,
    #[serde(default = "default_budget")]
    pub cell_budget: usize,
}

fn default_budget() -> usize {
    DEFAULT_CELL_BUDGET
}

impl Default for CorrelatorSpec {
    fn default() -> Self {
        CorrelatorSpec {
            engine: Engine::Auto,
            cell_budget: DEFAULT_CELL_BUDGET,
        }
    }
}

impl From<CorrelatorSpec> for CorrelatorConfig {
    fn from(s: CorrelatorSpec) -> Self {
        CorrelatorConfig {
            cell_budget: s.cell_budget,
            engine: s.engine,
        }
    }
}

/// Descriptive values carried through to the report but not simulated.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub azimuth_rad: Option<f64>,
    pub elevation_rad: Option<f64>,
    pub pump_wavelength_nm: Option<f64>,
    pub signal_wavelength_nm: Option<f64>,
    pub idler_wavelength_nm: Option<f64>,
    pub description: Option<String>,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::format(format!("scenario: {e}")))?;
        let sc: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::format(format!("scenario field `{path}`: {}", e.into_inner().message()))
        })?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let at = |section: &'static str| {
            move |e: Error| match e {
                Error::Config(m) => Error::Config(format!("{section}: {m}")),
                other => other,
            }
        };
        if !(self.source.pair_rate > 0.0) || !(self.source.duration_s > 0.0) {
            return Err(Error::config("source: pair_rate and duration_s must be positive"));
        }
        self.detectors.reference.validate().map_err(at("detectors.reference"))?;
        self.detectors.receive.validate().map_err(at("detectors.receive"))?;
        self.channel.validate().map_err(at("channel"))?;
        self.target
            .validate(self.channel.photon_speed_mps)
            .map_err(at("target"))?;
        self.grid.to_grid().map_err(at("grid"))?;
        if !(self.classify_threshold_m > 0.0) {
            return Err(Error::config("classify_threshold_m must be positive"));
        }
        let f = self.identify.threshold_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::config("identify.threshold_fraction must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or("scenario")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        seed = 1
        classify_threshold_m = 5.0
        [source]
        pair_rate = 1e5
        duration_s = 0.01
        [detectors.reference]
        efficiency = 0.53
        [detectors.receive]
        efficiency = 0.55
        [target]
        base_range_m = 10.0
        absorptivity = 0.87
        facets = [{ depth_m = 0.0, weight = 1.0 }]
        [channel]
        telescope_diameter_m = 0.05
        collection_constant = 1e6
        [grid]
        tau_min_ps = 0
        tau_max_ps = 100000
        tau_step_ps = 81
        doppler_offsets = { min = -4e-5, max = 4e-5, count = 101 }
    "#;

    #[test]
    fn parses_minimal_scenario_with_defaults() {
        let sc = Scenario::from_toml_str(MINIMAL).unwrap();
        assert_eq!(sc.detectors.reference.tdc_resolution_ps, 1);
        assert_eq!(sc.channel.photon_speed_mps, crate::estimator::SPEED_OF_LIGHT_AIR);
        let grid = sc.grid.to_grid().unwrap();
        assert_eq!(grid.doppler_offsets.len(), 101);
        assert_eq!(grid.doppler_offsets[50], 0.0);
        assert_eq!(grid.gammas, vec![1.0]);
        assert_eq!(sc.identify.threshold_fraction, 0.5);
    }

    #[test]
    fn schema_errors_name_the_field() {
        let bad = MINIMAL.replace("tau_step_ps = 81", "tau_step_ps = \"fast\"");
        let msg = Scenario::from_toml_str(&bad).unwrap_err().to_string();
        assert!(msg.contains("grid.tau_step_ps"), "{msg}");
        let bad = MINIMAL.replace("efficiency = 0.55", "efficiency = 0.55\nfoo = 1");
        let msg = Scenario::from_toml_str(&bad).unwrap_err().to_string();
        assert!(msg.contains("detectors.receive"), "{msg}");
    }

    #[test]
    fn invariant_errors_name_the_section() {
        let bad = MINIMAL.replace("absorptivity = 0.87", "absorptivity = 1.5");
        let msg = Scenario::from_toml_str(&bad).unwrap_err().to_string();
        assert!(msg.contains("target"), "{msg}");
        let bad = MINIMAL.replace("seed = 1\n", "");
        assert!(Scenario::from_toml_str(&bad).is_err());
    }

    #[test]
    fn linspace_axis() {
        let axis = AxisSpec::Linspace {
            min: -1.0,
            max: 1.0,
            count: 5,
        };
        assert_eq!(axis.values().unwrap(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(AxisSpec::Linspace {
            min: 0.0,
            max: 1.0,
            count: 0
        }
        .values()
        .is_err());
    }
}
