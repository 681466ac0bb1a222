//! Simulation and signal processing for a time-correlated photon-pair
//! radar.
//!
//! A pair source emits signal/idler photons with shared timestamps. The
//! signal arm is detected locally as the reference; the idler travels to a
//! target and back. Cross-correlating the two detector streams over a grid
//! of delay, Doppler and dilation hypotheses recovers range, radial velocity
//! and target depth, while uncorrelated jamming light only raises the
//! background.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod correlator;
pub mod error;
pub mod estimator;
pub mod identify;
pub mod jam;
pub mod pipeline;
pub mod rangemodel;
mod rng;
pub mod scenario;
pub mod source;
pub mod timetag;

pub use channel::{ChannelConfig, Facet, Target};
pub use correlator::{
    ccf_direct, ccf_fft, search, search_with, CorrelatorConfig, Correlogram, Engine, HypothesisGrid, LagCorrelation,
    Peak, SearchOutcome,
};
pub use error::{Error, Result};
pub use estimator::{Kinematics, SPEED_OF_LIGHT, SPEED_OF_LIGHT_AIR};
pub use identify::{Classification, DepthProfile, DepthThreshold, Discriminator};
pub use jam::{JamRatio, JamScenario};
pub use pipeline::{analyze, run_scenario, simulate_streams, Analysis, DetectionReport};
pub use rangemodel::{RangeLimit, RateFit, RateModel};
pub use scenario::Scenario;
pub use source::{DetectorConfig, SourceConfig};
pub use timetag::{BinnedTrain, CoincidenceMode, TimeTagStream};
