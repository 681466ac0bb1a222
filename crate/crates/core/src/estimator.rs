//! Kinematics and peak-to-physics conversions.
//!
//! Two sign conventions meet here. [`relativistic_doppler`] and
//! [`dilation_delta`] take `beta > 0` for a target moving towards the
//! observer. Everything that takes a velocity in m/s uses the radial
//! convention of [`crate::channel::Target`]: positive means the range
//! grows (receding), negative means approaching.
//!
//! The shift in the classical photon-interval expression is `t(1 − β)`;
//! the form `(1 − β)/t` that sometimes appears for it is not
//! dimensionally consistent and is not used.

use crate::error::{Error, Result};

/// Vacuum speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Group speed of light in standard air (m/s), the default `c_a`.
pub const SPEED_OF_LIGHT_AIR: f64 = 299_702_547.0;

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("|beta| must be below 1, got {beta}")))
    }
}

fn beta_of(v: f64, c_a: f64) -> Result<f64> {
    if !(c_a > 0.0) {
        return Err(Error::domain(format!("photon speed must be positive, got {c_a}")));
    }
    let beta = v / c_a;
    check_beta(beta).map_err(|_| Error::domain(format!("|v| = {} m/s is not below c_a = {c_a} m/s", v.abs())))?;
    Ok(beta)
}

/// `1/√(1 − β²)` with `β = v/c_a`.
pub fn lorentz_gamma(v: f64, c_a: f64) -> Result<f64> {
    let beta = beta_of(v, c_a)?;
    Ok(1.0 / (1.0 - beta * beta).sqrt())
}

/// `γ − 1` evaluated without cancellation, for speeds where γ is within a
/// few ulps of one.
pub fn gamma_minus_one(v: f64, c_a: f64) -> Result<f64> {
    let beta = beta_of(v, c_a)?;
    let root = (1.0 - beta * beta).sqrt();
    Ok(beta * beta / (root * (1.0 + root)))
}

/// Frequency seen from a source moving at `beta` (positive = approaching).
pub fn relativistic_doppler(nu: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(nu * ((1.0 + beta) / (1.0 - beta)).sqrt())
}

/// Difference between the classical and relativistic Doppler interval shifts
/// over an interval `t` (seconds).
///
/// Classical: `t − t(1 − β) = tβ`. Relativistic: `t − t√((1 − β)/(1 + β))`.
/// The difference simplifies to `t(1 − β)(γ − 1)`, which is what is evaluated.
pub fn dilation_delta(t: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let root = (1.0 - beta * beta).sqrt();
    let gamma_m1 = beta * beta / (root * (1.0 + root));
    Ok(t * (1.0 - beta) * gamma_m1)
}

/// Round-trip time-axis scale of a stream reflected off a target with
/// radial velocity `v` (negative = approaching).
///
/// Emission time `t` maps to reception time `s·t + const` with
/// `s = (c_a + v)/(c_a − v)`; an approaching target compresses the stream
/// (`s < 1`) and `s − 1 ≈ 2v/c_a` at low speed.
pub fn doppler_scale(v: f64, c_a: f64) -> Result<f64> {
    beta_of(v, c_a)?;
    Ok((c_a + v) / (c_a - v))
}

/// One-way distance for a round-trip delay `tau_ps`: `c_a·τ/2`.
pub fn range_from_delay(tau_ps: f64, c_a: f64) -> f64 {
    c_a * (tau_ps * 1e-12) / 2.0
}

/// Range resolution of a timer with tick `tick_ps`.
pub fn range_resolution(tick_ps: f64, c_a: f64) -> f64 {
    range_from_delay(tick_ps, c_a)
}

/// First-order velocity from a Doppler frequency bin: `c_a·f_d/(2·PRF)`.
pub fn velocity_from_doppler(f_d: f64, prf: f64, c_a: f64) -> Result<f64> {
    if !(prf > 0.0) {
        return Err(Error::domain(format!("PRF must be positive, got {prf}")));
    }
    Ok(c_a * f_d / (2.0 * prf))
}

/// Exact inverse of [`doppler_scale`]: `c_a(s − 1)/(s + 1)`.
pub fn velocity_from_scale(scale: f64, c_a: f64) -> Result<f64> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::domain(format!("time scale must be positive, got {scale}")));
    }
    Ok(c_a * (scale - 1.0) / (scale + 1.0))
}

/// Kinematic state of a target relative to the radar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    /// Speed towards the radar over `c_a` (positive = approaching).
    pub beta: f64,
    pub gamma: f64,
    /// Round-trip time-axis scale, see [`doppler_scale`].
    pub doppler_scale: f64,
}

impl Kinematics {
    pub fn from_radial_velocity(v: f64, c_a: f64) -> Result<Self> {
        Ok(Kinematics {
            beta: -beta_of(v, c_a)?,
            gamma: lorentz_gamma(v, c_a)?,
            doppler_scale: doppler_scale(v, c_a)?,
        })
    }

    pub fn radial_velocity(&self, c_a: f64) -> f64 {
        -self.beta * c_a
    }
}
