//! Signal-to-jam ratios for classical and entangled illumination.
//!
//! `σ_Q` is an input here; nothing in this module derives it from target
//! geometry. `P_j` is a photon count per measurement, while the channel's
//! jammer is a rate; multiply the rate by the integration time to compare.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JamScenario {
    /// Transmitted photons.
    pub k: f64,
    /// Classical cross-section.
    pub sigma: f64,
    /// Quantum cross-section.
    pub sigma_q: f64,
    /// Entangled qubits per photon state.
    pub m: u32,
    /// Mean jammer photons.
    pub p_j: f64,
}

impl JamScenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::config(format!("K must be positive, got {}", self.k)));
        }
        if !(self.p_j > 0.0) {
            return Err(Error::domain(format!("P_j must be positive, got {}", self.p_j)));
        }
        if !(self.sigma >= 0.0 && self.sigma_q >= 0.0) {
            return Err(Error::config("cross-sections must be non-negative"));
        }
        Ok(())
    }
}

/// An S/J value; entangled ratios that overflow `f64` are kept as `log2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum JamRatio {
    Linear(f64),
    Log2(f64),
}

impl JamRatio {
    pub fn log2(&self) -> f64 {
        match *self {
            JamRatio::Linear(x) => x.log2(),
            JamRatio::Log2(l) => l,
        }
    }

    /// The linear value, `+∞` if it does not fit.
    pub fn value(&self) -> f64 {
        match *self {
            JamRatio::Linear(x) => x,
            JamRatio::Log2(l) => l.exp2(),
        }
    }
}

/// `Kσ/P_j`.
pub fn sj_classical(s: &JamScenario) -> Result<f64> {
    s.validate()?;
    Ok(s.k * s.sigma / s.p_j)
}

/// `K·2^m·σ_Q/P_j`.
pub fn sj_entangled(s: &JamScenario) -> Result<JamRatio> {
    s.validate()?;
    let base = s.k * s.sigma_q / s.p_j;
    let gain = (s.m <= 1023).then(|| 2f64.powi(s.m as i32));
    match gain {
        Some(g) if (base * g).is_finite() => Ok(JamRatio::Linear(base * g)),
        _ => Ok(JamRatio::Log2(base.log2() + s.m as f64)),
    }
}

/// Rows `(m, classical, entangled)` for `m = 0..=m_max`.
pub fn jam_table(s: &JamScenario, m_max: u32) -> Result<Vec<(u32, f64, JamRatio)>> {
    let classical = sj_classical(s)?;
    (0..=m_max)
        .map(|m| Ok((m, classical, sj_entangled(&JamScenario { m, ..*s })?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(k: f64, sigma: f64, p_j: f64) -> JamScenario {
        JamScenario {
            k,
            sigma,
            sigma_q: sigma,
            m: 0,
            p_j,
        }
    }

    #[test]
    fn classical_examples() {
        assert_eq!(sj_classical(&scenario(1000.0, 0.1, 100.0)).unwrap(), 1.0);
        assert_eq!(sj_classical(&scenario(1000.0, 0.0, 100.0)).unwrap(), 0.0);
        assert!((sj_classical(&scenario(1e6, 0.13, 1e4)).unwrap() - 13.0).abs() < 1e-12);
    }

    #[test]
    fn zero_jammer_is_a_domain_error() {
        assert!(matches!(sj_classical(&scenario(1.0, 0.1, 0.0)), Err(Error::Domain(_))));
        assert!(matches!(sj_entangled(&scenario(1.0, 0.1, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn entangled_examples() {
        let s = scenario(1000.0, 0.1, 100.0);
        assert_eq!(sj_entangled(&s).unwrap(), JamRatio::Linear(sj_classical(&s).unwrap()));
        let one = sj_entangled(&JamScenario { m: 1, ..s }).unwrap().value();
        assert_eq!(one, 2.0 * sj_entangled(&s).unwrap().value());
        assert_eq!(
            sj_entangled(&JamScenario { m: 10, ..s }).unwrap(),
            JamRatio::Linear(1024.0)
        );
    }

    #[test]
    fn huge_m_switches_to_log_space() {
        let s = JamScenario {
            m: 5000,
            ..scenario(1000.0, 0.1, 100.0)
        };
        match sj_entangled(&s).unwrap() {
            JamRatio::Log2(l) => assert!((l - 5000.0).abs() < 1e-9),
            other => panic!("expected log2 ratio, got {other:?}"),
        }
    }

    #[test]
    fn doubling_per_qubit_and_linear_scaling() {
        let s = scenario(12345.0, 0.37, 77.0);
        let rows = jam_table(&s, 20).unwrap();
        for w in rows.windows(2) {
            assert_eq!(w[1].2.value(), 2.0 * w[0].2.value());
        }
        let base = sj_classical(&s).unwrap();
        assert!((sj_classical(&JamScenario { k: 3.0 * s.k, ..s }).unwrap() - 3.0 * base).abs() < 1e-9);
        assert!((sj_classical(&JamScenario { p_j: 2.0 * s.p_j, ..s }).unwrap() - base / 2.0).abs() < 1e-9);
    }
}
