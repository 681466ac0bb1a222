//! Coincidence rate versus distance: `rate(x) = b + a/x²`, with `x` in mm.
//!
//! `b` is the accidental (background) coincidence rate and `a` lumps every
//! attenuation of the true signal. The fit is linear in `(a, b)` and is
//! solved in closed form. [`RateModel::LiteralQuadratic`] evaluates
//! `b + a·x²` instead, for comparison against that reading of the model.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateModel {
    #[default]
    InverseSquare,
    LiteralQuadratic,
}

impl RateModel {
    fn basis(self, x: f64) -> f64 {
        match self {
            RateModel::InverseSquare => 1.0 / (x * x),
            RateModel::LiteralQuadratic => x * x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// Signal coefficient (counts·mm² for the inverse-square model).
    pub a: f64,
    /// Background coincidence rate.
    pub b: f64,
    /// Sum of squared residuals.
    pub residual: f64,
    pub std_err_a: f64,
    pub std_err_b: f64,
    #[serde(default)]
    pub model: RateModel,
    /// Pair rate (pairs/s) of the acquisition the fit describes.
    #[serde(default)]
    pub reference_rate: Option<f64>,
}

impl RateFit {
    pub fn new(a: f64, b: f64) -> Self {
        RateFit {
            a,
            b,
            residual: 0.0,
            std_err_a: 0.0,
            std_err_b: 0.0,
            model: RateModel::InverseSquare,
            reference_rate: None,
        }
    }

    pub fn with_reference_rate(mut self, pairs_per_s: f64) -> Self {
        self.reference_rate = Some(pairs_per_s);
        self
    }
}

/// Model rate at distance `x_mm`.
pub fn rate_at(x_mm: f64, fit: &RateFit) -> Result<f64> {
    if !(x_mm > 0.0) {
        return Err(Error::domain(format!("distance must be positive, got {x_mm} mm")));
    }
    Ok(fit.b + fit.a * fit.model.basis(x_mm))
}

pub fn fit_rates(samples: &[(f64, f64)]) -> Result<RateFit> {
    fit_rates_with(samples, RateModel::InverseSquare)
}

/// Least-squares `(a, b)` for the chosen model.
pub fn fit_rates_with(samples: &[(f64, f64)], model: RateModel) -> Result<RateFit> {
    if samples.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 samples, got {}", samples.len())));
    }
    if let Some(&(x, _)) = samples.iter().find(|(x, _)| !(*x > 0.0 && x.is_finite())) {
        return Err(Error::domain(format!("distance must be positive, got {x} mm")));
    }
    let n = samples.len() as f64;
    let u: Vec<f64> = samples.iter().map(|&(x, _)| model.basis(x)).collect();
    let u_mean = u.iter().sum::<f64>() / n;
    let y_mean = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = u.iter().map(|ui| (ui - u_mean).powi(2)).sum();
    let sxy: f64 = u
        .iter()
        .zip(samples)
        .map(|(ui, s)| (ui - u_mean) * (s.1 - y_mean))
        .sum();
    if !(sxx > f64::EPSILON * u_mean * u_mean * n) {
        return Err(Error::Fit(
            "normal equations are singular: sample distances do not vary".into(),
        ));
    }
    let a = sxy / sxx;
    let b = y_mean - a * u_mean;
    let residual: f64 = u.iter().zip(samples).map(|(ui, s)| (s.1 - b - a * ui).powi(2)).sum();
    let var = if samples.len() > 2 { residual / (n - 2.0) } else { 0.0 };
    Ok(RateFit {
        a,
        b,
        residual,
        std_err_a: (var / sxx).sqrt(),
        std_err_b: (var * (1.0 / n + u_mean * u_mean / sxx)).sqrt(),
        model,
        reference_rate: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RangeLimit {
    /// Signal falls to the requested level at this distance (mm).
    Bounded(f64),
    /// Signal never falls to the requested level.
    Unbounded,
    /// Signal is below the requested level at every distance.
    Unreachable,
}

/// Distance at which the signal term, scaled from the fit's reference pair
/// rate to `pair_rate`, drops to `min_signal`.
///
/// Under the inverse-square model the signal grows without bound near the
/// telescope, so any positive level is reached somewhere unless `a = 0`.
pub fn max_range(pair_rate: f64, fit: &RateFit, min_signal: f64) -> Result<RangeLimit> {
    if !(min_signal > 0.0) {
        return Err(Error::domain(format!("min_signal must be positive, got {min_signal}")));
    }
    let reference = fit
        .reference_rate
        .ok_or_else(|| Error::config("fit has no reference pair rate"))?;
    if !(reference > 0.0 && pair_rate >= 0.0) {
        return Err(Error::config("pair rates must be positive"));
    }
    let amplitude = fit.a * pair_rate / reference;
    if !(amplitude > 0.0) {
        return Ok(RangeLimit::Unreachable);
    }
    Ok(match fit.model {
        RateModel::InverseSquare => RangeLimit::Bounded((amplitude / min_signal).sqrt()),
        RateModel::LiteralQuadratic => RangeLimit::Unbounded,
    })
}

/// Reads `(x_mm, rate)` rows; a non-numeric first row is taken as a header.
pub fn read_samples_csv<R: Read>(r: R) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(r);
    let mut out = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::format(format!("rate csv: {e}")))?;
        if rec.len() < 2 {
            return Err(Error::format(format!("rate csv row {}: expected x_mm,rate", k + 1)));
        }
        let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
        match parsed {
            (Ok(x), Ok(y)) => out.push((x, y)),
            _ if k == 0 => continue,
            _ => return Err(Error::format(format!("rate csv row {}: not numeric", k + 1))),
        }
    }
    Ok(out)
}
