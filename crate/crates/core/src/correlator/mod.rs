//! Cross-correlation of reference and received streams over a
//! delay × Doppler-scale × Lorentz-factor hypothesis grid.
//!
//! Counts are raw coincidences (the correlation normalization is one), so
//! Poisson arithmetic applies directly to the correlogram.

mod direct;
pub mod export;
mod fft;
mod lag;

pub use direct::{ccf_direct, ccf_direct_with_budget};
pub use fft::{ccf_fft, LagCorrelation};
pub use lag::Engine;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timetag::TimeTagStream;

/// Default limit on `n_gamma · n_doppler · n_tau`.
pub const DEFAULT_CELL_BUDGET: usize = 1 << 26;

/// Bins on either side of the peak excluded from the background estimate.
pub const GUARD_BINS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisGrid {
    pub tau_min_ps: i64,
    /// Exclusive upper end of the delay range.
    pub tau_max_ps: i64,
    pub tau_step_ps: u64,
    /// Fractional time-scale offsets; bin `b` tests `s = 1 + b`.
    pub doppler_offsets: Vec<f64>,
    pub gammas: Vec<f64>,
}

impl HypothesisGrid {
    /// Delay-only grid: one Doppler bin at `s = 1` and `γ = 1`.
    pub fn stationary(tau_min_ps: i64, tau_max_ps: i64, tau_step_ps: u64) -> Self {
        HypothesisGrid {
            tau_min_ps,
            tau_max_ps,
            tau_step_ps,
            doppler_offsets: vec![0.0],
            gammas: vec![1.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau_step_ps == 0 {
            return Err(Error::config("tau_step_ps must be at least 1"));
        }
        if self.tau_min_ps >= self.tau_max_ps {
            return Err(Error::config(format!(
                "tau range [{}, {}) is empty",
                self.tau_min_ps, self.tau_max_ps
            )));
        }
        if self.doppler_offsets.is_empty() || self.gammas.is_empty() {
            return Err(Error::config("doppler and gamma axes need at least one bin"));
        }
        if let Some(b) = self.doppler_offsets.iter().find(|b| !(b.is_finite() && **b > -1.0)) {
            return Err(Error::config(format!("doppler offset {b} gives a non-positive scale")));
        }
        if let Some(g) = self.gammas.iter().find(|g| !(g.is_finite() && **g >= 1.0)) {
            return Err(Error::config(format!("gamma {g} is below 1")));
        }
        Ok(())
    }

    pub fn n_tau(&self) -> usize {
        let span = (self.tau_max_ps - self.tau_min_ps) as u64;
        span.div_ceil(self.tau_step_ps) as usize
    }

    pub fn n_cells(&self) -> u128 {
        self.gammas.len() as u128 * self.doppler_offsets.len() as u128 * self.n_tau() as u128
    }

    /// Delay (ps) at the leading edge of tau bin `k`.
    pub fn tau_of(&self, k: usize) -> i64 {
        self.tau_min_ps + (k as u64 * self.tau_step_ps) as i64
    }

    /// Combined time scale of a cell: `(1 + b)·γ`.
    pub fn rescale(&self, gamma_idx: usize, doppler_idx: usize) -> f64 {
        (1.0 + self.doppler_offsets[doppler_idx]) * self.gammas[gamma_idx]
    }

    /// `(gamma_idx, doppler_idx)` pairs in storage order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let nd = self.doppler_offsets.len();
        (0..self.gammas.len()).flat_map(move |g| (0..nd).map(move |d| (g, d)))
    }
}

pub(crate) fn check_budget(grid: &HypothesisGrid, budget: usize) -> Result<()> {
    let cells = grid.n_cells();
    if cells > budget as u128 {
        return Err(Error::Capacity {
            what: "correlogram cells",
            requested: cells,
            limit: budget as u128,
        });
    }
    Ok(())
}

/// Coincidence counts over the hypothesis grid, stored gamma-major, then
/// Doppler, then delay.
#[derive(Debug, Clone, PartialEq)]
pub struct Correlogram {
    counts: Vec<u64>,
    grid: HypothesisGrid,
    n_ref: usize,
    n_recv: usize,
}

impl Correlogram {
    fn from_slices(grid: HypothesisGrid, slices: Vec<Vec<u64>>, n_ref: usize, n_recv: usize) -> Self {
        let counts = slices.into_iter().flatten().collect();
        Correlogram {
            counts,
            grid,
            n_ref,
            n_recv,
        }
    }

    pub fn grid(&self) -> &HypothesisGrid {
        &self.grid
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n_ref(&self) -> usize {
        self.n_ref
    }

    pub fn n_recv(&self) -> usize {
        self.n_recv
    }

    /// Delay profile of one `(γ, s)` cell.
    pub fn slice(&self, gamma_idx: usize, doppler_idx: usize) -> &[u64] {
        let n_tau = self.grid.n_tau();
        let start = (gamma_idx * self.grid.doppler_offsets.len() + doppler_idx) * n_tau;
        &self.counts[start..start + n_tau]
    }

    pub fn count(&self, gamma_idx: usize, doppler_idx: usize, tau_idx: usize) -> u64 {
        self.slice(gamma_idx, doppler_idx)[tau_idx]
    }

    /// Largest bin of one cell, with background and sub-bin delay.
    pub fn cell_peak(&self, gamma_idx: usize, doppler_idx: usize) -> Option<Peak> {
        let slice = self.slice(gamma_idx, doppler_idx);
        let (k, height) = first_max(slice)?;
        if height == 0 {
            return None;
        }
        let stats = background(slice, k, GUARD_BINS);
        let step = self.grid.tau_step_ps as f64;
        let tau_ps = self.grid.tau_of(k) as f64 + parabolic_offset(slice, k) * step;
        Some(Peak {
            gamma_idx,
            doppler_idx,
            tau_idx: k,
            tau_ps,
            doppler_offset: self.grid.doppler_offsets[doppler_idx],
            gamma: self.grid.gammas[gamma_idx],
            height,
            background_mean: stats.mean,
            significance: significance(height, stats),
        })
    }

    /// Highest bin over the whole grid; the first cell in storage order wins
    /// ties. `None` when every bin is empty.
    pub fn global_peak(&self) -> Option<Peak> {
        let (flat, height) = first_max(&self.counts)?;
        if height == 0 {
            return None;
        }
        let n_tau = self.grid.n_tau();
        let cell = flat / n_tau;
        let nd = self.grid.doppler_offsets.len();
        self.cell_peak(cell / nd, cell % nd)
    }
}

fn first_max(xs: &[u64]) -> Option<(usize, u64)> {
    let mut best: Option<(usize, u64)> = None;
    for (k, &x) in xs.iter().enumerate() {
        if best.is_none_or(|(_, b)| x > b) {
            best = Some((k, x));
        }
    }
    best
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Background {
    pub mean: f64,
    pub bins: usize,
}

/// Mean of the bins at least `guard` bins away from `peak`.
pub(crate) fn background(slice: &[u64], peak: usize, guard: usize) -> Background {
    let (sum, bins) = slice
        .iter()
        .enumerate()
        .filter(|(k, _)| k.abs_diff(peak) >= guard)
        .fold((0u64, 0usize), |(s, n), (_, &c)| (s + c, n + 1));
    let mean = if bins == 0 { 0.0 } else { sum as f64 / bins as f64 };
    Background { mean, bins }
}

/// `(h − μ)/√μ`. An empty background region is read as a single count
/// spread over it, which keeps the ratio finite.
pub(crate) fn significance(height: u64, bg: Background) -> f64 {
    let floor = 1.0 / bg.bins.max(1) as f64;
    (height as f64 - bg.mean) / bg.mean.max(floor).sqrt()
}

/// Vertex of the parabola through bins `k−1, k, k+1`, in bins from `k`.
pub(crate) fn parabolic_offset(slice: &[u64], k: usize) -> f64 {
    if k == 0 || k + 1 >= slice.len() {
        return 0.0;
    }
    let (l, c, r) = (slice[k - 1] as f64, slice[k] as f64, slice[k + 1] as f64);
    let denom = l - 2.0 * c + r;
    if denom >= 0.0 {
        return 0.0;
    }
    (0.5 * (l - r) / denom).clamp(-0.5, 0.5)
}

/// Location and strength of a correlogram maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub gamma_idx: usize,
    pub doppler_idx: usize,
    pub tau_idx: usize,
    /// Sub-bin refined delay (ps).
    pub tau_ps: f64,
    pub doppler_offset: f64,
    pub gamma: f64,
    pub height: u64,
    pub background_mean: f64,
    pub significance: f64,
}

impl Peak {
    /// Combined time scale of the peak cell.
    pub fn scale(&self) -> f64 {
        (1.0 + self.doppler_offset) * self.gamma
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorConfig {
    pub cell_budget: usize,
    pub engine: Engine,
}

impl Default for CorrelatorConfig {
    fn default() -> Self {
        CorrelatorConfig {
            cell_budget: DEFAULT_CELL_BUDGET,
            engine: Engine::Auto,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub correlogram: Correlogram,
    /// `None` when the correlogram is empty: no detection, not an error.
    pub peak: Option<Peak>,
}

/// Grid search with the default configuration.
pub fn search(reference: &TimeTagStream, recv: &TimeTagStream, grid: &HypothesisGrid) -> Result<SearchOutcome> {
    search_with(reference, recv, grid, &CorrelatorConfig::default())
}

/// Grid search over binned streams.
///
/// Reference tags fall in bins `floor(t/τ_step)`; for each cell the received
/// tags are rescaled to `t/(s·γ)` and fall in bins
/// `floor((t − τ_min)/τ_step)`. Tau bin `k` of the cell counts pairs whose
/// bin indices differ by exactly `k`, so it represents delay
/// `τ_min + k·τ_step`. Cells are evaluated in parallel and assembled in grid
/// order.
pub fn search_with(
    reference: &TimeTagStream,
    recv: &TimeTagStream,
    grid: &HypothesisGrid,
    cfg: &CorrelatorConfig,
) -> Result<SearchOutcome> {
    grid.validate()?;
    check_budget(grid, cfg.cell_budget)?;
    let n_tau = grid.n_tau();
    let step = grid.tau_step_ps as f64;
    let tau_min = grid.tau_min_ps as f64;
    let ref_idx: Vec<i64> = reference
        .tags()
        .iter()
        .map(|&t| (t / grid.tau_step_ps) as i64)
        .collect();

    let slices: Vec<Vec<u64>> = grid
        .cells()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(g, d)| {
            let scale = grid.rescale(g, d);
            let recv_idx: Vec<i64> = recv
                .tags()
                .iter()
                .filter_map(|&t| {
                    let t = if scale == 1.0 { t as f64 } else { t as f64 / scale };
                    let offset = t - tau_min;
                    (offset >= 0.0).then(|| (offset / step).floor() as i64)
                })
                .collect();
            lag::lag_histogram(&ref_idx, &recv_idx, n_tau, cfg.engine)
        })
        .collect();

    let correlogram = Correlogram::from_slices(grid.clone(), slices, reference.len(), recv.len());
    let peak = correlogram.global_peak();
    Ok(SearchOutcome { correlogram, peak })
}
