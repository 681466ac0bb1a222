use rayon::prelude::*;

use super::{check_budget, Correlogram, HypothesisGrid};
use crate::error::Result;
use crate::timetag::TimeTagStream;

/// Delay histogram of every (received, reference) tag pair, per grid cell.
///
/// For the cell `(γ, s)` each received tag is mapped back to `t / (s·γ)`
/// and the difference to each reference tag lands in bin
/// `floor((Δ − τ_min)/τ_step)` when inside the delay range.
pub fn ccf_direct(reference: &TimeTagStream, recv: &TimeTagStream, grid: &HypothesisGrid) -> Result<Correlogram> {
    ccf_direct_with_budget(reference, recv, grid, super::DEFAULT_CELL_BUDGET)
}

pub fn ccf_direct_with_budget(
    reference: &TimeTagStream,
    recv: &TimeTagStream,
    grid: &HypothesisGrid,
    cell_budget: usize,
) -> Result<Correlogram> {
    grid.validate()?;
    check_budget(grid, cell_budget)?;
    let n_tau = grid.n_tau();
    let tau_min = grid.tau_min_ps as f64;
    let tau_end = tau_min + (n_tau as u64 * grid.tau_step_ps) as f64;
    let step = grid.tau_step_ps as f64;
    let ref_tags: Vec<f64> = reference.tags().iter().map(|&t| t as f64).collect();

    let slices: Vec<Vec<u64>> = grid
        .cells()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(g, d)| {
            let scale = grid.rescale(g, d);
            let mut hist = vec![0u64; n_tau];
            let (mut lo, mut hi) = (0usize, 0usize);
            for &t in recv.tags() {
                let t = if scale == 1.0 { t as f64 } else { t as f64 / scale };
                while lo < ref_tags.len() && t - ref_tags[lo] >= tau_end {
                    lo += 1;
                }
                hi = hi.max(lo);
                while hi < ref_tags.len() && t - ref_tags[hi] >= tau_min {
                    hi += 1;
                }
                for &r in &ref_tags[lo..hi] {
                    let k = (((t - r) - tau_min) / step).floor() as usize;
                    hist[k.min(n_tau - 1)] += 1;
                }
            }
            hist
        })
        .collect();

    Ok(Correlogram::from_slices(
        grid.clone(),
        slices,
        reference.len(),
        recv.len(),
    ))
}
