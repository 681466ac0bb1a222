//! Lag histograms of bin-index lists.
//!
//! Each correlator cell reduces to two sorted lists of bin indices, one per
//! stream, and asks for the histogram of `recv − ref` over lags
//! `0..n_lags`. Two exact engines compute it: pair enumeration, which is
//! cheap when the streams are sparse compared with the lag window, and
//! block-segmented FFT correlation, which is cheap when they are dense.

use serde::{Deserialize, Serialize};

use super::fft::FftPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Pick the cheaper engine per cell.
    #[default]
    Auto,
    Fft,
    Sparse,
}

/// Histogram by enumerating every in-window pair.
pub(crate) fn sparse(ref_idx: &[i64], recv_idx: &[i64], n_lags: usize) -> Vec<u64> {
    let mut out = vec![0u64; n_lags];
    let span = n_lags as i64;
    let (mut lo, mut hi) = (0usize, 0usize);
    for &j in recv_idx {
        while lo < ref_idx.len() && ref_idx[lo] <= j - span {
            lo += 1;
        }
        hi = hi.max(lo);
        while hi < ref_idx.len() && ref_idx[hi] <= j {
            hi += 1;
        }
        for &i in &ref_idx[lo..hi] {
            out[(j - i) as usize] += 1;
        }
    }
    out
}

/// Number of pairs [`sparse`] would visit.
pub(crate) fn pair_count(ref_idx: &[i64], recv_idx: &[i64], n_lags: usize) -> u64 {
    let span = n_lags as i64;
    let (mut lo, mut hi, mut n) = (0usize, 0usize, 0u64);
    for &j in recv_idx {
        while lo < ref_idx.len() && ref_idx[lo] <= j - span {
            lo += 1;
        }
        hi = hi.max(lo);
        while hi < ref_idx.len() && ref_idx[hi] <= j {
            hi += 1;
        }
        n += (hi - lo) as u64;
    }
    n
}

pub(crate) fn block_len(n_lags: usize) -> usize {
    n_lags.max(1024).next_power_of_two()
}

fn fft_size(block: usize, n_lags: usize) -> usize {
    (2 * block + n_lags).next_power_of_two()
}

fn occupied_blocks(ref_idx: &[i64], block: usize) -> usize {
    let b = block as i64;
    let mut n = 0;
    let mut last = None;
    for &i in ref_idx {
        let k = i.div_euclid(b);
        if last != Some(k) {
            n += 1;
            last = Some(k);
        }
    }
    n
}

/// Histogram by FFT correlation of consecutive reference blocks against the
/// received segment each block can reach.
pub(crate) fn blocked_fft(ref_idx: &[i64], recv_idx: &[i64], n_lags: usize) -> Vec<u64> {
    let mut out = vec![0u64; n_lags];
    if ref_idx.is_empty() || recv_idx.is_empty() || n_lags == 0 {
        return out;
    }
    let block = block_len(n_lags);
    let mut plan = FftPlan::new(fft_size(block, n_lags));
    let seg_len = block + n_lags - 1;
    let mut a = vec![0u64; block];
    let mut b = vec![0u64; seg_len];

    let mut start = 0usize;
    while start < ref_idx.len() {
        let base = ref_idx[start].div_euclid(block as i64) * block as i64;
        let end = start + ref_idx[start..].partition_point(|&i| i < base + block as i64);
        let r0 = recv_idx.partition_point(|&j| j < base);
        let r1 = recv_idx.partition_point(|&j| j < base + seg_len as i64);
        if r1 > r0 {
            a.iter_mut().for_each(|x| *x = 0);
            b.iter_mut().for_each(|x| *x = 0);
            for &i in &ref_idx[start..end] {
                a[(i - base) as usize] += 1;
            }
            for &j in &recv_idx[r0..r1] {
                b[(j - base) as usize] += 1;
            }
            let c = plan.correlate(&a, &b);
            for (o, &v) in out.iter_mut().zip(&c[..n_lags]) {
                *o += v;
            }
        }
        start = end;
    }
    debug_assert!(plan.size() >= block + seg_len);
    out
}

/// Runs the requested engine; `Auto` compares a rough operation count.
pub(crate) fn lag_histogram(ref_idx: &[i64], recv_idx: &[i64], n_lags: usize, engine: Engine) -> Vec<u64> {
    match engine {
        Engine::Sparse => sparse(ref_idx, recv_idx, n_lags),
        Engine::Fft => blocked_fft(ref_idx, recv_idx, n_lags),
        Engine::Auto => {
            let block = block_len(n_lags);
            let n = fft_size(block, n_lags) as f64;
            let fft_cost = occupied_blocks(ref_idx, block) as f64 * 3.0 * n * n.log2();
            let sparse_cost = pair_count(ref_idx, recv_idx, n_lags) as f64 + recv_idx.len() as f64;
            if fft_cost < sparse_cost {
                blocked_fft(ref_idx, recv_idx, n_lags)
            } else {
                sparse(ref_idx, recv_idx, n_lags)
            }
        }
    }
}
