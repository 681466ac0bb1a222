//! Linear cross-correlation of count trains through the FFT.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::timetag::BinnedTrain;

/// Cross-correlation of two binned trains over every lag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LagCorrelation {
    /// Delay (ps) represented by `counts[0]`.
    pub first_lag_ps: i64,
    pub bin_width: u64,
    pub counts: Vec<u64>,
}

impl LagCorrelation {
    pub fn lag_ps(&self, index: usize) -> i64 {
        self.first_lag_ps + index as i64 * self.bin_width as i64
    }

    /// Index and value of the largest count; the earliest lag wins ties.
    pub fn argmax(&self) -> Option<(usize, u64)> {
        let mut best: Option<(usize, u64)> = None;
        for (k, &c) in self.counts.iter().enumerate() {
            if best.is_none_or(|(_, b)| c > b) {
                best = Some((k, c));
            }
        }
        best
    }

    pub fn count_at_lag(&self, lag_ps: i64) -> Option<u64> {
        let off = lag_ps - self.first_lag_ps;
        if off < 0 || off % self.bin_width as i64 != 0 {
            return None;
        }
        self.counts.get((off / self.bin_width as i64) as usize).copied()
    }
}

/// Forward/inverse transform pair of one size with reusable buffers.
pub(crate) struct FftPlan {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    a: Vec<Complex<f64>>,
    b: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl FftPlan {
    pub(crate) fn new(size: usize) -> Self {
        let mut planner = FftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        FftPlan {
            size,
            forward,
            inverse,
            a: vec![Complex::default(); size],
            b: vec![Complex::default(); size],
            scratch: vec![Complex::default(); scratch_len],
        }
    }

    pub(crate) fn size(&self) -> usize {
        self.size
    }

    /// Circular correlation `c[m] = Σ_i a[i]·b[(i + m) mod N]`, rounded to
    /// integer counts. Inputs no longer than the plan size are zero padded.
    pub(crate) fn correlate(&mut self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let n = self.size;
        debug_assert!(a.len() <= n && b.len() <= n);
        load(&mut self.a, a);
        load(&mut self.b, b);
        self.forward.process_with_scratch(&mut self.a, &mut self.scratch);
        self.forward.process_with_scratch(&mut self.b, &mut self.scratch);
        for (x, y) in self.a.iter_mut().zip(&self.b) {
            *x = x.conj() * y;
        }
        self.inverse.process_with_scratch(&mut self.a, &mut self.scratch);
        let scale = 1.0 / n as f64;
        self.a.iter().map(|c| (c.re * scale).round().max(0.0) as u64).collect()
    }
}

fn load(buf: &mut [Complex<f64>], data: &[u64]) {
    for (dst, &src) in buf.iter_mut().zip(data) {
        *dst = Complex::new(src as f64, 0.0);
    }
    for dst in &mut buf[data.len()..] {
        *dst = Complex::default();
    }
}

/// Linear cross-correlation of `recv` against `ref_train`.
///
/// Entry `m` counts `Σ_i ref[i]·recv[i + m]`, so a positive lag means the
/// received train is delayed. Both trains are zero padded to a power of two
/// at least the sum of their lengths, so no lag wraps around.
pub fn ccf_fft(ref_train: &BinnedTrain, recv: &BinnedTrain) -> Result<LagCorrelation> {
    if ref_train.bin_width() != recv.bin_width() {
        return Err(Error::config(format!(
            "bin widths differ: {} ps vs {} ps",
            ref_train.bin_width(),
            recv.bin_width()
        )));
    }
    let w = ref_train.bin_width() as i64;
    let (na, nb) = (ref_train.len(), recv.len());
    let first_lag_ps = -(na as i64 - 1).max(0) * w + (recv.origin() - ref_train.origin());
    if na == 0 || nb == 0 {
        return Ok(LagCorrelation {
            first_lag_ps,
            bin_width: w as u64,
            counts: Vec::new(),
        });
    }
    let size = (na + nb).next_power_of_two();
    let mut plan = FftPlan::new(size);
    let circular = plan.correlate(ref_train.bins(), recv.bins());
    // negative lags −(na−1)..−1 sit at the top of the circular buffer
    let counts = circular[size - (na - 1)..]
        .iter()
        .chain(&circular[..nb])
        .copied()
        .collect();
    Ok(LagCorrelation {
        first_lag_ps,
        bin_width: w as u64,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn train(bins: &[u64], origin: i64) -> BinnedTrain {
        BinnedTrain::new(bins.to_vec(), 10, origin).unwrap()
    }

    fn brute(a: &[u64], b: &[u64]) -> Vec<u64> {
        let (na, nb) = (a.len() as i64, b.len() as i64);
        (-(na - 1)..nb)
            .map(|m| {
                (0..na)
                    .filter(|&i| i + m >= 0 && i + m < nb)
                    .map(|i| a[i as usize] * b[(i + m) as usize])
                    .sum()
            })
            .collect()
    }

    #[test]
    fn delta_autocorrelation() {
        let c = ccf_fft(&train(&[1, 0, 0, 0], 0), &train(&[1, 0, 0, 0], 0)).unwrap();
        assert_eq!(c.count_at_lag(0), Some(1));
        assert_eq!(c.counts.iter().sum::<u64>(), 1);
        assert_eq!(c.first_lag_ps, -30);
    }

    #[test]
    fn delayed_copy_peaks_at_delay() {
        let a = [3, 0, 1, 4, 0, 0, 2, 0, 0, 0, 0, 0];
        let mut b = [0u64; 12];
        b[5..].copy_from_slice(&a[..7]);
        let c = ccf_fft(&train(&a, 0), &train(&b, 0)).unwrap();
        let (k, _) = c.argmax().unwrap();
        assert_eq!(c.lag_ps(k), 50);
    }

    #[test]
    fn matches_brute_force_with_origins() {
        let a = [1, 2, 0, 5, 1, 0, 0, 7];
        let b = [0, 0, 3, 1, 1, 9, 2];
        let c = ccf_fft(&train(&a, 100), &train(&b, -40)).unwrap();
        assert_eq!(c.counts, brute(&a, &b));
        assert_eq!(c.first_lag_ps, -70 - 140);
    }

    #[test]
    fn mismatched_widths() {
        let a = BinnedTrain::new(vec![1], 10, 0).unwrap();
        let b = BinnedTrain::new(vec![1], 20, 0).unwrap();
        assert!(matches!(ccf_fft(&a, &b), Err(Error::Config(_))));
    }

    #[test]
    fn empty_train() {
        let c = ccf_fft(&train(&[], 0), &train(&[1, 2], 0)).unwrap();
        assert!(c.counts.is_empty());
        assert!(c.argmax().is_none());
    }
}
