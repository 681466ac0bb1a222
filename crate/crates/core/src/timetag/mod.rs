//! Photon time-tag streams.
//!
//! A [`TimeTagStream`] is the sorted list of detection timestamps recorded on
//! one channel during one acquisition. Timestamps are integer picoseconds
//! counted from the start of the acquisition, so windowing and equality are
//! exact. The delta-train view used by the FFT correlator is a
//! [`BinnedTrain`].

pub mod io;

use crate::error::{Error, Result};

/// Sorted detection timestamps (ps) on a single channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeTagStream {
    tags: Vec<u64>,
    channel: u32,
    duration: u64,
}

impl TimeTagStream {
    /// Builds a stream from unsorted raw timestamps.
    ///
    /// Every tag must lie in the closed window `[0, duration]`.
    pub fn from_tags(raw: impl Into<Vec<u64>>, channel: u32, duration: u64) -> Result<Self> {
        if duration == 0 {
            return Err(Error::config("stream duration must be positive"));
        }
        let mut tags = raw.into();
        if let Some(&bad) = tags.iter().find(|&&t| t > duration) {
            return Err(Error::config(format!(
                "tag {bad} ps lies outside the acquisition window [0, {duration}]"
            )));
        }
        tags.sort_unstable();
        Ok(TimeTagStream {
            tags,
            channel,
            duration,
        })
    }

    /// Empty stream over `duration` ps.
    pub fn empty(channel: u32, duration: u64) -> Result<Self> {
        Self::from_tags(Vec::new(), channel, duration)
    }

    /// Caller guarantees sorted tags inside the window.
    pub(crate) fn from_sorted(tags: Vec<u64>, channel: u32, duration: u64) -> Self {
        debug_assert!(duration > 0);
        debug_assert!(tags.windows(2).all(|w| w[0] <= w[1]));
        debug_assert!(tags.last().is_none_or(|&t| t <= duration));
        TimeTagStream {
            tags,
            channel,
            duration,
        }
    }

    pub fn tags(&self) -> &[u64] {
        &self.tags
    }

    pub fn into_tags(self) -> Vec<u64> {
        self.tags
    }

    pub fn channel(&self) -> u32 {
        self.channel
    }

    /// Length of the observation window in ps.
    pub fn duration(&self) -> u64 {
        self.duration
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    /// Same tags relabelled onto another channel.
    pub fn with_channel(mut self, channel: u32) -> Self {
        self.channel = channel;
        self
    }

    /// Histogram of the stream with bins `[origin + k·w, origin + (k+1)·w)`.
    ///
    /// The train covers the acquisition window: it has
    /// `floor((duration − origin)/w) + 1` bins, and tags before `origin` are
    /// not counted.
    pub fn bin(&self, bin_width: u64, origin: i64) -> Result<BinnedTrain> {
        if bin_width == 0 {
            return Err(Error::config("bin width must be at least 1 ps"));
        }
        let span = self.duration as i128 - origin as i128;
        let n_bins = if span < 0 {
            0
        } else {
            (span / bin_width as i128 + 1) as usize
        };
        let mut bins = vec![0u64; n_bins];
        for &t in &self.tags {
            let offset = t as i128 - origin as i128;
            if offset < 0 {
                continue;
            }
            let idx = (offset / bin_width as i128) as usize;
            if idx < n_bins {
                bins[idx] += 1;
            }
        }
        Ok(BinnedTrain {
            bins,
            bin_width,
            origin,
        })
    }
}

/// Dense count histogram of a stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinnedTrain {
    bins: Vec<u64>,
    bin_width: u64,
    origin: i64,
}

impl BinnedTrain {
    pub fn new(bins: Vec<u64>, bin_width: u64, origin: i64) -> Result<Self> {
        if bin_width == 0 {
            return Err(Error::config("bin width must be at least 1 ps"));
        }
        Ok(BinnedTrain {
            bins,
            bin_width,
            origin,
        })
    }

    pub fn bins(&self) -> &[u64] {
        &self.bins
    }

    pub fn bin_width(&self) -> u64 {
        self.bin_width
    }

    /// Time (ps) of the leading edge of bin 0.
    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }
}

/// Pairing rule used by [`coincidence_count_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoincidenceMode {
    /// Every tag participates in at most one coincidence. The count is the
    /// size of a maximum one-to-one matching.
    #[default]
    OneToOne,
    /// Every pair inside the window counts.
    AllPairs,
}

/// Number of one-to-one coincidences between `a` (shifted by `delay`) and `b`.
///
/// A pair `(a_i, b_j)` is coincident when `|b_j − a_i − delay| ≤ window/2`;
/// the window edge is inclusive.
pub fn coincidence_count(a: &TimeTagStream, b: &TimeTagStream, delay: i64, window: u64) -> u64 {
    coincidence_count_with(a, b, delay, window, CoincidenceMode::OneToOne)
}

pub fn coincidence_count_with(
    a: &TimeTagStream,
    b: &TimeTagStream,
    delay: i64,
    window: u64,
    mode: CoincidenceMode,
) -> u64 {
    let a = a.tags();
    let b = b.tags();
    let w = window as i128;
    let d = delay as i128;
    // twice the offset of b_j from the shifted a_i, compared against the full window
    let twice_gap = |ai: u64, bj: u64| 2 * (bj as i128 - ai as i128 - d);

    match mode {
        CoincidenceMode::OneToOne => {
            // Greedy sweep over the two sorted lists; on interval-style
            // adjacency this yields a maximum matching.
            let (mut i, mut j, mut n) = (0usize, 0usize, 0u64);
            while i < a.len() && j < b.len() {
                let g = twice_gap(a[i], b[j]);
                if g < -w {
                    j += 1;
                } else if g > w {
                    i += 1;
                } else {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
            n
        }
        CoincidenceMode::AllPairs => {
            let (mut lo, mut hi, mut n) = (0usize, 0usize, 0u64);
            for &bj in b {
                while lo < a.len() && twice_gap(a[lo], bj) > w {
                    lo += 1;
                }
                if hi < lo {
                    hi = lo;
                }
                while hi < a.len() && twice_gap(a[hi], bj) >= -w {
                    hi += 1;
                }
                n += (hi - lo) as u64;
            }
            n
        }
    }
}
