//! Segmented divisor-count sieve and maximal-run bookkeeping.
//!
//! The scan walks `[lo, N]` in fixed-width segments. Each segment is sieved
//! independently (so segments can run on worker threads) and reduced to a
//! small summary; summaries are folded left-to-right, carrying the run that
//! is still open at the segment edge. Folding is deterministic: results never
//! depend on segment width, thread count, or interruption points.

mod checkpoint;
pub(crate) mod scan;

use serde::Serialize;

use crate::util::isqrt;
use crate::{Error, Result};

pub use checkpoint::SieveCheckpoint;
pub use scan::{CensusEntry, EllRow, RunCensus, ScanConfig, ScanState};

/// Hard cap on the width of a single sieved window.
pub const MAX_WINDOW_WIDTH: u64 = 1 << 26;

/// Default scan segment width.
pub const DEFAULT_SEGMENT_WIDTH: u64 = 1 << 20;

/// A half-open interval `[lo, hi)` of positive integers.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Window {
    lo: u64,
    hi: u64,
}

impl Window {
    /// Requires `1 <= lo < hi`.
    pub fn new(lo: u64, hi: u64) -> Result<Self> {
        if lo < 1 || hi <= lo {
            return Err(Error::InvalidWindow { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn width(&self) -> u64 {
        self.hi - self.lo
    }

    pub fn contains(&self, n: u64) -> bool {
        self.lo <= n && n < self.hi
    }
}

/// A maximal stretch of consecutive integers sharing one divisor count.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RunRecord {
    /// First integer of the run.
    pub start: u64,
    /// Number of integers in the run.
    pub length: u64,
    /// The shared divisor count.
    pub divisor_count: u64,
}

impl RunRecord {
    /// Last integer of the run (inclusive).
    pub fn end(&self) -> u64 {
        self.start + self.length - 1
    }
}

/// Divisor counts for every integer in `window`, via a stride-marking sieve.
///
/// Runs in `O(width * log log hi)` time and `O(width)` space; `window.width()`
/// must not exceed [`MAX_WINDOW_WIDTH`].
pub fn sieve_divisor_counts(window: Window) -> Result<Vec<u64>> {
    if window.width() > MAX_WINDOW_WIDTH {
        return Err(Error::WindowTooWide {
            width: window.width(),
            limit: MAX_WINDOW_WIDTH,
        });
    }
    let primes = crate::arith::sieve_primes(isqrt(window.hi - 1));
    let mut cof = Vec::new();
    let mut dc = Vec::new();
    scan::fill_divisor_counts(window.lo, window.hi, &primes, &mut cof, &mut dc);
    Ok(dc.iter().map(|&d| u64::from(d)).collect())
}

/// The longest run inside `[1, n]`, with ties resolved to the earliest start.
/// A run straddling `n` is truncated at `n` and counted with the truncated
/// length.
pub fn longest_run_up_to(n: u64) -> Result<RunRecord> {
    let mut state = ScanState::new(ScanConfig::up_to(n))?;
    state.run_to_end();
    Ok(state.best())
}

/// `ell(n)`: the length of the longest run inside `[1, n]`.
pub fn ell(n: u64) -> Result<u64> {
    Ok(longest_run_up_to(n)?.length)
}

/// Census of all maximal runs inside `[1, n]`, keyed by run length.
pub fn run_census(n: u64) -> Result<RunCensus> {
    let mut state = ScanState::new(ScanConfig::up_to(n))?;
    state.run_to_end();
    Ok(state.census().clone())
}
