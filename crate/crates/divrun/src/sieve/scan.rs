//! Scan engine: per-segment sieving, segment summaries, and the sequential
//! fold that aggregates them.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::{RunRecord, SieveCheckpoint, DEFAULT_SEGMENT_WIDTH, MAX_WINDOW_WIDTH};
use crate::util::{fnv1a64, isqrt};
use crate::{Error, Result};

/// Fills `dc` with divisor counts for `[lo, hi)`.
///
/// `cof[i]` starts at `lo + i` and is divided down as prime factors are
/// stripped; whatever remains above 1 at the end is a single prime factor
/// larger than `sqrt(hi - 1)`. For each prime power `p^t <= hi - 1` the
/// stride over its multiples divides the cofactor by `p` once and reweights
/// the divisor count from `t` to `t + 1`, so after all passes `dc[i]` holds
/// the product of `exponent + 1` over the small primes; the final pass
/// doubles it where a large prime factor remains.
pub(crate) fn fill_divisor_counts(
    lo: u64,
    hi: u64,
    primes: &[u64],
    cof: &mut Vec<u64>,
    dc: &mut Vec<u32>,
) {
    debug_assert!(lo >= 1 && lo < hi);
    let width = (hi - lo) as usize;
    cof.clear();
    cof.extend(lo..hi);
    dc.clear();
    dc.resize(width, 1);
    let top = hi - 1;
    for &p in primes {
        if p.saturating_mul(p) > top {
            break;
        }
        // t = 1: double the divisor count at every multiple of p.
        let first = lo.next_multiple_of(p);
        let mut i = (first - lo) as usize;
        while i < width {
            cof[i] /= p;
            dc[i] *= 2;
            i += p as usize;
        }
        // t >= 2: at multiples of p^t, reweight the p-contribution
        // from t to t + 1.
        let mut q = p;
        let mut t = 1u32;
        while q <= top / p {
            q *= p;
            t += 1;
            let first = lo.next_multiple_of(q);
            if first > top {
                break;
            }
            let mut i = (first - lo) as usize;
            while i < width {
                cof[i] /= p;
                dc[i] = dc[i] / t * (t + 1);
                i += q as usize;
            }
        }
    }
    for i in 0..width {
        if cof[i] > 1 {
            dc[i] *= 2;
        }
    }
}

/// One entry of the run-length census.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CensusEntry {
    /// Start of the earliest run of this length.
    pub first_start: u64,
    /// Divisor count of that earliest run.
    pub first_divisor_count: u64,
    /// How many maximal runs of this length were seen.
    pub count: u64,
}

/// Census of maximal runs keyed by run length.
pub type RunCensus = BTreeMap<u64, CensusEntry>;

/// Scan configuration. Equal configurations produce identical results and
/// interchangeable checkpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanConfig {
    /// First integer of the scan domain (usually 1).
    pub lo: u64,
    /// Last integer of the scan domain, inclusive.
    pub n: u64,
    /// Sieve segment width; results do not depend on it.
    pub segment_width: u64,
    /// When set, every maximal run at least this long is recorded.
    pub collect_runs_at_least: Option<u64>,
}

impl ScanConfig {
    /// Scan `[1, n]` with the default segment width.
    pub fn up_to(n: u64) -> Self {
        Self {
            lo: 1,
            n,
            segment_width: DEFAULT_SEGMENT_WIDTH,
            collect_runs_at_least: None,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.lo < 1 {
            return Err(Error::ZeroArgument { what: "scan domain start" });
        }
        if self.n < self.lo {
            return Err(Error::InvalidWindow { lo: self.lo, hi: self.n });
        }
        if self.segment_width < 1 {
            return Err(Error::ZeroArgument { what: "segment width" });
        }
        if self.segment_width > MAX_WINDOW_WIDTH {
            return Err(Error::WindowTooWide {
                width: self.segment_width,
                limit: MAX_WINDOW_WIDTH,
            });
        }
        if let Some(min) = self.collect_runs_at_least {
            if min == 0 {
                return Err(Error::ZeroArgument { what: "run collection threshold" });
            }
        }
        Ok(())
    }

    /// Fingerprint used to pair checkpoints with configurations.
    pub fn digest(&self) -> u64 {
        let canon = format!(
            "scan lo={} n={} width={} collect={:?}",
            self.lo, self.n, self.segment_width, self.collect_runs_at_least
        );
        fnv1a64(canon.as_bytes())
    }
}

/// A milestone row: the longest-run record after scanning `[lo, n]`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EllRow {
    /// Inclusive prefix end this row summarizes.
    pub n: u64,
    /// The longest run within the prefix (earliest on ties).
    pub run: RunRecord,
}

impl EllRow {
    /// The statistic itself: length of the longest run.
    pub fn ell(&self) -> u64 {
        self.run.length
    }
}

const SMALL_CENSUS: usize = 64;

/// What one sieved segment contributes to the fold, independent of every
/// other segment.
struct SegSummary {
    lo: u64,
    hi: u64,
    /// Whole segment shares one divisor count.
    all_same: bool,
    first_d: u64,
    prefix_len: u64,
    last_d: u64,
    suffix_len: u64,
    /// Longest interior run (length 0 when none closed inside).
    best: RunRecord,
    census_small: Box<[CensusEntry; SMALL_CENSUS]>,
    census_overflow: Vec<(u64, CensusEntry)>,
    runs_closed: u64,
    rundiv_checked: u64,
    rundiv_violations: Vec<RunRecord>,
    long_runs: Vec<RunRecord>,
}

impl SegSummary {
    fn new(lo: u64, hi: u64, first_d: u64, last_d: u64) -> Self {
        Self {
            lo,
            hi,
            all_same: false,
            first_d,
            prefix_len: 0,
            last_d,
            suffix_len: 0,
            best: RunRecord::default(),
            census_small: Box::new([CensusEntry::default(); SMALL_CENSUS]),
            census_overflow: Vec::new(),
            runs_closed: 0,
            rundiv_checked: 0,
            rundiv_violations: Vec::new(),
            long_runs: Vec::new(),
        }
    }

    fn close_interior(&mut self, run: RunRecord, collect_min: Option<u64>) {
        self.runs_closed += 1;
        let slot = if (run.length as usize) < SMALL_CENSUS {
            &mut self.census_small[run.length as usize]
        } else {
            match self.census_overflow.binary_search_by_key(&run.length, |e| e.0) {
                Ok(i) => &mut self.census_overflow[i].1,
                Err(i) => {
                    self.census_overflow.insert(i, (run.length, CensusEntry::default()));
                    &mut self.census_overflow[i].1
                }
            }
        };
        if slot.count == 0 {
            slot.first_start = run.start;
            slot.first_divisor_count = run.divisor_count;
        }
        slot.count += 1;
        if run.length > self.best.length {
            self.best = run;
        }
        if run.length >= 2 {
            self.rundiv_checked += 1;
            if !rundiv_ok(run) {
                self.rundiv_violations.push(run);
            }
        }
        if collect_min.is_some_and(|min| run.length >= min) {
            self.long_runs.push(run);
        }
    }

    fn census_entries(&self) -> impl Iterator<Item = (u64, CensusEntry)> + '_ {
        self.census_small
            .iter()
            .enumerate()
            .filter(|(_, e)| e.count > 0)
            .map(|(len, &e)| (len as u64, e))
            .chain(self.census_overflow.iter().copied())
    }
}

/// Every run of length `k` with shared divisor count `D` must have `D`
/// divisible by `lcm(1, ..., floor(log2 k))`: among any `k` consecutive
/// integers one is divisible by `2^i` but not `2^(i+1)` for each `i` up to
/// `floor(log2 k) - 1`, forcing `i + 1` to divide `D`.
fn rundiv_ok(run: RunRecord) -> bool {
    let k = run.length.ilog2() as u64;
    if k < 2 {
        return true;
    }
    let l = (2..=k).fold(1u64, num_integer::lcm);
    run.divisor_count % l == 0
}

/// Sieves one segment and reduces it to its summary.
fn scan_segment(
    lo: u64,
    hi: u64,
    primes: &[u64],
    collect_min: Option<u64>,
    cof: &mut Vec<u64>,
    dc: &mut Vec<u32>,
) -> SegSummary {
    fill_divisor_counts(lo, hi, primes, cof, dc);
    let width = (hi - lo) as usize;
    let mut s = SegSummary::new(lo, hi, u64::from(dc[0]), u64::from(dc[width - 1]));
    let mut run_start = 0usize;
    for i in 1..width {
        if dc[i] != dc[i - 1] {
            if run_start == 0 {
                s.prefix_len = i as u64;
            } else {
                s.close_interior(
                    RunRecord {
                        start: lo + run_start as u64,
                        length: (i - run_start) as u64,
                        divisor_count: u64::from(dc[i - 1]),
                    },
                    collect_min,
                );
            }
            run_start = i;
        }
    }
    if run_start == 0 {
        s.all_same = true;
        s.prefix_len = width as u64;
        s.suffix_len = width as u64;
    } else {
        s.suffix_len = (width - run_start) as u64;
    }
    s
}

/// Incremental scan over `[config.lo, config.n]`.
///
/// Between [`step`](Self::step) calls the state sits at a segment boundary,
/// where [`checkpoint`](Self::checkpoint) captures everything needed to
/// resume. Results are identical regardless of how the scan is stepped,
/// batched, or interrupted.
pub struct ScanState {
    config: ScanConfig,
    primes: Arc<Vec<u64>>,
    milestones: Vec<u64>,
    milestone_idx: usize,
    next_lo: u64,
    best: RunRecord,
    carry_d: u64,
    carry_len: u64,
    carry_start: u64,
    census: RunCensus,
    rows: Vec<EllRow>,
    runs_closed: u64,
    rundiv_checked: u64,
    rundiv_violations: Vec<RunRecord>,
    long_runs: Vec<RunRecord>,
}

impl ScanState {
    pub fn new(config: ScanConfig) -> Result<Self> {
        config.validate()?;
        let primes = Arc::new(crate::arith::sieve_primes(isqrt(config.n)));
        let milestones = milestones(config.lo, config.n);
        Ok(Self {
            next_lo: config.lo,
            config,
            primes,
            milestones,
            milestone_idx: 0,
            best: RunRecord::default(),
            carry_d: 0,
            carry_len: 0,
            carry_start: 0,
            census: RunCensus::new(),
            rows: Vec::new(),
            runs_closed: 0,
            rundiv_checked: 0,
            rundiv_violations: Vec::new(),
            long_runs: Vec::new(),
        })
    }

    /// Rebuilds a state from a checkpoint taken under the same configuration.
    pub fn resume(checkpoint: SieveCheckpoint, config: ScanConfig) -> Result<Self> {
        let expected = config.digest();
        if checkpoint.config_digest != expected {
            return Err(Error::CheckpointMismatch {
                expected,
                found: checkpoint.config_digest,
            });
        }
        let mut state = Self::new(config)?;
        if checkpoint.next_lo < state.config.lo
            || checkpoint.next_lo > state.config.n + 1
            || checkpoint.carry_length > checkpoint.next_lo.saturating_sub(state.config.lo)
        {
            return Err(Error::CheckpointFormat(format!(
                "checkpoint position {} is outside the scan domain",
                checkpoint.next_lo
            )));
        }
        state.next_lo = checkpoint.next_lo;
        state.milestone_idx = state
            .milestones
            .partition_point(|&m| m < checkpoint.next_lo);
        state.best = checkpoint.best;
        state.carry_d = checkpoint.carry_value;
        state.carry_len = checkpoint.carry_length;
        state.carry_start = checkpoint.next_lo - checkpoint.carry_length;
        state.census = checkpoint.census.iter().copied().collect();
        state.rows = checkpoint.rows.clone();
        state.runs_closed = checkpoint.runs_closed;
        state.rundiv_checked = checkpoint.rundiv_checked;
        state.rundiv_violations = checkpoint.rundiv_violations.clone();
        state.long_runs = checkpoint.long_runs.clone();
        Ok(state)
    }

    /// Captures the state at the current segment boundary.
    pub fn checkpoint(&self) -> SieveCheckpoint {
        SieveCheckpoint {
            config_digest: self.config.digest(),
            next_lo: self.next_lo,
            best: self.best,
            carry_value: self.carry_d,
            carry_length: self.carry_len,
            rows: self.rows.clone(),
            census: self.census.iter().map(|(&l, &e)| (l, e)).collect(),
            runs_closed: self.runs_closed,
            rundiv_checked: self.rundiv_checked,
            rundiv_violations: self.rundiv_violations.clone(),
            long_runs: self.long_runs.clone(),
        }
    }

    pub fn config(&self) -> &ScanConfig {
        &self.config
    }

    pub fn is_done(&self) -> bool {
        self.next_lo > self.config.n
    }

    /// First integer of the next unscanned segment.
    pub fn position(&self) -> u64 {
        self.next_lo
    }

    /// Longest run seen so far (earliest on ties). Length 0 until the first
    /// segment folds.
    pub fn best(&self) -> RunRecord {
        if self.carry_len > self.best.length {
            RunRecord {
                start: self.carry_start,
                length: self.carry_len,
                divisor_count: self.carry_d,
            }
        } else {
            self.best
        }
    }

    /// Milestone rows recorded so far (prefix ends at powers of ten and at
    /// `n` itself).
    pub fn rows(&self) -> &[EllRow] {
        &self.rows
    }

    pub fn census(&self) -> &RunCensus {
        &self.census
    }

    /// Total maximal runs closed so far.
    pub fn runs_closed(&self) -> u64 {
        self.runs_closed
    }

    /// Runs of length >= 2 whose divisor value was divisibility-checked.
    pub fn rundiv_checked(&self) -> u64 {
        self.rundiv_checked
    }

    pub fn rundiv_violations(&self) -> &[RunRecord] {
        &self.rundiv_violations
    }

    /// Runs collected under `collect_runs_at_least`.
    pub fn long_runs(&self) -> &[RunRecord] {
        &self.long_runs
    }

    fn boundary_after(&self, lo: u64, milestone_idx: usize) -> u64 {
        let mut hi = lo
            .saturating_add(self.config.segment_width)
            .min(self.config.n + 1);
        if let Some(&m) = self.milestones.get(milestone_idx) {
            hi = hi.min(m + 1);
        }
        hi
    }

    /// Sieves and folds the next segment. Returns `false` once the scan is
    /// complete.
    pub fn step(&mut self) -> bool {
        if self.is_done() {
            return false;
        }
        let lo = self.next_lo;
        let hi = self.boundary_after(lo, self.milestone_idx);
        let mut cof = Vec::new();
        let mut dc = Vec::new();
        let summary = scan_segment(
            lo,
            hi,
            &self.primes,
            self.config.collect_runs_at_least,
            &mut cof,
            &mut dc,
        );
        self.fold_summary(summary);
        !self.is_done()
    }

    /// Sieves up to `max_segments` segments on the rayon pool and folds them
    /// in order. Returns `false` once the scan is complete.
    pub fn step_batch(&mut self, max_segments: usize) -> bool {
        if self.is_done() {
            return false;
        }
        let mut plan = Vec::with_capacity(max_segments);
        let mut lo = self.next_lo;
        let mut idx = self.milestone_idx;
        while plan.len() < max_segments && lo <= self.config.n {
            let hi = self.boundary_after(lo, idx);
            plan.push((lo, hi));
            if self.milestones.get(idx) == Some(&(hi - 1)) {
                idx += 1;
            }
            lo = hi;
        }
        let primes = Arc::clone(&self.primes);
        let collect_min = self.config.collect_runs_at_least;
        let summaries: Vec<SegSummary> = plan
            .par_iter()
            .map_init(
                || (Vec::new(), Vec::new()),
                |(cof, dc), &(lo, hi)| scan_segment(lo, hi, &primes, collect_min, cof, dc),
            )
            .collect();
        for s in summaries {
            self.fold_summary(s);
        }
        !self.is_done()
    }

    /// Runs the scan to completion, batching segments across the rayon pool.
    pub fn run_to_end(&mut self) {
        let batch = rayon::current_num_threads().max(1) * 4;
        while self.step_batch(batch) {}
    }

    fn fold_summary(&mut self, s: SegSummary) {
        debug_assert_eq!(s.lo, self.next_lo, "segments must fold in order");
        if s.all_same {
            if self.carry_len > 0 && self.carry_d == s.first_d {
                self.carry_len += s.hi - s.lo;
            } else {
                self.close_carry();
                self.carry_d = s.first_d;
                self.carry_len = s.hi - s.lo;
                self.carry_start = s.lo;
            }
        } else {
            if self.carry_len > 0 && self.carry_d == s.first_d {
                let joined = RunRecord {
                    start: self.carry_start,
                    length: self.carry_len + s.prefix_len,
                    divisor_count: self.carry_d,
                };
                self.carry_len = 0;
                self.close_run(joined);
            } else {
                self.close_carry();
                self.close_run(RunRecord {
                    start: s.lo,
                    length: s.prefix_len,
                    divisor_count: s.first_d,
                });
            }
            for (length, entry) in s.census_entries() {
                let slot = self.census.entry(length).or_default();
                if slot.count == 0 {
                    slot.first_start = entry.first_start;
                    slot.first_divisor_count = entry.first_divisor_count;
                }
                slot.count += entry.count;
            }
            if s.best.length > self.best.length {
                self.best = s.best;
            }
            self.runs_closed += s.runs_closed;
            self.rundiv_checked += s.rundiv_checked;
            self.rundiv_violations.extend(s.rundiv_violations);
            self.long_runs.extend(s.long_runs);
            self.carry_d = s.last_d;
            self.carry_len = s.suffix_len;
            self.carry_start = s.hi - s.suffix_len;
        }
        self.next_lo = s.hi;
        if self.next_lo > self.config.n {
            self.close_carry();
        }
        if self.milestones.get(self.milestone_idx) == Some(&(s.hi - 1)) {
            self.rows.push(EllRow { n: s.hi - 1, run: self.best() });
            self.milestone_idx += 1;
        }
    }

    fn close_carry(&mut self) {
        if self.carry_len > 0 {
            let run = RunRecord {
                start: self.carry_start,
                length: self.carry_len,
                divisor_count: self.carry_d,
            };
            self.carry_len = 0;
            self.close_run(run);
        }
    }

    fn close_run(&mut self, run: RunRecord) {
        debug_assert!(run.length > 0);
        self.runs_closed += 1;
        let slot = self.census.entry(run.length).or_default();
        if slot.count == 0 {
            slot.first_start = run.start;
            slot.first_divisor_count = run.divisor_count;
        }
        slot.count += 1;
        if run.length > self.best.length {
            self.best = run;
        }
        if run.length >= 2 {
            self.rundiv_checked += 1;
            if !rundiv_ok(run) {
                self.rundiv_violations.push(run);
            }
        }
        if self
            .config
            .collect_runs_at_least
            .is_some_and(|min| run.length >= min)
        {
            self.long_runs.push(run);
        }
    }
}

/// Prefix ends at which the scan records a milestone row: every power of ten
/// from 100 up, clamped to the domain, plus the domain end itself.
fn milestones(lo: u64, n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut m = 100u64;
    while m <= n {
        if m >= lo {
            out.push(m);
        }
        match m.checked_mul(10) {
            Some(next) => m = next,
            None => break,
        }
    }
    if out.last().copied() != Some(n) {
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn milestones_cover_domain_end() {
        assert_eq!(milestones(1, 50), vec![50]);
        assert_eq!(milestones(1, 100), vec![100]);
        assert_eq!(milestones(1, 1000), vec![100, 1000]);
        assert_eq!(milestones(1, 2500), vec![100, 1000, 2500]);
        assert_eq!(milestones(500, 2500), vec![1000, 2500]);
        assert_eq!(milestones(1, 10_u64.pow(6)), vec![100, 1000, 10_000, 100_000, 1_000_000]);
    }

    #[test]
    fn scan_results_do_not_depend_on_segment_width() {
        let reference = {
            let mut st = ScanState::new(ScanConfig {
                segment_width: 4096,
                ..ScanConfig::up_to(3000)
            })
            .unwrap();
            st.run_to_end();
            st
        };
        for width in [1u64, 2, 3, 7, 64, 100, 101, 999, 3000] {
            let mut st = ScanState::new(ScanConfig {
                segment_width: width,
                ..ScanConfig::up_to(3000)
            })
            .unwrap();
            st.run_to_end();
            assert_eq!(st.best(), reference.best(), "width = {width}");
            assert_eq!(st.rows(), reference.rows(), "width = {width}");
            assert_eq!(st.census(), reference.census(), "width = {width}");
            assert_eq!(st.runs_closed(), reference.runs_closed(), "width = {width}");
            assert_eq!(st.rundiv_checked(), reference.rundiv_checked(), "width = {width}");
        }
    }

    #[test]
    fn batched_and_single_stepping_agree() {
        let mut single = ScanState::new(ScanConfig {
            segment_width: 109,
            ..ScanConfig::up_to(5000)
        })
        .unwrap();
        while single.step() {}
        for batch in [1usize, 2, 3, 17] {
            let mut st = ScanState::new(ScanConfig {
                segment_width: 109,
                ..ScanConfig::up_to(5000)
            })
            .unwrap();
            while st.step_batch(batch) {}
            assert_eq!(st.best(), single.best());
            assert_eq!(st.rows(), single.rows());
            assert_eq!(st.census(), single.census());
        }
    }

    #[test]
    fn milestone_rows_match_fresh_scans() {
        let mut st = ScanState::new(ScanConfig::up_to(20_000)).unwrap();
        st.run_to_end();
        let rows = st.rows().to_vec();
        assert_eq!(rows.len(), 4); // 100, 1000, 10000, 20000
        for row in rows {
            assert_eq!(row.run, super::super::longest_run_up_to(row.n).unwrap());
        }
    }

    #[test]
    fn long_run_collection_matches_census() {
        let mut st = ScanState::new(ScanConfig {
            collect_runs_at_least: Some(3),
            segment_width: 997,
            ..ScanConfig::up_to(50_000)
        })
        .unwrap();
        st.run_to_end();
        let expected: u64 = st
            .census()
            .iter()
            .filter(|(&len, _)| len >= 3)
            .map(|(_, e)| e.count)
            .sum();
        assert_eq!(st.long_runs().len() as u64, expected);
        let firsts = st.census()[&3];
        assert_eq!(
            st.long_runs().iter().find(|r| r.length == 3).copied().unwrap(),
            RunRecord {
                start: firsts.first_start,
                length: 3,
                divisor_count: firsts.first_divisor_count
            }
        );
        // Collected runs arrive in ascending start order.
        for pair in st.long_runs().windows(2) {
            assert!(pair[0].start < pair[1].start);
        }
    }

    #[test]
    fn rundiv_holds_over_small_domain() {
        let mut st = ScanState::new(ScanConfig::up_to(200_000)).unwrap();
        st.run_to_end();
        assert!(st.rundiv_checked() > 0);
        assert_eq!(st.rundiv_violations(), &[]);
    }

    #[test]
    fn window_scan_away_from_origin() {
        let mut st = ScanState::new(ScanConfig {
            lo: 171_000,
            n: 172_000,
            segment_width: 128,
            collect_runs_at_least: None,
        })
        .unwrap();
        st.run_to_end();
        let b = st.best();
        assert_eq!(
            b,
            RunRecord { start: 171_893, length: 7, divisor_count: 8 }
        );
    }
}
