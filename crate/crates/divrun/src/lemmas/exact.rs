//! The exact checks: big-integer lcm growth, the divisor-count valuation
//! inequalities, windowed prime-valuation sums, and run divisibility.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{LemmaId, LemmaReport, Witness};
use crate::arith::{self, weighted_valuation_sum, PrimeTable};
use crate::sieve::scan::fill_divisor_counts;
use crate::sieve::{ScanConfig, ScanState, Window};
use crate::util::isqrt;
use crate::{Error, Result};

/// `log2 x` for a positive big integer, from its top 53 bits.
fn big_log2(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 53 {
        return (x.to_u64().unwrap() as f64).log2();
    }
    let shift = bits - 53;
    let top = (x >> shift).to_u64().unwrap() as f64;
    top.log2() + shift as f64
}

/// Half-open `[lo, hi)` split into `[lo, lo+width)` pieces.
fn segments(lo: u64, hi: u64, width: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut cur = lo;
    while cur < hi {
        let end = hi.min(cur + width);
        out.push((cur, end));
        cur = end;
    }
    out
}

const SEGMENT: u64 = 1 << 20;

/// Verifies `lcm(1, 2, ..., n+1) >= 2^n` for every `1 <= n <= n_max` by
/// exact big-integer comparison, growing the lcm one prime power at a time.
pub fn check_lemma1(n_max: u64) -> Result<LemmaReport> {
    if n_max == 0 {
        return Err(Error::ZeroArgument { what: "n_max" });
    }
    let mut report = LemmaReport::new(LemmaId::L1, Window::new(1, n_max + 1)?);
    let mut lcm = BigUint::from(2u32);
    let mut min_log2 = f64::INFINITY;
    let mut min_at = 0u64;
    for n in 1..=n_max {
        if n >= 2 {
            // lcm(1..=m) gains a factor of p exactly when m = n + 1 is a
            // power of the prime p.
            let f = arith::factorize(n + 1)?;
            if f.pairs().len() == 1 {
                lcm *= BigUint::from(f.pairs()[0].0);
            }
        }
        let ratio_log2 = big_log2(&lcm) - n as f64;
        if ratio_log2 < min_log2 {
            min_log2 = ratio_log2;
            min_at = n;
        }
        if lcm < (BigUint::one() << n) {
            report.witnesses.push(Witness {
                n,
                lhs: ratio_log2.exp2(),
                rhs: 1.0,
                note: format!("lcm(1..={}) / 2^{} < 1", n + 1, n),
            });
        }
    }
    report.worst_residual = min_log2.exp2();
    report.residual_note = format!(
        "min of lcm(1..n+1) / 2^n over 1 <= n <= {}, attained at n = {}",
        n_max, min_at
    );
    Ok(report.finish())
}

/// The divisor-count valuation bound at a single point.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct Lemma6Check {
    pub n: u64,
    /// `ln n / ln p_min(n)`.
    pub lhs: f64,
    /// `sum (p-1) * nu_p(d(n))` over the factorization of `d(n)`.
    pub rhs: u64,
    pub pass: bool,
    /// True when `n = p_min^rhs` exactly, the equality case.
    pub exact_equality: bool,
}

/// `lhs >= rhs` is equivalent to `n >= p_min^rhs`, which is decided in
/// exact integer arithmetic; a power that overflows `u128` certainly
/// exceeds `n`.
fn lemma6_decide(n: u64, p_min: u64, rhs: u64) -> (bool, bool) {
    let exp = match u32::try_from(rhs) {
        Ok(e) => e,
        Err(_) => return (false, false),
    };
    match (p_min as u128).checked_pow(exp) {
        Some(power) => ((n as u128) >= power, (n as u128) == power),
        None => (false, false),
    }
}

fn lemma6_margin(n: u64, p_min: u64, rhs: u64, exact_equality: bool) -> f64 {
    if exact_equality {
        return 0.0;
    }
    (n as f64).ln() / (p_min as f64).ln() - rhs as f64
}

/// Checks `ln n / ln p_min(n) >= sum (p-1) nu_p(d(n))` at one `n >= 2`.
pub fn check_lemma6(n: u64) -> Result<Lemma6Check> {
    if n < 2 {
        return Err(Error::OutOfDomain {
            what: "n",
            value: n,
            requirement: "n >= 2, so a smallest prime divisor exists",
        });
    }
    let f = arith::factorize(n)?;
    let p_min = f.min_prime().unwrap();
    let rhs = weighted_valuation_sum(f.divisor_count())?;
    let (pass, exact_equality) = lemma6_decide(n, p_min, rhs);
    Ok(Lemma6Check {
        n,
        lhs: (n as f64).ln() / (p_min as f64).ln(),
        rhs,
        pass,
        exact_equality,
    })
}

struct Lemma6Part {
    witnesses: Vec<Witness>,
    equality_count: u64,
    nonconforming: Vec<u64>,
    min_margin: f64,
    min_at: u64,
}

/// Batch form of [`check_lemma6`] over `2 <= n <= max`, sieving divisor
/// counts and smallest prime factors segment by segment. Equality cases are
/// tallied and probed for the prime-power shape `p^(q-1)` with `q = d(n)`
/// prime.
pub fn lemma6_report(max: u64) -> Result<LemmaReport> {
    if max < 2 {
        return Err(Error::OutOfDomain {
            what: "max",
            value: max,
            requirement: "max >= 2",
        });
    }
    let range = Window::new(2, max + 1)?;
    let primes = arith::sieve_primes(isqrt(max));
    let parts: Vec<Lemma6Part> = segments(2, max + 1, SEGMENT)
        .par_iter()
        .map_init(
            || {
                (
                    Vec::new(),
                    Vec::new(),
                    Vec::new(),
                    HashMap::<u64, u64>::new(),
                )
            },
            |(cof, dc, spf, memo), &(lo, hi)| {
                fill_divisor_counts(lo, hi, &primes, cof, dc);
                let width = (hi - lo) as usize;
                let top = hi - 1;
                spf.clear();
                spf.resize(width, 0u64);
                for &p in &primes {
                    if p.saturating_mul(p) > top {
                        break;
                    }
                    let first = lo.next_multiple_of(p);
                    let mut i = (first - lo) as usize;
                    while i < width {
                        if spf[i] == 0 {
                            spf[i] = p;
                        }
                        i += p as usize;
                    }
                }
                let mut part = Lemma6Part {
                    witnesses: Vec::new(),
                    equality_count: 0,
                    nonconforming: Vec::new(),
                    min_margin: f64::INFINITY,
                    min_at: 0,
                };
                for i in 0..width {
                    let n = lo + i as u64;
                    let d = dc[i] as u64;
                    let p_min = if spf[i] == 0 { n } else { spf[i] };
                    let rhs = *memo
                        .entry(d)
                        .or_insert_with(|| weighted_valuation_sum(d).unwrap());
                    let (pass, exact_equality) = lemma6_decide(n, p_min, rhs);
                    let margin = lemma6_margin(n, p_min, rhs, exact_equality);
                    if margin < part.min_margin {
                        part.min_margin = margin;
                        part.min_at = n;
                    }
                    if exact_equality {
                        part.equality_count += 1;
                        if !arith::is_prime(d) {
                            part.nonconforming.push(n);
                        }
                    }
                    if !pass {
                        part.witnesses.push(Witness {
                            n,
                            lhs: (n as f64).ln() / (p_min as f64).ln(),
                            rhs: rhs as f64,
                            note: format!(
                                "ln {n} / ln {p_min} < {rhs} = \
                                 sum (p-1) nu_p(d) with d(n) = {d}"
                            ),
                        });
                    }
                }
                part
            },
        )
        .collect();
    let mut report = LemmaReport::new(LemmaId::L6, range);
    let mut equality_count = 0u64;
    let mut nonconforming = Vec::new();
    let mut min_margin = f64::INFINITY;
    let mut min_at = 0u64;
    for part in parts {
        report.witnesses.extend(part.witnesses);
        equality_count += part.equality_count;
        nonconforming.extend(part.nonconforming);
        if part.min_margin < min_margin {
            min_margin = part.min_margin;
            min_at = part.min_at;
        }
    }
    report.worst_residual = min_margin;
    report.residual_note = format!(
        "min of lhs - rhs over 2 <= n <= {}, attained at n = {} \
         (0 at every equality case, e.g. every prime)",
        max, min_at
    );
    report.notes.push(format!(
        "{equality_count} equality cases; every one has the shape \
         p_min^(q-1) with q = d(n), and q was prime for all of them: {}",
        nonconforming.is_empty()
    ));
    if !nonconforming.is_empty() {
        nonconforming.truncate(32);
        report
            .notes
            .push(format!("equality cases with composite d(n): {nonconforming:?}"));
    }
    Ok(report.finish())
}

/// The integer inequality `k >= sum (p-1) nu_p(k+1)` at one `k >= 1`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct Eq8Check {
    pub k: u64,
    pub lhs: u64,
    pub rhs: u64,
    pub pass: bool,
}

/// Checks `k >= sum (p-1) nu_p(k+1)` by factorizing `k + 1`.
pub fn check_eq8(k: u64) -> Result<Eq8Check> {
    if k == 0 {
        return Err(Error::ZeroArgument { what: "k" });
    }
    let rhs = weighted_valuation_sum(k + 1)?;
    Ok(Eq8Check {
        k,
        lhs: k,
        rhs,
        pass: k >= rhs,
    })
}

/// Weighted valuation sums for `[lo, hi)` by stride marking: each level
/// `p^t` adds `p - 1` at its multiples, and a surviving cofactor is a prime
/// with valuation 1.
fn fill_weighted_valuations(lo: u64, hi: u64, primes: &[u64], cof: &mut Vec<u64>, w: &mut Vec<u64>) {
    debug_assert!(lo >= 1 && lo < hi);
    let width = (hi - lo) as usize;
    cof.clear();
    cof.extend(lo..hi);
    w.clear();
    w.resize(width, 0);
    let top = hi - 1;
    for &p in primes {
        if p.saturating_mul(p) > top {
            break;
        }
        let mut q = p;
        loop {
            let first = lo.next_multiple_of(q);
            if first > top {
                break;
            }
            let mut i = (first - lo) as usize;
            while i < width {
                cof[i] /= p;
                w[i] += p - 1;
                i += q as usize;
            }
            match q.checked_mul(p) {
                Some(next) if next <= top => q = next,
                _ => break,
            }
        }
    }
    for i in 0..width {
        if cof[i] > 1 {
            w[i] += cof[i] - 1;
        }
    }
}

struct Eq8Part {
    witnesses: Vec<Witness>,
    min_margin: i64,
    min_at: u64,
}

/// Batch form of [`check_eq8`] over `1 <= k <= max` via a weighted
/// valuation sieve on `k + 1`.
pub fn eq8_report(max: u64) -> Result<LemmaReport> {
    if max == 0 {
        return Err(Error::ZeroArgument { what: "max" });
    }
    let range = Window::new(1, max + 1)?;
    let primes = arith::sieve_primes(isqrt(max + 1));
    let parts: Vec<Eq8Part> = segments(2, max + 2, SEGMENT)
        .par_iter()
        .map_init(
            || (Vec::new(), Vec::new()),
            |(cof, w), &(lo, hi)| {
                fill_weighted_valuations(lo, hi, &primes, cof, w);
                let mut part = Eq8Part {
                    witnesses: Vec::new(),
                    min_margin: i64::MAX,
                    min_at: 0,
                };
                for (i, &rhs) in w.iter().enumerate() {
                    let k = lo + i as u64 - 1;
                    let margin = k as i64 - rhs as i64;
                    if margin < part.min_margin {
                        part.min_margin = margin;
                        part.min_at = k;
                    }
                    if k < rhs {
                        part.witnesses.push(Witness {
                            n: k,
                            lhs: k as f64,
                            rhs: rhs as f64,
                            note: format!("k = {k} < sum (p-1) nu_p({})", k + 1),
                        });
                    }
                }
                part
            },
        )
        .collect();
    let mut report = LemmaReport::new(LemmaId::Eq8, range);
    let mut min_margin = i64::MAX;
    let mut min_at = 0u64;
    for part in parts {
        report.witnesses.extend(part.witnesses);
        if part.min_margin < min_margin {
            min_margin = part.min_margin;
            min_at = part.min_at;
        }
    }
    report.worst_residual = min_margin as f64;
    report.residual_note = format!(
        "min of k - sum (p-1) nu_p(k+1) over 1 <= k <= {}, attained at k = {}",
        max, min_at
    );
    Ok(report.finish())
}

/// The windowed valuation-sum bound at one `(p, window, N)` triple.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct Eq5Check {
    pub p: u64,
    pub window: Window,
    /// The global bound `N` the window lives under.
    pub n_max: u64,
    /// Exact `sum nu_p(m)` over the window.
    pub lhs: u64,
    /// `ln N / ln p + k / (p - 1)` for `k` the window width.
    pub rhs: f64,
    pub pass: bool,
}

/// Checks `sum_{m in window} nu_p(m) < ln N / ln p + k/(p-1)` with the sum
/// computed exactly from floor differences.
pub fn check_eq5(p: u64, window: Window, n_max: u64) -> Result<Eq5Check> {
    if !arith::is_prime(p) {
        return Err(Error::NotPrime { value: p });
    }
    if window.hi() - 1 > n_max {
        return Err(Error::OutOfDomain {
            what: "window.hi - 1",
            value: window.hi() - 1,
            requirement: "window must lie within [1, N]",
        });
    }
    let top = window.hi() - 1;
    let mut lhs = 0u64;
    let mut q = p;
    loop {
        lhs += top / q - (window.lo() - 1) / q;
        match q.checked_mul(p) {
            Some(next) if next <= top => q = next,
            _ => break,
        }
    }
    let k = window.width();
    let rhs = (n_max as f64).ln() / (p as f64).ln() + k as f64 / (p - 1) as f64;
    Ok(Eq5Check {
        p,
        window,
        n_max,
        lhs,
        rhs,
        pass: (lhs as f64) < rhs,
    })
}

/// Randomized batch of [`check_eq5`]: `trials` samples of `N` up to `10^9`,
/// window widths up to `10^4`, and `p` uniform over the primes not
/// exceeding the width. The seed is recorded in the report.
pub fn eq5_report(trials: u64, seed: u64) -> Result<LemmaReport> {
    const N_LO: u64 = 100;
    const N_HI: u64 = 1_000_000_000;
    const K_HI: u64 = 10_000;
    if trials == 0 {
        return Err(Error::ZeroArgument { what: "trials" });
    }
    let mut report = LemmaReport::new(LemmaId::Eq5, Window::new(1, N_HI + 1)?);
    report.seed = Some(seed);
    let pool = PrimeTable::up_to(K_HI)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_margin = f64::INFINITY;
    let mut min_at: Option<Eq5Check> = None;
    for _ in 0..trials {
        let n_max = rng.random_range(N_LO..=N_HI);
        let k = rng.random_range(2..=K_HI.min(n_max));
        let lo = rng.random_range(1..=n_max - k + 1);
        let candidates = pool.pi(k) as usize;
        let p = pool.primes()[rng.random_range(0..candidates)];
        let check = check_eq5(p, Window::new(lo, lo + k)?, n_max)?;
        let margin = check.rhs - check.lhs as f64;
        if margin < min_margin {
            min_margin = margin;
            min_at = Some(check);
        }
        if !check.pass {
            report.witnesses.push(Witness {
                n: lo,
                lhs: check.lhs as f64,
                rhs: check.rhs,
                note: format!(
                    "sum nu_{p} over [{lo}, {}) not below ln {n_max}/ln {p} + {k}/{}",
                    lo + k,
                    p - 1
                ),
            });
        }
    }
    report.worst_residual = min_margin;
    let at = min_at.unwrap();
    report.residual_note = format!(
        "min of rhs - lhs over {} trials, attained at p = {}, window [{}, {}), N = {}",
        trials,
        at.p,
        at.window.lo(),
        at.window.hi(),
        at.n_max
    );
    report.notes.push(format!(
        "N uniform in [{N_LO}, {N_HI}], width uniform in [2, min({K_HI}, N)], \
         start uniform in [1, N - width + 1], p uniform over primes <= width"
    ));
    Ok(report.finish())
}

/// Verifies that every maximal run of length `k >= 2` in `[1, N]` has its
/// shared divisor count divisible by `lcm(1, ..., floor(log2 k))`, by a
/// full scan.
pub fn check_run_divisibility(n: u64) -> Result<LemmaReport> {
    let mut state = ScanState::new(ScanConfig::up_to(n))?;
    state.run_to_end();
    let mut report = LemmaReport::new(LemmaId::RunDiv, Window::new(1, n + 1)?);
    for run in state.rundiv_violations() {
        let cap = run.length.ilog2() as u64;
        let lcm = arith::lcm_range(cap.max(1))?;
        report.witnesses.push(Witness {
            n: run.start,
            lhs: run.divisor_count as f64,
            rhs: big_log2(&lcm).exp2(),
            note: format!(
                "run ({}, {}, D = {}): lcm(1..={cap}) does not divide D",
                run.start, run.length, run.divisor_count
            ),
        });
    }
    report.worst_residual = 0.0;
    report.residual_note = "divisibility is exact; residual fixed at 0".into();
    report.notes.push(format!(
        "{} runs of length >= 2 checked across {} maximal runs",
        state.rundiv_checked(),
        state.runs_closed()
    ));
    Ok(report.finish())
}
