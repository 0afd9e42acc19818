//! Exact Jacobsthal function for squarefree moduli given by their prime
//! support: the least `j` such that any `j` consecutive integers contain
//! one coprime to the modulus.
//!
//! One full period of the modulus is scanned with a stamp sieve (every
//! residue divisible by a support prime is marked) in disjoint segments;
//! per-segment (prefix, best, suffix) stretch summaries merge in ascending
//! order, so results are independent of segmentation. The longest marked
//! stretch has length `j - 1` and its start is the witness gap. A stretch
//! can never wrap the period boundary because residue 1 is coprime.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::arith::{self, sieve_primes};
use crate::sieve::{RunRecord, Window};
use crate::{Error, Result};

/// Default cap on the modulus (the number of residues one period scan
/// visits). Covers every primorial support up to M = 23.
pub const DEFAULT_BUDGET: u64 = 250_000_000;

const SEGMENT: u64 = 1 << 22;

fn serialize_decimal<S: Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// The coprime-gap structure of one squarefree modulus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoprimeGapProfile {
    /// Product of the support primes, printed in decimal.
    #[serde(serialize_with = "serialize_decimal")]
    pub modulus: BigUint,
    /// The distinct primes dividing the modulus, ascending.
    pub prime_support: Vec<u64>,
    /// Least `j` such that any `j` consecutive integers contain one
    /// coprime to the modulus.
    pub j_value: u64,
    /// Start of the earliest run of `j - 1` consecutive integers all
    /// sharing a factor with the modulus.
    pub witness_gap_start: u64,
}

impl CoprimeGapProfile {
    /// The largest support prime; for a primorial support this is `M`.
    pub fn max_prime(&self) -> u64 {
        *self.prime_support.last().unwrap()
    }
}

/// Validates a support list and returns it sorted, along with the modulus
/// when it fits the budget.
fn validate_support(support: &[u64], budget: u64) -> Result<(Vec<u64>, u64)> {
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut sorted = support.to_vec();
    sorted.sort_unstable();
    for pair in sorted.windows(2) {
        if pair[0] == pair[1] {
            return Err(Error::DuplicateSupport { value: pair[0] });
        }
    }
    for &p in &sorted {
        if !arith::is_prime(p) {
            return Err(Error::NotPrime { value: p });
        }
    }
    let mut modulus = 1u128;
    let mut overflow = false;
    for &p in &sorted {
        match modulus.checked_mul(p as u128) {
            Some(m) => modulus = m,
            None => {
                overflow = true;
                break;
            }
        }
    }
    if overflow || modulus > budget as u128 {
        return Err(Error::BudgetExceeded {
            modulus: if overflow { u128::MAX } else { modulus },
            budget,
            max_feasible_m: max_feasible_primorial_support(budget),
        });
    }
    Ok((sorted, modulus as u64))
}

/// The largest `M` whose primorial stays within `budget`.
fn max_feasible_primorial_support(budget: u64) -> u64 {
    let mut product = 1u128;
    let mut best = 0u64;
    for p in sieve_primes(64) {
        product = match product.checked_mul(p as u128) {
            Some(v) if v <= budget as u128 => v,
            _ => break,
        };
        best = p;
    }
    best
}

/// Marked-stretch summary of one scan segment.
struct SegStretch {
    lo: u64,
    len: u64,
    all_marked: bool,
    prefix: u64,
    best_len: u64,
    best_start: u64,
    suffix: u64,
}

fn scan_segment(lo: u64, hi: u64, support: &[u64], marks: &mut Vec<bool>) -> SegStretch {
    let width = (hi - lo) as usize;
    marks.clear();
    marks.resize(width, false);
    for &p in support {
        let first = lo.next_multiple_of(p);
        let mut i = (first - lo) as usize;
        while i < width {
            marks[i] = true;
            i += p as usize;
        }
    }
    let mut seg = SegStretch {
        lo,
        len: hi - lo,
        all_marked: false,
        prefix: 0,
        best_len: 0,
        best_start: 0,
        suffix: 0,
    };
    let mut run_start: Option<usize> = None;
    for i in 0..width {
        if marks[i] {
            if run_start.is_none() {
                run_start = Some(i);
            }
            continue;
        }
        if let Some(s) = run_start.take() {
            let len = (i - s) as u64;
            if s == 0 {
                seg.prefix = len;
            } else if len > seg.best_len {
                seg.best_len = len;
                seg.best_start = lo + s as u64;
            }
        }
    }
    if let Some(s) = run_start {
        if s == 0 {
            seg.all_marked = true;
            seg.prefix = seg.len;
            seg.suffix = seg.len;
        } else {
            seg.suffix = (width - s) as u64;
        }
    }
    seg
}

/// Longest marked stretch over the period `[1, modulus]` and its earliest
/// start.
fn scan_period(modulus: u64, support: &[u64], segment_width: u64) -> (u64, u64) {
    let mut bounds = Vec::new();
    let mut lo = 1u64;
    while lo <= modulus {
        let hi = (lo + segment_width).min(modulus + 1);
        bounds.push((lo, hi));
        lo = hi;
    }
    let summaries: Vec<SegStretch> = bounds
        .par_iter()
        .map_init(Vec::new, |marks, &(lo, hi)| {
            scan_segment(lo, hi, support, marks)
        })
        .collect();
    let mut best = (0u64, 0u64);
    let mut consider = |len: u64, start: u64| {
        if len > best.0 {
            best = (len, start);
        }
    };
    let mut tail = 0u64;
    for seg in &summaries {
        if seg.all_marked {
            tail += seg.len;
            continue;
        }
        consider(tail + seg.prefix, seg.lo - tail);
        if seg.best_len > 0 {
            consider(seg.best_len, seg.best_start);
        }
        tail = seg.suffix;
    }
    consider(tail, modulus + 1 - tail);
    best
}

/// Jacobsthal profile of the product of `prime_support`, scanning at most
/// `budget` residues.
pub fn jacobsthal_budgeted(prime_support: &[u64], budget: u64) -> Result<CoprimeGapProfile> {
    let (support, modulus) = validate_support(prime_support, budget)?;
    let (gap, start) = scan_period(modulus, &support, SEGMENT);
    Ok(CoprimeGapProfile {
        modulus: BigUint::from(modulus),
        prime_support: support,
        j_value: gap + 1,
        witness_gap_start: start,
    })
}

/// [`jacobsthal_budgeted`] under the default budget.
pub fn jacobsthal_exact(prime_support: &[u64]) -> Result<CoprimeGapProfile> {
    jacobsthal_budgeted(prime_support, DEFAULT_BUDGET)
}

/// Jacobsthal profile of the primorial `M#`, i.e. support = primes `<= M`.
pub fn jacobsthal_primorial_budgeted(m: u64, budget: u64) -> Result<CoprimeGapProfile> {
    jacobsthal_budgeted(&sieve_primes(m), budget)
}

/// [`jacobsthal_primorial_budgeted`] under the default budget.
pub fn jacobsthal_primorial(m: u64) -> Result<CoprimeGapProfile> {
    jacobsthal_primorial_budgeted(m, DEFAULT_BUDGET)
}

/// Least element of `window` coprime to `M#` — equivalently, with smallest
/// prime factor exceeding `M` — or `None` when every element shares a
/// factor with it.
pub fn coprime_witness(window: Window, m: u64) -> Option<u64> {
    let primes = sieve_primes(m);
    (window.lo()..window.hi()).find(|&n| primes.iter().all(|&p| n % p != 0))
}

/// Re-derives a profile's claims from scratch: the modulus is the product
/// of the support, every window of `j_value` consecutive integers in
/// `[1, modulus + j_value]` contains a coprime element, and the witness
/// gap of `j_value - 1` integers contains none.
pub fn verify_profile(profile: &CoprimeGapProfile) -> Result<()> {
    let fail = |why: String| Err(Error::InvalidParams(why));
    let product: BigUint = profile
        .prime_support
        .iter()
        .map(|&p| BigUint::from(p))
        .product();
    if profile.prime_support.is_empty() || product != profile.modulus {
        return fail("modulus is not the product of the prime support".into());
    }
    let Some(modulus) = profile.modulus.to_u64() else {
        return fail("modulus too large to verify by direct scan".into());
    };
    let j = profile.j_value;
    let coprime = |n: u64| profile.prime_support.iter().all(|&p| n % p != 0);

    let (w, top) = (profile.witness_gap_start, modulus + j);
    if w < 1 || w + j - 2 > top {
        return fail(format!("witness gap [{w}, {}] leaves [1, {top}]", w + j - 2));
    }
    if let Some(n) = (w..w + j - 1).find(|&n| coprime(n)) {
        return fail(format!("witness gap contains the coprime element {n}"));
    }

    let mut last_coprime = 0u64;
    for n in 1..=top {
        if coprime(n) {
            if n - last_coprime > j {
                return fail(format!(
                    "no coprime element in the {j}-window starting at {}",
                    last_coprime + 1
                ));
            }
            last_coprime = n;
        }
    }
    if top - last_coprime >= j {
        return fail(format!("no coprime element in the final {j}-window"));
    }
    Ok(())
}

/// Exact `(M, j(M#))` table over prime `M`, regenerated rather than
/// shipped as data.
#[derive(Clone, Debug, Serialize)]
pub struct JacobsthalTable {
    rows: Vec<CoprimeGapProfile>,
    /// True when the budget cut the table short of the requested top.
    truncated: bool,
    budget: u64,
}

/// Outcome of a table lookup.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MLookup {
    pub m: u64,
    /// True when `m` is the table's top entry, so a larger support might
    /// also qualify.
    pub table_limited: bool,
}

impl JacobsthalTable {
    pub fn rows(&self) -> &[CoprimeGapProfile] {
        &self.rows
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// The largest tabulated `M` with `j(M#) <= k`, for `k >= 2`.
    pub fn largest_m_with_j_at_most(&self, k: u64) -> Result<MLookup> {
        if k < 2 {
            return Err(Error::OutOfDomain {
                what: "k",
                value: k,
                requirement: "k >= 2, the smallest Jacobsthal value",
            });
        }
        let idx = self
            .rows
            .iter()
            .rposition(|row| row.j_value <= k)
            .expect("j(2#) = 2 <= k");
        Ok(MLookup {
            m: self.rows[idx].max_prime(),
            table_limited: idx + 1 == self.rows.len(),
        })
    }
}

/// Builds the `(M, j(M#))` table for prime `M <= max_m`. When the budget
/// cannot cover `max_m` the table is truncated at the largest feasible
/// support if `truncate` is set, and errors otherwise.
pub fn primorial_table(max_m: u64, budget: u64, truncate: bool) -> Result<JacobsthalTable> {
    if max_m < 2 {
        return Err(Error::OutOfDomain {
            what: "max_m",
            value: max_m,
            requirement: "max_m >= 2",
        });
    }
    let primes = sieve_primes(max_m);
    let mut rows = Vec::with_capacity(primes.len());
    let mut truncated = false;
    let mut product = 1u128;
    for (i, &p) in primes.iter().enumerate() {
        product = product.saturating_mul(p as u128);
        if product > budget as u128 {
            if !truncate {
                return Err(Error::BudgetExceeded {
                    modulus: product,
                    budget,
                    max_feasible_m: max_feasible_primorial_support(budget),
                });
            }
            truncated = true;
            break;
        }
        rows.push(jacobsthal_budgeted(&primes[..=i], budget)?);
    }
    Ok(JacobsthalTable {
        rows,
        truncated,
        budget,
    })
}

/// Outcome of the run-to-witness pipeline over a batch of sieved runs.
#[derive(Clone, Debug, Default, Serialize)]
pub struct PipelineReport {
    /// Runs of length at least 4 examined.
    pub checked: u64,
    /// Run starts whose window held no coprime witness, or whose witness
    /// had a smallest prime factor within the support.
    pub witness_misses: Vec<u64>,
    /// Witness integers failing the divisor-count valuation bound.
    pub lemma6_failures: Vec<u64>,
    /// `(run start, prime)` pairs where a prime `<= log2(k)` fails to
    /// divide the run's shared divisor count.
    pub divisibility_findings: Vec<(u64, u64)>,
}

impl PipelineReport {
    /// No misses and no valuation-bound failures. Divisibility findings
    /// are reported separately and do not affect this.
    pub fn sound(&self) -> bool {
        self.witness_misses.is_empty() && self.lemma6_failures.is_empty()
    }
}

/// For each maximal run of length `k >= 4`, picks `M` with `j(M#) <= k`
/// from the table, locates the guaranteed coprime witness inside the run,
/// and checks the two exact links of the lower-bound pipeline: the
/// valuation bound at the witness, and that every prime `<= log2(k)`
/// divides the shared divisor count.
pub fn pipeline_check(runs: &[RunRecord], table: &JacobsthalTable) -> Result<PipelineReport> {
    let mut report = PipelineReport::default();
    for run in runs.iter().filter(|r| r.length >= 4) {
        report.checked += 1;
        let lookup = table.largest_m_with_j_at_most(run.length)?;
        let window = Window::new(run.start, run.start + run.length)?;
        let Some(w) = coprime_witness(window, lookup.m) else {
            report.witness_misses.push(run.start);
            continue;
        };
        let check = crate::lemmas::check_lemma6(w)?;
        if arith::factorize(w)?.min_prime().unwrap() <= lookup.m {
            report.witness_misses.push(run.start);
        }
        if !check.pass {
            report.lemma6_failures.push(w);
        }
        for p in sieve_primes(run.length.ilog2() as u64) {
            if run.divisor_count % p != 0 {
                report.divisibility_findings.push((run.start, p));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;
    use proptest::prelude::*;

    fn profile(support: &[u64]) -> (u64, u64) {
        let p = jacobsthal_exact(support).unwrap();
        (p.j_value, p.witness_gap_start)
    }

    #[test]
    fn support_validation() {
        assert!(matches!(jacobsthal_exact(&[]), Err(Error::EmptySupport)));
        assert!(matches!(
            jacobsthal_exact(&[3, 2, 3]),
            Err(Error::DuplicateSupport { value: 3 })
        ));
        assert!(matches!(
            jacobsthal_exact(&[2, 9]),
            Err(Error::NotPrime { value: 9 })
        ));
    }

    #[test]
    fn small_supports_match_direct_scans() {
        assert_eq!(profile(&[2]), (2, 2));
        assert_eq!(profile(&[2, 3]), (4, 2));
        assert_eq!(profile(&[2, 3, 5]), (6, 2));
        assert_eq!(profile(&[2, 3, 5, 7]), (10, 2));
        // Order of the support does not matter.
        assert_eq!(profile(&[7, 3, 5, 2]), (10, 2));
        assert_eq!(profile(&[3, 5]), (3, 5));
        assert_eq!(profile(&[2, 7]), (4, 6));
        assert_eq!(profile(&[5, 7, 11]), (4, 20));
        // A lone prime always has j = 2, witnessed at the prime itself.
        assert_eq!(profile(&[1_000_003]), (2, 1_000_003));
    }

    #[test]
    fn primorial_profiles() {
        let p = jacobsthal_primorial(2).unwrap();
        assert_eq!((p.j_value, p.witness_gap_start), (2, 2));
        assert_eq!(p.prime_support, vec![2]);

        let p = jacobsthal_primorial(5).unwrap();
        assert_eq!((p.j_value, p.witness_gap_start), (6, 2));
        assert_eq!(p.modulus, BigUint::from(30u32));

        let p = jacobsthal_primorial(11).unwrap();
        assert_eq!((p.j_value, p.witness_gap_start), (14, 114));
        assert_eq!(p.max_prime(), 11);

        let p = jacobsthal_primorial(13).unwrap();
        assert_eq!((p.j_value, p.witness_gap_start), (22, 9_440));
    }

    #[test]
    fn budget_capacity_errors_name_the_feasible_support() {
        let err = jacobsthal_primorial_budgeted(29, DEFAULT_BUDGET).unwrap_err();
        match err {
            Error::BudgetExceeded {
                modulus,
                budget,
                max_feasible_m,
            } => {
                assert_eq!(modulus, 6_469_693_230);
                assert_eq!(budget, DEFAULT_BUDGET);
                assert_eq!(max_feasible_m, 23);
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(jacobsthal_budgeted(&[2, 3, 5], 29).is_err());
        assert!(jacobsthal_budgeted(&[2, 3, 5], 30).is_ok());
    }

    #[test]
    fn segment_width_does_not_affect_the_scan() {
        let support = [2, 3, 5, 7, 11];
        let modulus = 2_310;
        let reference = scan_period(modulus, &support, SEGMENT);
        for width in [1, 2, 3, 7, 64, 100, 2_309, 2_310, 5_000] {
            assert_eq!(
                scan_period(modulus, &support, width),
                reference,
                "segment width {width}"
            );
        }
        assert_eq!(reference, (13, 114));
    }

    proptest! {
        #[test]
        fn period_scan_matches_gcd_oracle(mask in 1u8..63, width in 1u64..400) {
            let all = [2u64, 3, 5, 7, 11, 13];
            let support: Vec<u64> = all
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &p)| p)
                .collect();
            let modulus: u64 = support.iter().product();
            let (len, start) = scan_period(modulus, &support, width);
            let mut best = (0u64, 0u64);
            let mut run = 0u64;
            for n in 1..=modulus {
                if n.gcd(&modulus) != 1 {
                    run += 1;
                    if run > best.0 {
                        best = (run, n + 1 - run);
                    }
                } else {
                    run = 0;
                }
            }
            prop_assert_eq!((len, start), best);
        }

        #[test]
        fn coprimality_to_a_primorial_is_a_min_prime_test(n in 2u64..1_000_000, m in 2u64..50) {
            let coprime = coprime_witness(Window::new(n, n + 1).unwrap(), m).is_some();
            let spf = arith::factorize(n).unwrap().min_prime().unwrap();
            prop_assert_eq!(coprime, spf > m);
        }
    }

    #[test]
    fn witness_lookup_examples() {
        assert_eq!(coprime_witness(Window::new(2, 5).unwrap(), 2), Some(3));
        assert_eq!(coprime_witness(Window::new(114, 127).unwrap(), 5), Some(119));
        // Inside the recorded witness gap of 7# there is no coprime element.
        let p = jacobsthal_primorial(7).unwrap();
        let gap = Window::new(p.witness_gap_start, p.witness_gap_start + p.j_value - 1).unwrap();
        assert_eq!(coprime_witness(gap, 7), None);
    }

    #[test]
    fn computed_profiles_survive_direct_verification() {
        for m in [2, 3, 5, 7, 11] {
            let p = jacobsthal_primorial(m).unwrap();
            verify_profile(&p).unwrap();
        }
        let mut tampered = jacobsthal_primorial(5).unwrap();
        tampered.j_value += 1;
        assert!(verify_profile(&tampered).is_err());
        let mut tampered = jacobsthal_primorial(5).unwrap();
        tampered.witness_gap_start = 3;
        assert!(verify_profile(&tampered).is_err());
        let mut tampered = jacobsthal_primorial(5).unwrap();
        tampered.prime_support = vec![2, 3];
        assert!(verify_profile(&tampered).is_err());
    }

    #[test]
    fn table_growth_and_lookup() {
        let table = primorial_table(19, DEFAULT_BUDGET, false).unwrap();
        let js: Vec<u64> = table.rows().iter().map(|r| r.j_value).collect();
        assert_eq!(js, vec![2, 4, 6, 10, 14, 22, 26, 34]);
        assert!(js.windows(2).all(|w| w[0] <= w[1]));
        assert!(!table.truncated());

        let lk = |k| table.largest_m_with_j_at_most(k).unwrap();
        assert_eq!(lk(2), MLookup { m: 2, table_limited: false });
        assert_eq!(lk(6), MLookup { m: 5, table_limited: false });
        assert_eq!(lk(13), MLookup { m: 7, table_limited: false });
        assert_eq!(lk(14), MLookup { m: 11, table_limited: false });
        assert_eq!(lk(100), MLookup { m: 19, table_limited: true });
        assert!(table.largest_m_with_j_at_most(1).is_err());
    }

    #[test]
    fn table_truncation_modes() {
        let table = primorial_table(13, 3_000, true).unwrap();
        assert!(table.truncated());
        assert_eq!(table.rows().last().unwrap().max_prime(), 11);
        assert!(matches!(
            primorial_table(13, 3_000, false),
            Err(Error::BudgetExceeded { max_feasible_m: 11, .. })
        ));
    }

    #[test]
    fn pipeline_over_sieved_runs() {
        let config = crate::sieve::ScanConfig {
            collect_runs_at_least: Some(4),
            ..crate::sieve::ScanConfig::up_to(200_000)
        };
        let mut state = crate::sieve::ScanState::new(config).unwrap();
        state.run_to_end();
        let runs = state.long_runs().to_vec();
        assert!(runs.iter().any(|r| r.length == 7));

        let table = primorial_table(19, DEFAULT_BUDGET, false).unwrap();
        let report = pipeline_check(&runs, &table).unwrap();
        assert_eq!(report.checked, runs.len() as u64);
        assert!(report.sound());
        assert!(report.divisibility_findings.is_empty());
    }
}
