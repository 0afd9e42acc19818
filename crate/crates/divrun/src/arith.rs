//! Exact scalar arithmetic: factorization, divisor-count functions, prime
//! tables with cumulative sums, primorials, and least common multiples of
//! initial segments.

use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigUint;
use num_traits::One;

use crate::util::isqrt;
use crate::{Error, Result};

/// Simple sieve of Eratosthenes over the odd numbers; returns all primes
/// `<= limit` in ascending order.
pub(crate) fn sieve_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    if limit == 2 {
        return vec![2];
    }
    // Index i represents the odd number 2i + 3.
    let count = ((limit - 3) / 2 + 1) as usize;
    let mut composite = vec![false; count];
    let mut i = 0usize;
    loop {
        let p = 2 * i + 3;
        if p * p > limit as usize {
            break;
        }
        if !composite[i] {
            let mut j = (p * p - 3) / 2;
            while j < count {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let approx = if limit > 16 {
        (limit as f64 / (limit as f64).ln() * 1.2) as usize
    } else {
        8
    };
    let mut primes = Vec::with_capacity(approx);
    primes.push(2);
    for (i, &c) in composite.iter().enumerate() {
        if !c {
            primes.push(2 * i as u64 + 3);
        }
    }
    primes
}

/// Process-wide cache of small primes for trial division. Grows on demand
/// and is shared across threads; reads are lock-free after the first miss.
fn trial_primes(limit: u64) -> Arc<Vec<u64>> {
    static CACHE: OnceLock<RwLock<Arc<Vec<u64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(Arc::new(sieve_primes(1 << 16))));
    {
        let cur = cache.read().unwrap();
        if cur.last().copied().unwrap_or(0) >= limit {
            return Arc::clone(&cur);
        }
    }
    let mut cur = cache.write().unwrap();
    if cur.last().copied().unwrap_or(0) < limit {
        *cur = Arc::new(sieve_primes(limit.next_power_of_two()));
    }
    Arc::clone(&cur)
}

/// A positive integer in factored form: prime/exponent pairs with strictly
/// increasing primes and positive exponents. `1` factors as the empty list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pairs: Vec<(u64, u32)>,
}

impl Factorization {
    /// The `(prime, exponent)` pairs in ascending prime order.
    pub fn pairs(&self) -> &[(u64, u32)] {
        &self.pairs
    }

    /// Reconstructs the factored integer.
    pub fn value(&self) -> u64 {
        self.pairs
            .iter()
            .fold(1u64, |acc, &(p, e)| acc * p.pow(e))
    }

    /// Number of divisors: the product of `exponent + 1` over all pairs.
    pub fn divisor_count(&self) -> u64 {
        self.pairs
            .iter()
            .fold(1u64, |acc, &(_, e)| acc * u64::from(e + 1))
    }

    /// Number of distinct prime factors.
    pub fn omega(&self) -> u64 {
        self.pairs.len() as u64
    }

    /// Number of prime factors counted with multiplicity.
    pub fn big_omega(&self) -> u64 {
        self.pairs.iter().map(|&(_, e)| u64::from(e)).sum()
    }

    /// Exponent of `p` in the factored integer (zero when `p` is absent).
    pub fn exponent_of(&self, p: u64) -> u32 {
        self.pairs
            .binary_search_by_key(&p, |&(q, _)| q)
            .map_or(0, |i| self.pairs[i].1)
    }

    /// Smallest prime factor, or `None` for the empty factorization of 1.
    pub fn min_prime(&self) -> Option<u64> {
        self.pairs.first().map(|&(p, _)| p)
    }
}

/// Factors `n >= 1` by trial division against the shared prime cache.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::ZeroArgument { what: "factorize argument" });
    }
    let mut rest = n;
    let mut pairs = Vec::new();
    let primes = trial_primes(isqrt(n));
    for &p in primes.iter() {
        if p * p > rest {
            break;
        }
        if rest % p == 0 {
            let mut e = 0u32;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            pairs.push((p, e));
        }
    }
    if rest > 1 {
        pairs.push((rest, 1));
    }
    Ok(Factorization { pairs })
}

/// `d(n)`: the number of divisors of `n >= 1`.
pub fn divisor_count(n: u64) -> Result<u64> {
    Ok(factorize(n)?.divisor_count())
}

/// `omega(n)`: the number of distinct prime factors of `n >= 1`.
pub fn omega(n: u64) -> Result<u64> {
    Ok(factorize(n)?.omega())
}

/// `Omega(n)`: prime factors of `n >= 1` counted with multiplicity.
pub fn big_omega(n: u64) -> Result<u64> {
    Ok(factorize(n)?.big_omega())
}

/// `nu(p, n)`: the exponent of the prime `p` in `n >= 1`.
pub fn nu(p: u64, n: u64) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::NotPrime { value: p });
    }
    if n == 0 {
        return Err(Error::ZeroArgument { what: "nu argument" });
    }
    let mut rest = n;
    let mut e = 0u64;
    while rest % p == 0 {
        rest /= p;
        e += 1;
    }
    Ok(e)
}

/// `sum over primes p of (p - 1) * nu(p, n)` for `n >= 1` — the weighted
/// valuation sum that the divisor-count inequalities compare against.
pub fn weighted_valuation_sum(n: u64) -> Result<u64> {
    let f = factorize(n)?;
    Ok(f.pairs()
        .iter()
        .map(|&(p, e)| (p - 1) * u64::from(e))
        .sum())
}

/// Deterministic primality test by trial division (adequate for the 64-bit
/// scalar ranges this crate works in).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let primes = trial_primes(isqrt(n));
    for &p in primes.iter() {
        if p * p > n {
            break;
        }
        if n % p == 0 {
            return n == p;
        }
    }
    true
}

/// All primes up to an inclusive limit, plus cumulative statistics that make
/// the prime-sum queries used by the inequality checkers O(log pi(limit)).
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
    /// Cumulative `sum 1/p` as f64.
    cum_recip: Vec<f64>,
    /// Cumulative `sum 1/ln p` as f64.
    cum_inv_log: Vec<f64>,
    /// Cumulative `sum p`, exact.
    cum_sum: Vec<u128>,
    /// Cumulative `sum ln p` (the Chebyshev theta function at each prime).
    cum_log: Vec<f64>,
}

impl PrimeTable {
    /// Sieves all primes `<= limit`; requires `limit >= 2`.
    pub fn up_to(limit: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::OutOfDomain {
                what: "prime table limit",
                value: limit,
                requirement: "limit >= 2",
            });
        }
        let primes = sieve_primes(limit);
        let mut cum_recip = Vec::with_capacity(primes.len());
        let mut cum_inv_log = Vec::with_capacity(primes.len());
        let mut cum_sum = Vec::with_capacity(primes.len());
        let mut cum_log = Vec::with_capacity(primes.len());
        let (mut r, mut il, mut s, mut lg) = (0.0f64, 0.0f64, 0u128, 0.0f64);
        for &p in &primes {
            let pf = p as f64;
            r += 1.0 / pf;
            il += 1.0 / pf.ln();
            s += u128::from(p);
            lg += pf.ln();
            cum_recip.push(r);
            cum_inv_log.push(il);
            cum_sum.push(s);
            cum_log.push(lg);
        }
        Ok(Self { limit, primes, cum_recip, cum_inv_log, cum_sum, cum_log })
    }

    /// The inclusive sieve limit.
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// The primes themselves, ascending.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Number of primes in the table.
    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Index of the last prime `<= n`, or `None` if `n < 2`.
    fn rank(&self, n: u64) -> Option<usize> {
        assert!(n <= self.limit, "query {n} beyond table limit {}", self.limit);
        match self.primes.binary_search(&n) {
            Ok(i) => Some(i),
            Err(0) => None,
            Err(i) => Some(i - 1),
        }
    }

    /// `pi(n)`: the number of primes `<= n`.
    pub fn pi(&self, n: u64) -> u64 {
        self.rank(n).map_or(0, |i| i as u64 + 1)
    }

    /// Membership test by binary search.
    pub fn contains(&self, n: u64) -> bool {
        assert!(n <= self.limit, "query {n} beyond table limit {}", self.limit);
        self.primes.binary_search(&n).is_ok()
    }

    /// `sum 1/p` over primes `p <= n`.
    pub fn sum_recip(&self, n: u64) -> f64 {
        self.rank(n).map_or(0.0, |i| self.cum_recip[i])
    }

    /// `sum 1/ln p` over primes `p <= n`.
    pub fn sum_inv_log(&self, n: u64) -> f64 {
        self.rank(n).map_or(0.0, |i| self.cum_inv_log[i])
    }

    /// `sum p` over primes `p <= n`, exact.
    pub fn sum_primes(&self, n: u64) -> u128 {
        self.rank(n).map_or(0, |i| self.cum_sum[i])
    }

    /// Chebyshev `theta(n) = sum ln p` over primes `p <= n`.
    pub fn theta(&self, n: u64) -> f64 {
        self.rank(n).map_or(0.0, |i| self.cum_log[i])
    }
}

/// The primorial of `n`: the product of all primes `<= n`. Requires `n >= 2`
/// so the product is nonempty.
pub fn primorial(n: u64) -> Result<BigUint> {
    if n < 2 {
        return Err(Error::OutOfDomain {
            what: "primorial argument",
            value: n,
            requirement: "n >= 2",
        });
    }
    let mut acc = BigUint::one();
    for p in sieve_primes(n) {
        acc *= BigUint::from(p);
    }
    Ok(acc)
}

/// `lcm(1, 2, ..., n)` for `n >= 1`: the product over primes `p <= n` of the
/// largest power of `p` not exceeding `n`.
pub fn lcm_range(n: u64) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::ZeroArgument { what: "lcm_range argument" });
    }
    let mut acc = BigUint::one();
    for p in sieve_primes(n) {
        let mut q = p;
        while let Some(next) = q.checked_mul(p) {
            if next > n {
                break;
            }
            q = next;
        }
        acc *= BigUint::from(q);
    }
    Ok(acc)
}
