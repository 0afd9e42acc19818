//! Analytic upper-bound shapes for the longest-run statistic, and their
//! comparison against sieved values.
//!
//! Three bound shapes are evaluated, all in natural logarithms:
//!
//! * `bound_theorem1`: `exp(C * sqrt(log N * log log N))`
//! * `bound_explicit`: `exp(sqrt((1/2 + eps) * log N * log log N))`
//! * `bound_theorem2`: `exp(C * cbrt(log N * log log N))`
//!
//! plus the auxiliary quantity `f_of_k` and the slack of the inequality
//! `log N >= f * log(k * f) - f` that the square-root argument pivots on.

use serde::Serialize;

use crate::sieve::EllRow;
use crate::util::fnv1a64;
use crate::{Error, Result};

/// Relative guard band for integer-vs-float `<=` comparisons: a bound is
/// counted as satisfied when `ell <= value * (1 + RELATIVE_GUARD)`.
pub const RELATIVE_GUARD: f64 = 1e-12;

/// Tuning constants for the bound evaluators.
///
/// Defaults: `c1 = 1.1` (empirically, `sum of 1/p over p <= k` stays below
/// `log log k + 1.1` from `k = 5` on), `c2 = 1.1` (`log(log2 N + 1) <=
/// 1.1 * log log N` from `N = 1000` on), `c = 1.3`, and `eps = 0`. Both
/// empirical margins are themselves checked by the [`crate::lemmas`] battery.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundParams {
    /// Leading constant of the square-root and cube-root shapes.
    pub c: f64,
    /// Multiplier on `log log k` in `f_of_k`.
    pub c1: f64,
    /// Divisor constant on `log log N` in `f_of_k`.
    pub c2: f64,
    /// Slack added to the 1/2 coefficient of `bound_explicit`.
    pub eps: f64,
}

impl Default for BoundParams {
    fn default() -> Self {
        Self { c: 1.3, c1: 1.1, c2: 1.1, eps: 0.0 }
    }
}

impl BoundParams {
    /// Validated constructor: `c`, `c1`, `c2` strictly positive and finite,
    /// `eps` nonnegative and finite.
    pub fn new(c: f64, c1: f64, c2: f64, eps: f64) -> Result<Self> {
        let params = Self { c, c1, c2, eps };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("C", self.c), ("C1", self.c1), ("C2", self.c2)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        if !self.eps.is_finite() || self.eps < 0.0 {
            return Err(Error::InvalidParams(format!(
                "eps must be finite and nonnegative, got {}",
                self.eps
            )));
        }
        Ok(())
    }

    /// Whether `c` exceeds both `sqrt(c2)` and `c1 * c2` — the regime in
    /// which a run longer than the square-root bound forces the slack of
    /// `eq3_gap` negative, which is what makes the bound binding.
    pub fn c_dominates(&self) -> bool {
        self.c > self.c2.sqrt().max(self.c1 * self.c2)
    }

    /// Fingerprint of the exact parameter bit patterns, for report rows.
    pub fn digest(&self) -> u64 {
        let canon = format!(
            "bounds c={:016x} c1={:016x} c2={:016x} eps={:016x}",
            self.c.to_bits(),
            self.c1.to_bits(),
            self.c2.to_bits(),
            self.eps.to_bits()
        );
        fnv1a64(canon.as_bytes())
    }

    pub fn digest_hex(&self) -> String {
        format!("{:016x}", self.digest())
    }
}

fn check_n(n: u64) -> Result<f64> {
    if n < 16 {
        return Err(Error::OutOfDomain {
            what: "bound argument N",
            value: n,
            requirement: "N >= 16",
        });
    }
    Ok(n as f64)
}

/// `f(k) = log(k/4) / (C2 * log log N) - C1 * log log k` for real arguments
/// with `k > 4` and `N > e`.
pub fn f_of_k_real(k: f64, n: f64, params: &BoundParams) -> Result<f64> {
    params.validate()?;
    if !k.is_finite() || k <= 4.0 {
        return Err(Error::InvalidParams(format!(
            "f_of_k needs k > 4, got {k}"
        )));
    }
    if !n.is_finite() || n <= std::f64::consts::E {
        return Err(Error::InvalidParams(format!(
            "f_of_k needs N > e so that log log N is positive, got {n}"
        )));
    }
    Ok((k / 4.0).ln() / (params.c2 * n.ln().ln()) - params.c1 * k.ln().ln())
}

/// `f(k)` for integer arguments; requires `k >= 5` and `N >= 16`.
pub fn f_of_k(k: u64, n: u64, params: &BoundParams) -> Result<f64> {
    if k < 5 {
        return Err(Error::OutOfDomain {
            what: "run length k",
            value: k,
            requirement: "k >= 5 (log(k/4) degenerates at k = 4)",
        });
    }
    let nf = check_n(n)?;
    f_of_k_real(k as f64, nf, params)
}

/// Slack of the pivot inequality `log N >= f * log(k * f) - f`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct Eq3Gap {
    /// `log N - (f * log(k * f) - f)`; negative means the inequality fails,
    /// so no run of length `k` can end by `N`.
    pub gap: f64,
    /// The `f(k)` value the gap was computed from.
    pub f_value: f64,
    /// Set when `f(k) <= 0`: the right-hand side is not evaluable and the
    /// inequality holds vacuously. The gap is then reported as
    /// `log N + |f(k)|`.
    pub vacuous: bool,
}

/// Evaluates the pivot inequality for real arguments (`k > 4`, `N > e`).
pub fn eq3_gap_real(k: f64, n: f64, params: &BoundParams) -> Result<Eq3Gap> {
    let f = f_of_k_real(k, n, params)?;
    let log_n = n.ln();
    if f <= 0.0 {
        return Ok(Eq3Gap { gap: log_n + f.abs(), f_value: f, vacuous: true });
    }
    let rhs = f * (k * f).ln() - f;
    Ok(Eq3Gap { gap: log_n - rhs, f_value: f, vacuous: false })
}

/// Evaluates the pivot inequality for integer arguments (`k >= 5`, `N >= 16`).
pub fn eq3_gap(k: u64, n: u64, params: &BoundParams) -> Result<Eq3Gap> {
    if k < 5 {
        return Err(Error::OutOfDomain {
            what: "run length k",
            value: k,
            requirement: "k >= 5 (log(k/4) degenerates at k = 4)",
        });
    }
    let nf = check_n(n)?;
    eq3_gap_real(k as f64, nf, params)
}

/// `exp(C * sqrt(log N * log log N))` for real `N > e`.
pub fn bound_theorem1_real(n: f64, params: &BoundParams) -> Result<f64> {
    params.validate()?;
    if !n.is_finite() || n <= std::f64::consts::E {
        return Err(Error::InvalidParams(format!(
            "bound argument must exceed e, got {n}"
        )));
    }
    Ok((params.c * (n.ln() * n.ln().ln()).sqrt()).exp())
}

/// `exp(C * sqrt(log N * log log N))`; requires `N >= 16`.
pub fn bound_theorem1(n: u64, params: &BoundParams) -> Result<f64> {
    bound_theorem1_real(check_n(n)?, params)
}

/// `exp(sqrt((1/2 + eps) * log N * log log N))` for real `N > e`.
pub fn bound_explicit_real(n: f64, eps: f64) -> Result<f64> {
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::InvalidParams(format!(
            "eps must be finite and nonnegative, got {eps}"
        )));
    }
    if !n.is_finite() || n <= std::f64::consts::E {
        return Err(Error::InvalidParams(format!(
            "bound argument must exceed e, got {n}"
        )));
    }
    Ok(((0.5 + eps) * n.ln() * n.ln().ln()).sqrt().exp())
}

/// `exp(sqrt((1/2 + eps) * log N * log log N))`; requires `N >= 16`.
pub fn bound_explicit(n: u64, eps: f64) -> Result<f64> {
    bound_explicit_real(check_n(n)?, eps)
}

/// `exp(C * cbrt(log N * log log N))` for real `N > e`.
pub fn bound_theorem2_real(n: f64, params: &BoundParams) -> Result<f64> {
    params.validate()?;
    if !n.is_finite() || n <= std::f64::consts::E {
        return Err(Error::InvalidParams(format!(
            "bound argument must exceed e, got {n}"
        )));
    }
    Ok((params.c * (n.ln() * n.ln().ln()).cbrt()).exp())
}

/// `exp(C * cbrt(log N * log log N))`; requires `N >= 16`.
pub fn bound_theorem2(n: u64, params: &BoundParams) -> Result<f64> {
    bound_theorem2_real(check_n(n)?, params)
}

/// One sieved value next to the three bound values.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct BoundComparison {
    pub n: u64,
    /// The sieved longest-run length at `n`.
    pub ell: u64,
    pub theorem1: f64,
    pub explicit: f64,
    pub theorem2: f64,
    pub theorem1_satisfied: bool,
    pub explicit_satisfied: bool,
    pub theorem2_satisfied: bool,
}

fn within(ell: u64, bound: f64) -> bool {
    (ell as f64) <= bound * (1.0 + RELATIVE_GUARD)
}

/// Joins a known `ell` value to the three bounds; requires `n >= 16`.
pub fn evaluate(n: u64, ell: u64, params: &BoundParams) -> Result<BoundComparison> {
    let theorem1 = bound_theorem1(n, params)?;
    let explicit = bound_explicit(n, params.eps)?;
    let theorem2 = bound_theorem2(n, params)?;
    Ok(BoundComparison {
        n,
        ell,
        theorem1,
        explicit,
        theorem2,
        theorem1_satisfied: within(ell, theorem1),
        explicit_satisfied: within(ell, explicit),
        theorem2_satisfied: within(ell, theorem2),
    })
}

/// Sieves `[1, n]` and compares the resulting `ell(n)` to the bounds.
pub fn compare(n: u64, params: &BoundParams) -> Result<BoundComparison> {
    let ell = crate::sieve::ell(n)?;
    evaluate(n, ell, params)
}

/// Evaluates every milestone row of a finished scan.
pub fn compare_rows(rows: &[EllRow], params: &BoundParams) -> Result<Vec<BoundComparison>> {
    rows.iter().map(|r| evaluate(r.n, r.ell(), params)).collect()
}
