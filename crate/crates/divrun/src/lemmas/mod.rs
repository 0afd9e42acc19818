//! Finite-range verification of the inequalities behind the run-length
//! bounds.
//!
//! Nine checks: five are exact pass/fail over explicit ranges (L1, L6, EQ5,
//! EQ8, RUNDIV), four are asymptotic trend monitors that report residual
//! trajectories and never hard-fail (L2–L5). Every violation witness carries
//! enough data to be re-verified with scalar [`crate::arith`] calls.

mod exact;
mod monitors;

use serde::Serialize;

use crate::arith::PrimeTable;
use crate::sieve::Window;
use crate::Result;

pub use exact::{
    check_eq5, check_eq8, check_lemma1, check_lemma6, check_run_divisibility, eq5_report,
    eq8_report, lemma6_report, Eq5Check, Eq8Check, Lemma6Check,
};
pub use monitors::{
    chebyshev_theta, mertens_report, mertens_sum, sum_inv_log_p, sum_inv_log_report,
    sum_primes, sum_primes_report, theta_report,
};

/// Identifiers for the nine checks.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum LemmaId {
    /// `lcm(1..n+1) >= 2^n`, exact big-integer.
    L1,
    /// Prime reciprocal sum vs `log log n` (Mertens), trend monitor.
    L2,
    /// Chebyshev `theta(n) / n -> 1`, trend monitor.
    L3,
    /// `sum 1/log p` vs `n/(log n)^2`, trend monitor.
    L4,
    /// `sum p` vs `n^2/(2 log n)`, trend monitor.
    L5,
    /// `log n / log p_min(n) >= sum (p-1) nu_p(d(n))`, exact.
    L6,
    /// Windowed valuation sum `< log N/log p + k/(p-1)`, randomized exact.
    #[serde(rename = "EQ5")]
    Eq5,
    /// `k >= sum (p-1) nu_p(k+1)`, exact.
    #[serde(rename = "EQ8")]
    Eq8,
    /// `lcm(1..floor(log2 k))` divides the shared divisor count of every
    /// run of length `k`, exact over sieved runs.
    #[serde(rename = "RUNDIV")]
    RunDiv,
}

impl LemmaId {
    pub const ALL: [LemmaId; 9] = [
        LemmaId::L1,
        LemmaId::L2,
        LemmaId::L3,
        LemmaId::L4,
        LemmaId::L5,
        LemmaId::L6,
        LemmaId::Eq5,
        LemmaId::Eq8,
        LemmaId::RunDiv,
    ];

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "L1" => Some(Self::L1),
            "L2" => Some(Self::L2),
            "L3" => Some(Self::L3),
            "L4" => Some(Self::L4),
            "L5" => Some(Self::L5),
            "L6" => Some(Self::L6),
            "EQ5" => Some(Self::Eq5),
            "EQ8" => Some(Self::Eq8),
            "RUNDIV" => Some(Self::RunDiv),
            _ => None,
        }
    }

    /// Exact checks can fail; monitors only report trends.
    pub fn is_exact(&self) -> bool {
        matches!(
            self,
            LemmaId::L1 | LemmaId::L6 | LemmaId::Eq5 | LemmaId::Eq8 | LemmaId::RunDiv
        )
    }
}

impl std::fmt::Display for LemmaId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            LemmaId::L1 => "L1",
            LemmaId::L2 => "L2",
            LemmaId::L3 => "L3",
            LemmaId::L4 => "L4",
            LemmaId::L5 => "L5",
            LemmaId::L6 => "L6",
            LemmaId::Eq5 => "EQ5",
            LemmaId::Eq8 => "EQ8",
            LemmaId::RunDiv => "RUNDIV",
        };
        f.write_str(s)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// A violation witness, re-checkable by scalar arithmetic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    /// The integer (or window start) the violation occurred at.
    pub n: u64,
    pub lhs: f64,
    pub rhs: f64,
    /// Human-readable recomputation recipe.
    pub note: String,
}

/// One point of a monitor trajectory.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct TrendPoint {
    pub n: u64,
    pub value: f64,
}

/// Outcome of one check over one range.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub lemma_id: LemmaId,
    /// Half-open range of arguments covered.
    pub range: Window,
    pub verdict: Verdict,
    /// The tightest margin observed; what it measures is in
    /// `residual_note`.
    pub worst_residual: f64,
    pub residual_note: String,
    /// Violations; empty exactly when the verdict is `pass`.
    pub witnesses: Vec<Witness>,
    /// RNG seed for randomized checks, absent otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Residual trajectory for trend monitors.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trend: Vec<TrendPoint>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl LemmaReport {
    pub(crate) fn new(lemma_id: LemmaId, range: Window) -> Self {
        Self {
            lemma_id,
            range,
            verdict: Verdict::Pass,
            worst_residual: f64::INFINITY,
            residual_note: String::new(),
            witnesses: Vec::new(),
            seed: None,
            trend: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub(crate) fn finish(mut self) -> Self {
        self.verdict = if self.witnesses.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        self
    }
}

/// Range and trial-count knobs for [`run_selected`]. `Default` gives the
/// desk-scale settings.
#[derive(Clone, Copy, Debug)]
pub struct VerifyLimits {
    /// L1: check all `n` up to this.
    pub lemma1_max: u64,
    /// L2–L5: prime-table limit for the monitors.
    pub monitor_max: u64,
    /// L6: check all `n` up to this.
    pub lemma6_max: u64,
    /// EQ5: number of random trials.
    pub eq5_trials: u64,
    /// EQ8: check all `k` up to this.
    pub eq8_max: u64,
    /// RUNDIV: scan domain end.
    pub rundiv_max: u64,
}

impl Default for VerifyLimits {
    fn default() -> Self {
        Self {
            lemma1_max: 2_000,
            monitor_max: 10_000_000,
            lemma6_max: 1_000_000,
            eq5_trials: 10_000,
            eq8_max: 1_000_000,
            rundiv_max: 1_000_000,
        }
    }
}

impl VerifyLimits {
    /// Applies one `--max`-style override to the limit relevant for `id`.
    pub fn with_max(mut self, id: LemmaId, max: u64) -> Self {
        match id {
            LemmaId::L1 => self.lemma1_max = max,
            LemmaId::L2 | LemmaId::L3 | LemmaId::L4 | LemmaId::L5 => self.monitor_max = max,
            LemmaId::L6 => self.lemma6_max = max,
            LemmaId::Eq5 => self.eq5_trials = max,
            LemmaId::Eq8 => self.eq8_max = max,
            LemmaId::RunDiv => self.rundiv_max = max,
        }
        self
    }
}

/// Runs the selected checks (all nine when `selection` is empty), sharing
/// one prime table across the monitors.
pub fn run_selected(
    selection: &[LemmaId],
    limits: &VerifyLimits,
    seed: u64,
) -> Result<Vec<LemmaReport>> {
    let ids: Vec<LemmaId> = if selection.is_empty() {
        LemmaId::ALL.to_vec()
    } else {
        selection.to_vec()
    };
    let needs_table = ids
        .iter()
        .any(|id| matches!(id, LemmaId::L2 | LemmaId::L3 | LemmaId::L4 | LemmaId::L5));
    let table = if needs_table {
        Some(PrimeTable::up_to(limits.monitor_max.max(10))?)
    } else {
        None
    };
    let mut reports = Vec::with_capacity(ids.len());
    for id in ids {
        let report = match id {
            LemmaId::L1 => check_lemma1(limits.lemma1_max)?,
            LemmaId::L2 => mertens_report(table.as_ref().unwrap()),
            LemmaId::L3 => theta_report(table.as_ref().unwrap()),
            LemmaId::L4 => sum_inv_log_report(table.as_ref().unwrap()),
            LemmaId::L5 => sum_primes_report(table.as_ref().unwrap()),
            LemmaId::L6 => lemma6_report(limits.lemma6_max)?,
            LemmaId::Eq5 => eq5_report(limits.eq5_trials, seed)?,
            LemmaId::Eq8 => eq8_report(limits.eq8_max)?,
            LemmaId::RunDiv => check_run_divisibility(limits.rundiv_max)?,
        };
        reports.push(report);
    }
    Ok(reports)
}
