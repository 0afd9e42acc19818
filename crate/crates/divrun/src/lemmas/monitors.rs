//! Trend monitors for the four asymptotic prime-sum estimates. Each
//! reports a residual trajectory on a log-spaced grid; none can fail,
//! since the underlying error terms carry unspecified constants.

use super::{LemmaId, LemmaReport, TrendPoint};
use crate::arith::PrimeTable;
use crate::sieve::Window;
use crate::{Error, Result};

fn domain(table: &PrimeTable, n: u64, min: u64, what: &'static str) -> Result<()> {
    if n < min {
        return Err(Error::OutOfDomain {
            what,
            value: n,
            requirement: if min == 3 { "n >= 3" } else { "n >= 2" },
        });
    }
    if n > table.limit() {
        return Err(Error::OutOfDomain {
            what,
            value: n,
            requirement: "n must not exceed the prime-table limit",
        });
    }
    Ok(())
}

/// `sum 1/p` over primes `p <= n`, for `2 <= n <=` the table limit.
pub fn mertens_sum(table: &PrimeTable, n: u64) -> Result<f64> {
    domain(table, n, 2, "mertens_sum argument")?;
    Ok(table.sum_recip(n))
}

/// Chebyshev `theta(n) = sum ln p` over primes `p <= n`, the logarithm of
/// the primorial of `n`.
pub fn chebyshev_theta(table: &PrimeTable, n: u64) -> Result<f64> {
    domain(table, n, 2, "chebyshev_theta argument")?;
    Ok(table.theta(n))
}

/// `sum 1/ln p` over primes `p <= n`, for `3 <= n <=` the table limit.
pub fn sum_inv_log_p(table: &PrimeTable, n: u64) -> Result<f64> {
    domain(table, n, 3, "sum_inv_log_p argument")?;
    Ok(table.sum_inv_log(n))
}

/// `sum p` over primes `p <= n`, exact in 128-bit arithmetic.
pub fn sum_primes(table: &PrimeTable, n: u64) -> Result<u128> {
    domain(table, n, 2, "sum_primes argument")?;
    Ok(table.sum_primes(n))
}

/// Powers of ten up to `limit`, plus `limit` itself.
fn log_grid(limit: u64) -> Vec<u64> {
    let mut grid = Vec::new();
    let mut p = 10u64;
    while p <= limit {
        grid.push(p);
        match p.checked_mul(10) {
            Some(next) => p = next,
            None => break,
        }
    }
    if grid.last() != Some(&limit) {
        grid.push(limit);
    }
    grid
}

/// Reciprocal prime sum vs `ln ln n`: estimates the Mertens constant as
/// the plateau of the residual, fits a `c / ln n` tolerance band on the
/// low decades, and checks the band on the decades above the fit range.
pub fn mertens_report(table: &PrimeTable) -> LemmaReport {
    const PLATEAU_FROM: u64 = 10_000;
    const FIT_LO: u64 = 1_000;
    const FIT_HI: u64 = 1_000_000;
    let limit = table.limit();
    let mut report = LemmaReport::new(LemmaId::L2, Window::new(2, limit + 1).unwrap());
    let resid: Vec<(u64, f64)> = log_grid(limit)
        .into_iter()
        .map(|n| (n, table.sum_recip(n) - (n as f64).ln().ln()))
        .collect();
    report.trend = resid
        .iter()
        .map(|&(n, value)| TrendPoint { n, value })
        .collect();

    let plateau: Vec<(u64, f64)> = {
        let high: Vec<(u64, f64)> = resid
            .iter()
            .copied()
            .filter(|&(n, _)| n >= PLATEAU_FROM)
            .collect();
        if high.is_empty() {
            vec![*resid.last().unwrap()]
        } else {
            high
        }
    };
    let m_hat = plateau.iter().map(|&(_, r)| r).sum::<f64>() / plateau.len() as f64;
    report.notes.push(format!(
        "Mertens constant estimated as {:.7}, the plateau mean of \
         sum(1/p) - ln ln n over grid points in [{}, {}]",
        m_hat,
        plateau.first().unwrap().0,
        plateau.last().unwrap().0
    ));

    let fit: Vec<(u64, f64)> = resid
        .iter()
        .copied()
        .filter(|&(n, _)| (FIT_LO..=FIT_HI.min(limit)).contains(&n))
        .collect();
    if fit.is_empty() {
        report
            .notes
            .push("table limit below the tolerance fit range; companion check skipped".into());
    } else {
        let c = 2.0
            * fit
                .iter()
                .map(|&(n, r)| (r - m_hat).abs() * (n as f64).ln())
                .fold(0.0, f64::max);
        let test: Vec<(u64, f64)> = resid
            .iter()
            .copied()
            .filter(|&(n, _)| n > FIT_HI)
            .collect();
        let trips: Vec<u64> = test
            .iter()
            .filter(|&&(n, r)| (r - m_hat).abs() > c / (n as f64).ln())
            .map(|&(n, _)| n)
            .collect();
        if test.is_empty() {
            report.notes.push(format!(
                "tolerance c = {c:.6} fitted on [{FIT_LO}, {}]; no grid points beyond \
                 the fit range to test",
                FIT_HI.min(limit)
            ));
        } else if trips.is_empty() {
            report.notes.push(format!(
                "companion check |residual - M| <= {c:.6}/ln n held at all {} grid \
                 points above {FIT_HI}",
                test.len()
            ));
        } else {
            report
                .notes
                .push(format!("companion tolerance exceeded at n in {trips:?}"));
        }
    }
    let last = *resid.last().unwrap();
    report.worst_residual = (last.1 - m_hat).abs();
    report.residual_note = format!(
        "distance of sum(1/p) - ln ln n from the plateau estimate at n = {}",
        last.0
    );
    report.finish()
}

/// `theta(n) / n` vs 1 on the log grid; the deviation should shrink at
/// every decade.
pub fn theta_report(table: &PrimeTable) -> LemmaReport {
    let limit = table.limit();
    let mut report = LemmaReport::new(LemmaId::L3, Window::new(2, limit + 1).unwrap());
    let ratios: Vec<(u64, f64)> = log_grid(limit)
        .into_iter()
        .map(|n| (n, table.theta(n) / n as f64))
        .collect();
    report.trend = ratios
        .iter()
        .map(|&(n, value)| TrendPoint { n, value })
        .collect();
    let monotone = ratios
        .windows(2)
        .all(|w| (w[1].1 - 1.0).abs() <= (w[0].1 - 1.0).abs());
    report.notes.push(format!(
        "|theta(n)/n - 1| non-increasing across the grid: {monotone}"
    ));
    let last = *ratios.last().unwrap();
    report.worst_residual = (last.1 - 1.0).abs();
    report.residual_note = format!("|theta(n)/n - 1| at n = {}", last.0);
    report.finish()
}

/// `sum 1/ln p` against its main term `n / (ln n)^2`, with the stronger
/// `o(n / ln n)` claim monitored as `(sum * ln n) / n` decreasing.
pub fn sum_inv_log_report(table: &PrimeTable) -> LemmaReport {
    let limit = table.limit().max(3);
    let mut report = LemmaReport::new(LemmaId::L4, Window::new(3, limit + 1).unwrap());
    let points: Vec<(u64, f64, f64)> = log_grid(limit)
        .into_iter()
        .map(|n| {
            let sum = table.sum_inv_log(n);
            let ln_n = (n as f64).ln();
            (n, sum * ln_n * ln_n / n as f64, sum * ln_n / n as f64)
        })
        .collect();
    report.trend = points
        .iter()
        .map(|&(n, ratio, _)| TrendPoint { n, value: ratio })
        .collect();
    let shrinking = points.windows(2).all(|w| w[1].2 <= w[0].2);
    report.notes.push(format!(
        "(sum 1/ln p) * ln n / n non-increasing across the grid: {shrinking}"
    ));
    let last = *points.last().unwrap();
    report.worst_residual = (last.1 - 1.0).abs();
    report.residual_note = format!(
        "|ratio - 1| for sum(1/ln p) against n/(ln n)^2 at n = {}",
        last.0
    );
    report.finish()
}

/// `sum p` against its main term `n^2 / (2 ln n)`.
pub fn sum_primes_report(table: &PrimeTable) -> LemmaReport {
    let limit = table.limit();
    let mut report = LemmaReport::new(LemmaId::L5, Window::new(2, limit + 1).unwrap());
    let ratios: Vec<(u64, f64)> = log_grid(limit)
        .into_iter()
        .map(|n| {
            let nf = n as f64;
            (n, table.sum_primes(n) as f64 * 2.0 * nf.ln() / (nf * nf))
        })
        .collect();
    report.trend = ratios
        .iter()
        .map(|&(n, value)| TrendPoint { n, value })
        .collect();
    let last = *ratios.last().unwrap();
    report.worst_residual = (last.1 - 1.0).abs();
    report.residual_note = format!(
        "|ratio - 1| for sum of primes against n^2/(2 ln n) at n = {}",
        last.0
    );
    report.finish()
}
