//! Report rendering: CSV and JSON emitters with a shared metadata header,
//! plus atomic file output.
//!
//! Every report embeds the tool version, the full command and
//! configuration, the seed where one was used, the wall clock, and the
//! relevant configuration digest. Comment lines start with `#`; the CSV
//! body (header plus rows) is byte-identical across runs with equal
//! configurations, and [`stable_text`] additionally strips the two
//! wall-clock lines so whole reports can be compared.

use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::bounds::BoundComparison;
use crate::jacobsthal::JacobsthalTable;
use crate::lemmas::LemmaReport;
use crate::sieve::{EllRow, RunCensus, RunRecord};
use crate::Result;

/// Provenance block shared by every report.
#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub tool_version: String,
    /// The invocation being reported, e.g. `scan --n 1e6`.
    pub command: String,
    /// Full configuration echo.
    pub config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub generated_utc: String,
    pub elapsed_seconds: f64,
    /// Digest of the configuration that determines the body (scan config
    /// or bound parameters).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_digest: Option<String>,
}

impl Meta {
    pub fn new(command: impl Into<String>, config: serde_json::Value) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.into(),
            config,
            seed: None,
            generated_utc: chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ").to_string(),
            elapsed_seconds: 0.0,
            config_digest: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_digest(mut self, digest: impl Into<String>) -> Self {
        self.config_digest = Some(digest.into());
        self
    }

    pub fn with_elapsed(mut self, seconds: f64) -> Self {
        self.elapsed_seconds = seconds;
        self
    }

    fn comment_block(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# tool_version={}\n", self.tool_version));
        out.push_str(&format!("# command={}\n", self.command));
        out.push_str(&format!("# config={}\n", self.config));
        if let Some(seed) = self.seed {
            out.push_str(&format!("# seed={seed}\n"));
        }
        out.push_str(&format!("# generated_utc={}\n", self.generated_utc));
        out.push_str(&format!("# elapsed_seconds={}\n", self.elapsed_seconds));
        if let Some(digest) = &self.config_digest {
            out.push_str(&format!("# config_digest={digest}\n"));
        }
        out
    }
}

/// The report with its wall-clock lines removed: what remains is fully
/// determined by the configuration, so equal configurations give equal
/// stable text.
pub fn stable_text(report: &str) -> String {
    report
        .lines()
        .filter(|l| !l.starts_with("# generated_utc=") && !l.starts_with("# elapsed_seconds="))
        .map(|l| format!("{l}\n"))
        .collect()
}

/// The CSV body alone: header and data rows, no comment lines.
pub fn csv_body(report: &str) -> String {
    report
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

/// Longest-run milestone table with the run census as trailing comments.
pub fn scan_csv(meta: &Meta, rows: &[EllRow], census: &RunCensus) -> String {
    let mut out = meta.comment_block();
    out.push_str("N,ell_N,run_start,run_d\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.n,
            row.ell(),
            row.run.start,
            row.run.divisor_count
        ));
    }
    for (length, entry) in census {
        out.push_str(&format!(
            "# census length={length} count={} first_start={} first_divisor_count={}\n",
            entry.count, entry.first_start, entry.first_divisor_count
        ));
    }
    out
}

pub fn scan_json(
    meta: &Meta,
    rows: &[EllRow],
    census: &RunCensus,
    long_runs: &[RunRecord],
) -> String {
    if long_runs.is_empty() {
        pretty(&json!({ "meta": meta, "rows": rows, "census": census }))
    } else {
        pretty(&json!({
            "meta": meta,
            "rows": rows,
            "census": census,
            "long_runs": long_runs,
        }))
    }
}

/// Bound comparison table; each row repeats the parameter digest so rows
/// remain attributable when files are concatenated.
pub fn bounds_csv(meta: &Meta, params_digest: &str, rows: &[BoundComparison]) -> String {
    let mut out = meta.comment_block();
    out.push_str("N,ell,theorem1,explicit,theorem2,params_digest\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.n, row.ell, row.theorem1, row.explicit, row.theorem2, params_digest
        ));
    }
    out
}

pub fn bounds_json(meta: &Meta, params_digest: &str, rows: &[BoundComparison]) -> String {
    pretty(&json!({ "meta": meta, "params_digest": params_digest, "rows": rows }))
}

/// `(M, j(M#))` table, with the growth of `ln j` against `ln pi(M)` as
/// trailing comments to exhibit the polynomial relationship.
pub fn jacobsthal_csv(meta: &Meta, table: &JacobsthalTable) -> String {
    let mut out = meta.comment_block();
    out.push_str("M,primorial,j,witness_start\n");
    for row in table.rows() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.max_prime(),
            row.modulus,
            row.j_value,
            row.witness_gap_start
        ));
    }
    for row in table.rows() {
        let pi_m = row.prime_support.len() as f64;
        out.push_str(&format!(
            "# growth M={} pi_M={} ln_pi={:.6} ln_j={:.6}\n",
            row.max_prime(),
            row.prime_support.len(),
            pi_m.ln(),
            (row.j_value as f64).ln()
        ));
    }
    if table.truncated() {
        out.push_str(&format!(
            "# truncated=true budget={}\n",
            table.budget()
        ));
    }
    out
}

pub fn jacobsthal_json(meta: &Meta, table: &JacobsthalTable) -> String {
    pretty(&json!({ "meta": meta, "table": table }))
}

/// Lemma verification reports as one JSON document.
pub fn lemmas_json(meta: &Meta, reports: &[LemmaReport]) -> String {
    pretty(&json!({ "meta": meta, "reports": reports }))
}

fn pretty(value: &serde_json::Value) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("serializable report");
    out.push('\n');
    out
}

/// Writes via a temporary file in the destination directory plus an atomic
/// rename, so a failed run leaves no partial file behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| crate::Error::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::BoundParams;
    use crate::sieve::{ScanConfig, ScanState};

    fn meta() -> Meta {
        Meta::new("test", json!({ "n": 1_000 }))
            .with_seed(7)
            .with_digest("0xabc")
            .with_elapsed(1.5)
    }

    fn scan(n: u64) -> ScanState {
        let mut state = ScanState::new(ScanConfig::up_to(n)).unwrap();
        state.run_to_end();
        state
    }

    #[test]
    fn comment_block_carries_all_metadata() {
        let text = scan_csv(&meta(), &[], &RunCensus::new());
        assert!(text.starts_with("# tool_version="));
        assert!(text.contains("# command=test\n"));
        assert!(text.contains("# config={\"n\":1000}\n"));
        assert!(text.contains("# seed=7\n"));
        assert!(text.contains("# generated_utc="));
        assert!(text.contains("# elapsed_seconds=1.5\n"));
        assert!(text.contains("# config_digest=0xabc\n"));
    }

    #[test]
    fn scan_csv_golden_body() {
        let state = scan(250);
        let text = scan_csv(&meta(), state.rows(), state.census());
        assert_eq!(csv_body(&text), "N,ell_N,run_start,run_d\n100,3,33,4\n250,4,242,6\n");
        assert!(text.contains("# census length=1 count=178 first_start=1 first_divisor_count=1\n"));
        assert!(text.contains("# census length=2 count=22 first_start=2 first_divisor_count=2\n"));
        assert!(text.contains("# census length=3 count=8 first_start=33 first_divisor_count=4\n"));
        assert!(text.contains("# census length=4 count=1 first_start=242 first_divisor_count=6\n"));
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn stable_text_drops_only_wall_clock_lines() {
        let state = scan(1_000);
        let a = scan_csv(&meta().with_elapsed(1.0), state.rows(), state.census());
        let b = scan_csv(&meta().with_elapsed(2.0), state.rows(), state.census());
        assert_ne!(a, b);
        assert_eq!(stable_text(&a), stable_text(&b));
        assert!(stable_text(&a).contains("# seed=7\n"));
    }

    #[test]
    fn bounds_csv_rows_round_trip() {
        let params = BoundParams::default();
        let rows = vec![crate::bounds::compare(10_000, &params).unwrap()];
        let text = bounds_csv(&meta(), &params.digest_hex(), &rows);
        let body = csv_body(&text);
        let mut lines = body.lines();
        assert_eq!(lines.next(), Some("N,ell,theorem1,explicit,theorem2,params_digest"));
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields[0], "10000");
        assert_eq!(fields[1], "4");
        for f in &fields[2..5] {
            assert!(f.parse::<f64>().unwrap() > 1.0);
        }
        assert_eq!(fields[5], params.digest_hex());
    }

    #[test]
    fn jacobsthal_csv_matches_known_table() {
        let table = crate::jacobsthal::primorial_table(7, 1_000, true).unwrap();
        let text = jacobsthal_csv(&meta(), &table);
        assert_eq!(
            csv_body(&text),
            "M,primorial,j,witness_start\n2,2,2,2\n3,6,4,2\n5,30,6,2\n7,210,10,2\n"
        );
        assert!(text.contains("# growth M=7 pi_M=4"));
        assert!(!text.contains("# truncated"));
        let cut = crate::jacobsthal::primorial_table(7, 100, true).unwrap();
        assert!(jacobsthal_csv(&meta(), &cut).contains("# truncated=true budget=100\n"));
    }

    #[test]
    fn json_reports_parse_back() {
        let state = scan(1_000);
        let text = scan_json(&meta(), state.rows(), state.census(), state.long_runs());
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["meta"]["seed"], 7);
        assert_eq!(v["rows"][1]["n"], 1_000);
        assert_eq!(v["rows"][1]["run"]["start"], 242);
        assert_eq!(v["census"]["4"]["first_start"], 242);
        assert!(v.get("long_runs").is_none());

        let mut config = crate::sieve::ScanConfig::up_to(1_000);
        config.collect_runs_at_least = Some(3);
        let mut collecting = crate::sieve::ScanState::new(config).unwrap();
        collecting.run_to_end();
        let text = scan_json(
            &meta(),
            collecting.rows(),
            collecting.census(),
            collecting.long_runs(),
        );
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["long_runs"][0]["start"], 33);

        let reports = crate::lemmas::run_selected(
            &[crate::lemmas::LemmaId::L1],
            &crate::lemmas::VerifyLimits {
                lemma1_max: 10,
                ..Default::default()
            },
            0,
        )
        .unwrap();
        let text = lemmas_json(&meta(), &reports);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["reports"][0]["lemma_id"], "L1");
        assert_eq!(v["reports"][0]["verdict"], "pass");
    }

    #[test]
    fn atomic_write_creates_and_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, "first\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "first\n");
        write_atomic(&path, "second\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
