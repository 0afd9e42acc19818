//! Binary checkpoint format for interrupted scans.
//!
//! Layout: the magic `DRL1`, the resume position and aggregate fields, then
//! the variable-length sections (milestone rows, census, divisibility-check
//! tallies, collected runs). All integers are little-endian u64. A checkpoint
//! embeds the digest of the configuration that produced it and can only be
//! resumed under an equal configuration.

use std::io::Write;
use std::path::Path;

use super::{CensusEntry, EllRow, RunRecord};
use crate::{Error, Result};

pub(super) const MAGIC: &[u8; 4] = b"DRL1";

/// Complete scan state at a segment boundary.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SieveCheckpoint {
    /// Digest of the owning [`ScanConfig`](super::ScanConfig).
    pub config_digest: u64,
    /// First integer not yet scanned.
    pub next_lo: u64,
    /// Longest fully closed run so far.
    pub best: RunRecord,
    /// Divisor count of the run still open at the boundary.
    pub carry_value: u64,
    /// Length of the open run (its start is `next_lo - carry_length`).
    pub carry_length: u64,
    /// Milestone rows recorded so far.
    pub rows: Vec<EllRow>,
    /// Census of closed runs, ascending by length.
    pub census: Vec<(u64, CensusEntry)>,
    /// Total maximal runs closed.
    pub runs_closed: u64,
    /// Runs of length >= 2 divisibility-checked so far.
    pub rundiv_checked: u64,
    /// Any runs that failed the divisibility check.
    pub rundiv_violations: Vec<RunRecord>,
    /// Runs collected under the configured length threshold.
    pub long_runs: Vec<RunRecord>,
}

impl SieveCheckpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(
            4 + 8 * (7 + 2)
                + self.rows.len() * 32
                + self.census.len() * 32
                + (self.rundiv_violations.len() + self.long_runs.len()) * 24
                + 32,
        );
        out.extend_from_slice(MAGIC);
        let mut push = |v: u64| out.extend_from_slice(&v.to_le_bytes());
        push(self.next_lo);
        push(self.best.start);
        push(self.best.length);
        push(self.best.divisor_count);
        push(self.carry_value);
        push(self.carry_length);
        push(self.config_digest);
        push(self.rows.len() as u64);
        for row in &self.rows {
            push(row.n);
            push(row.run.start);
            push(row.run.length);
            push(row.run.divisor_count);
        }
        push(self.census.len() as u64);
        for &(length, e) in &self.census {
            push(length);
            push(e.first_start);
            push(e.first_divisor_count);
            push(e.count);
        }
        push(self.runs_closed);
        push(self.rundiv_checked);
        push(self.rundiv_violations.len() as u64);
        for r in &self.rundiv_violations {
            push(r.start);
            push(r.length);
            push(r.divisor_count);
        }
        push(self.long_runs.len() as u64);
        for r in &self.long_runs {
            push(r.start);
            push(r.length);
            push(r.divisor_count);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let magic = r.take(4)?;
        if magic != MAGIC {
            return Err(Error::CheckpointFormat(format!(
                "bad magic {magic:?}, expected {MAGIC:?}"
            )));
        }
        let next_lo = r.u64()?;
        let best = RunRecord {
            start: r.u64()?,
            length: r.u64()?,
            divisor_count: r.u64()?,
        };
        let carry_value = r.u64()?;
        let carry_length = r.u64()?;
        let config_digest = r.u64()?;
        let n_rows = r.count(4)?;
        let mut rows = Vec::with_capacity(n_rows);
        for _ in 0..n_rows {
            rows.push(EllRow {
                n: r.u64()?,
                run: RunRecord {
                    start: r.u64()?,
                    length: r.u64()?,
                    divisor_count: r.u64()?,
                },
            });
        }
        let n_census = r.count(4)?;
        let mut census = Vec::with_capacity(n_census);
        for _ in 0..n_census {
            census.push((
                r.u64()?,
                CensusEntry {
                    first_start: r.u64()?,
                    first_divisor_count: r.u64()?,
                    count: r.u64()?,
                },
            ));
        }
        if census.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::CheckpointFormat(
                "census lengths out of order".into(),
            ));
        }
        let runs_closed = r.u64()?;
        let rundiv_checked = r.u64()?;
        let n_viol = r.count(3)?;
        let mut rundiv_violations = Vec::with_capacity(n_viol);
        for _ in 0..n_viol {
            rundiv_violations.push(RunRecord {
                start: r.u64()?,
                length: r.u64()?,
                divisor_count: r.u64()?,
            });
        }
        let n_long = r.count(3)?;
        let mut long_runs = Vec::with_capacity(n_long);
        for _ in 0..n_long {
            long_runs.push(RunRecord {
                start: r.u64()?,
                length: r.u64()?,
                divisor_count: r.u64()?,
            });
        }
        if r.pos != bytes.len() {
            return Err(Error::CheckpointFormat(format!(
                "{} trailing bytes",
                bytes.len() - r.pos
            )));
        }
        Ok(Self {
            config_digest,
            next_lo,
            best,
            carry_value,
            carry_length,
            rows,
            census,
            runs_closed,
            rundiv_checked,
            rundiv_violations,
            long_runs,
        })
    }

    /// Writes the checkpoint atomically: a temp file in the target directory
    /// is persisted over `path` only after a complete write.
    pub fn write_file(&self, path: &Path) -> Result<()> {
        let dir = path.parent().filter(|d| !d.as_os_str().is_empty());
        let mut tmp = match dir {
            Some(d) => tempfile::NamedTempFile::new_in(d)?,
            None => tempfile::NamedTempFile::new_in(".")?,
        };
        tmp.write_all(&self.to_bytes())?;
        tmp.flush()?;
        tmp.persist(path).map_err(|e| Error::Io(e.error))?;
        Ok(())
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::CheckpointFormat("truncated checkpoint".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        let s = self.take(8)?;
        Ok(u64::from_le_bytes(s.try_into().unwrap()))
    }

    /// Reads a section count and checks it against the bytes remaining.
    fn count(&mut self, words_per_entry: usize) -> Result<usize> {
        let n = self.u64()?;
        let remaining = (self.bytes.len() - self.pos) / (8 * words_per_entry);
        if n as usize > remaining {
            return Err(Error::CheckpointFormat(format!(
                "section count {n} exceeds file size"
            )));
        }
        Ok(n as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{ScanConfig, ScanState};
    use super::*;

    fn sample_checkpoint() -> SieveCheckpoint {
        let mut st = ScanState::new(ScanConfig {
            segment_width: 97,
            ..ScanConfig::up_to(1000)
        })
        .unwrap();
        for _ in 0..4 {
            st.step();
        }
        st.checkpoint()
    }

    #[test]
    fn bytes_roundtrip() {
        let ck = sample_checkpoint();
        let decoded = SieveCheckpoint::from_bytes(&ck.to_bytes()).unwrap();
        assert_eq!(decoded, ck);
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.ck");
        let ck = sample_checkpoint();
        ck.write_file(&path).unwrap();
        assert_eq!(SieveCheckpoint::read_file(&path).unwrap(), ck);
    }

    #[test]
    fn rejects_wrong_magic_and_truncation() {
        let ck = sample_checkpoint();
        let bytes = ck.to_bytes();

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            SieveCheckpoint::from_bytes(&bad),
            Err(Error::CheckpointFormat(_))
        ));

        for cut in [0, 3, 11, bytes.len() - 1] {
            assert!(
                SieveCheckpoint::from_bytes(&bytes[..cut]).is_err(),
                "cut = {cut}"
            );
        }

        let mut extended = bytes.clone();
        extended.push(0);
        assert!(SieveCheckpoint::from_bytes(&extended).is_err());
    }

    #[test]
    fn rejects_oversized_section_counts() {
        let ck = sample_checkpoint();
        let mut bytes = ck.to_bytes();
        // The rows count sits right after the magic and seven u64 fields.
        let off = 4 + 7 * 8;
        bytes[off..off + 8].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(matches!(
            SieveCheckpoint::from_bytes(&bytes),
            Err(Error::CheckpointFormat(_))
        ));
    }

    #[test]
    fn resume_rejects_other_configs() {
        let ck = sample_checkpoint();
        let other = ScanConfig {
            segment_width: 98,
            ..ScanConfig::up_to(1000)
        };
        assert!(matches!(
            ScanState::resume(ck.clone(), other),
            Err(Error::CheckpointMismatch { .. })
        ));
        let same = ScanConfig {
            segment_width: 97,
            ..ScanConfig::up_to(1000)
        };
        assert!(ScanState::resume(ck, same).is_ok());
    }

    #[test]
    fn resume_rejects_out_of_domain_positions() {
        let mut ck = sample_checkpoint();
        ck.next_lo = 5000;
        let config = ScanConfig {
            segment_width: 97,
            ..ScanConfig::up_to(1000)
        };
        assert!(matches!(
            ScanState::resume(ck, config),
            Err(Error::CheckpointFormat(_))
        ));
    }

    #[test]
    fn interrupt_resume_matches_uninterrupted_scan_at_every_boundary() {
        let config = ScanConfig {
            segment_width: 64,
            ..ScanConfig::up_to(2000)
        };
        let mut full = ScanState::new(config.clone()).unwrap();
        full.run_to_end();

        let mut boundaries = 0usize;
        {
            let mut probe = ScanState::new(config.clone()).unwrap();
            while probe.step() {
                boundaries += 1;
            }
        }
        assert!(boundaries > 20);

        for stop in 1..=boundaries {
            let mut first = ScanState::new(config.clone()).unwrap();
            for _ in 0..stop {
                first.step();
            }
            let bytes = first.checkpoint().to_bytes();
            let ck = SieveCheckpoint::from_bytes(&bytes).unwrap();
            let mut resumed = ScanState::resume(ck, config.clone()).unwrap();
            resumed.run_to_end();
            assert_eq!(resumed.best(), full.best(), "stop = {stop}");
            assert_eq!(resumed.rows(), full.rows(), "stop = {stop}");
            assert_eq!(resumed.census(), full.census(), "stop = {stop}");
            assert_eq!(resumed.checkpoint(), full.checkpoint(), "stop = {stop}");
        }
    }
}
