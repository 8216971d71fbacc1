//! Block-interval estimation from a table of measured solve times.

use alloc::vec::Vec;

use thiserror::Error;

pub const DEFAULT_MULTIPLIER: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("multiplier must exceed 1, got {0}")]
    Multiplier(f64),
    #[error("lookup table is empty")]
    Empty,
    #[error("row (n={n}, m={m}, tau={tau_ms}ms) needs positive n, m and tau")]
    BadRow { n: u64, m: u64, tau_ms: u64 },
}

/// A benchmark measurement: generation plus verification time for an
/// instance of the given size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct LookupRow {
    pub n: u64,
    pub m: u64,
    pub tau_ms: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LookupTable {
    rows: Vec<LookupRow>,
    multiplier: f64,
}

impl LookupTable {
    pub fn new(mut rows: Vec<LookupRow>, multiplier: f64) -> Result<Self, ScheduleError> {
        if !(multiplier > 1.0 && multiplier.is_finite()) {
            return Err(ScheduleError::Multiplier(multiplier));
        }
        if rows.is_empty() {
            return Err(ScheduleError::Empty);
        }
        if let Some(r) = rows.iter().find(|r| r.n == 0 || r.m == 0 || r.tau_ms == 0) {
            return Err(ScheduleError::BadRow { n: r.n, m: r.m, tau_ms: r.tau_ms });
        }
        rows.sort();
        Ok(Self { rows, multiplier })
    }

    pub fn rows(&self) -> &[LookupRow] {
        &self.rows
    }

    pub fn multiplier(&self) -> f64 {
        self.multiplier
    }

    /// The row with the largest `n' <= n`, or the smallest row when every
    /// row is larger than the query.
    pub fn select(&self, n: u64) -> &LookupRow {
        let idx = self.rows.partition_point(|r| r.n <= n);
        &self.rows[idx.saturating_sub(1)]
    }

    /// `τ(G') · (m·n) / (m'·n')` in milliseconds, before the multiplier.
    pub fn scaled_tau(&self, n: u64, m: u64) -> f64 {
        let row = self.select(n);
        row.tau_ms as f64 * (m as f64 * n as f64) / (row.m as f64 * row.n as f64)
    }

    /// `T_max` for an instance with `n` vertices and `m` edges, rounded up
    /// to a whole millisecond and never zero.
    pub fn estimate_tmax(&self, n: u64, m: u64) -> u64 {
        let t = libm::ceil(self.multiplier * self.scaled_tau(n, m));
        (t as u64).max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn row(n: u64, m: u64, tau_ms: u64) -> LookupRow {
        LookupRow { n, m, tau_ms }
    }

    #[test]
    fn worked_example() {
        let t = LookupTable::new(vec![row(1000, 5000, 60_000)], 1.5).unwrap();
        assert_eq!(t.scaled_tau(2000, 10_000), 240_000.0);
        assert_eq!(t.estimate_tmax(2000, 10_000), 360_000);
    }

    #[test]
    fn exact_row_gives_l_tau() {
        let t = LookupTable::new(vec![row(1000, 5000, 60_000)], 1.5).unwrap();
        assert_eq!(t.estimate_tmax(1000, 5000), 90_000);
    }

    #[test]
    fn selection_rule() {
        let t = LookupTable::new(vec![row(2000, 9000, 500), row(1000, 5000, 100)], 2.0).unwrap();
        assert_eq!(t.rows()[0].n, 1000);
        assert_eq!(t.select(1500).n, 1000);
        assert_eq!(t.select(2000).n, 2000);
        assert_eq!(t.select(10).n, 1000);
        assert_eq!(t.select(1_000_000).n, 2000);
    }

    #[test]
    fn validation() {
        assert_eq!(LookupTable::new(vec![row(1, 1, 1)], 1.0), Err(ScheduleError::Multiplier(1.0)));
        assert_eq!(LookupTable::new(vec![], 1.5), Err(ScheduleError::Empty));
        assert!(LookupTable::new(vec![row(10, 0, 5)], 1.5).is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_size(m1 in 1u64..1_000_000, m2 in 1u64..1_000_000) {
            let t = LookupTable::new(vec![row(1000, 5000, 60_000)], 1.5).unwrap();
            let (lo, hi) = if m1 <= m2 { (m1, m2) } else { (m2, m1) };
            prop_assert!(t.estimate_tmax(1500, lo) <= t.estimate_tmax(1500, hi));
        }
    }
}
