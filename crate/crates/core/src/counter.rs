use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

/// Contention-safe tally of arithmetic work.
///
/// Field counts follow the transparent cost model of the circulant layer: a
/// convolution of two length-`d` rows is `d^2` field multiplications and
/// `d(d-1)` additions, whichever packed representation actually runs.
#[derive(Debug, Default)]
pub struct OpCounter {
    field_mults: AtomicU64,
    field_squares: AtomicU64,
    field_adds: AtomicU64,
    group_mults: AtomicU64,
    group_squares: AtomicU64,
}

/// Plain snapshot of an [`OpCounter`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounts {
    pub field_mults: u64,
    pub field_squares: u64,
    pub field_adds: u64,
    pub group_mults: u64,
    pub group_squares: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_field_mults(&self, n: u64) {
        self.field_mults.fetch_add(n, Ordering::Relaxed);
    }

    pub fn add_field_squares(&self, n: u64) {
        self.field_squares.fetch_add(n, Ordering::Relaxed);
    }

    pub fn add_field_adds(&self, n: u64) {
        self.field_adds.fetch_add(n, Ordering::Relaxed);
    }

    pub fn add_group_mults(&self, n: u64) {
        self.group_mults.fetch_add(n, Ordering::Relaxed);
    }

    pub fn add_group_squares(&self, n: u64) {
        self.group_squares.fetch_add(n, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> OpCounts {
        OpCounts {
            field_mults: self.field_mults.load(Ordering::Relaxed),
            field_squares: self.field_squares.load(Ordering::Relaxed),
            field_adds: self.field_adds.load(Ordering::Relaxed),
            group_mults: self.group_mults.load(Ordering::Relaxed),
            group_squares: self.group_squares.load(Ordering::Relaxed),
        }
    }

    /// Resets all tallies; call only at a measurement-scope boundary.
    pub fn reset(&self) {
        for c in [
            &self.field_mults,
            &self.field_squares,
            &self.field_adds,
            &self.group_mults,
            &self.group_squares,
        ] {
            c.store(0, Ordering::Relaxed);
        }
    }
}

impl OpCounts {
    /// Group operations of either kind.
    pub fn group_ops(&self) -> u64 {
        self.group_mults + self.group_squares
    }

    pub fn since(&self, earlier: &OpCounts) -> OpCounts {
        OpCounts {
            field_mults: self.field_mults - earlier.field_mults,
            field_squares: self.field_squares - earlier.field_squares,
            field_adds: self.field_adds - earlier.field_adds,
            group_mults: self.group_mults - earlier.group_mults,
            group_squares: self.group_squares - earlier.group_squares,
        }
    }
}
