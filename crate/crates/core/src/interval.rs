use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

/// A closed range of time slices `[start; end]`, numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interval {
    pub start: usize,
    pub end: usize,
}

impl Interval {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start >= 1 && start <= end, "bad interval [{start};{end}]");
        Interval { start, end }
    }

    /// Number of slices covered, `end - start + 1`.
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Zero-based slice positions covered by the interval.
    pub fn positions(&self) -> Range<usize> {
        self.start - 1..self.end
    }

    pub fn intersection_len(&self, other: &Interval) -> usize {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        if lo > hi {
            0
        } else {
            hi - lo + 1
        }
    }

    pub fn contains(&self, slice: usize) -> bool {
        self.start <= slice && slice <= self.end
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{};{}]", self.start, self.end)
    }
}
