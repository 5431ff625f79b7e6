//! Bitset subsets of a ground set with at most 64 members.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest ground set a mask can describe.
pub const MAX_MEMBERS: usize = 64;

/// A subset of member ids, bit `i` set iff member `i` is in the set.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubsetMask(pub u64);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    /// All of `0..n`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_MEMBERS, "ground set of {n} members exceeds {MAX_MEMBERS}");
        if n == MAX_MEMBERS {
            SubsetMask(u64::MAX)
        } else {
            SubsetMask((1u64 << n) - 1)
        }
    }

    pub fn singleton(id: usize) -> Self {
        SubsetMask(1u64 << id)
    }

    pub fn from_members<I: IntoIterator<Item = usize>>(ids: I) -> Self {
        SubsetMask(ids.into_iter().fold(0u64, |m, i| m | (1u64 << i)))
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn contains(self, id: usize) -> bool {
        id < MAX_MEMBERS && self.0 >> id & 1 == 1
    }

    #[inline]
    pub fn with(self, id: usize) -> Self {
        SubsetMask(self.0 | (1u64 << id))
    }

    #[inline]
    pub fn without(self, id: usize) -> Self {
        SubsetMask(self.0 & !(1u64 << id))
    }

    #[inline]
    pub fn union(self, other: Self) -> Self {
        SubsetMask(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: Self) -> Self {
        SubsetMask(self.0 & other.0)
    }

    #[inline]
    pub fn difference(self, other: Self) -> Self {
        SubsetMask(self.0 & !other.0)
    }

    #[inline]
    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    /// Lowest member id, if any.
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Member ids in ascending order.
    pub fn iter(self) -> Members {
        Members(self.0)
    }

    /// True iff every member id is below `n`.
    pub fn fits(self, n: usize) -> bool {
        self.is_subset_of(SubsetMask::full(n))
    }

    pub(crate) fn check_fits(self, n: usize) -> Result<()> {
        if self.fits(n) {
            Ok(())
        } else {
            Err(Error::SubsetOutOfRange { mask: self.0, n })
        }
    }

    /// Renumbers `self ∩ within` so the i-th member of `within` becomes id `i`.
    pub fn compress(self, within: SubsetMask) -> SubsetMask {
        let mut out = 0u64;
        for (i, id) in within.iter().enumerate() {
            if self.contains(id) {
                out |= 1u64 << i;
            }
        }
        SubsetMask(out)
    }

    /// Inverse of [`compress`](Self::compress): id `i` maps to the i-th member of `within`.
    pub fn expand(self, within: SubsetMask) -> SubsetMask {
        let mut out = 0u64;
        for (i, id) in within.iter().enumerate() {
            if self.contains(i) {
                out |= 1u64 << id;
            }
        }
        SubsetMask(out)
    }

    /// All subsets of `self`, ascending by mask value (including the empty set).
    pub fn subsets(self) -> Submasks {
        Submasks { universe: self.0, next: Some(0) }
    }

    /// Subsets of `self` of exactly `k` members, ascending by mask value.
    pub fn subsets_of_size(self, k: usize) -> SizedSubsets {
        SizedSubsets::new(self, k)
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for SubsetMask {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        SubsetMask::from_members(iter)
    }
}

/// Iterator over the members of a mask.
#[derive(Clone)]
pub struct Members(u64);

impl Iterator for Members {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let id = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(id)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Members {}

/// Ascending submask enumeration.
pub struct Submasks {
    universe: u64,
    next: Option<u64>,
}

impl Iterator for Submasks {
    type Item = SubsetMask;

    fn next(&mut self) -> Option<SubsetMask> {
        let cur = self.next?;
        self.next = if cur == self.universe {
            None
        } else {
            // Carry-ripple to the next larger submask.
            Some((cur | !self.universe).wrapping_add(1) & self.universe)
        };
        Some(SubsetMask(cur))
    }
}

/// Fixed-size subsets: Gosper's hack over `|universe|` dense bits, then each
/// pattern is deposited into the universe's bit positions. Deposit is
/// monotone, so output stays in ascending mask order.
pub struct SizedSubsets {
    positions: Vec<usize>,
    pattern: Option<u64>,
    limit: u64,
}

impl SizedSubsets {
    fn new(universe: SubsetMask, k: usize) -> Self {
        let positions: Vec<usize> = universe.iter().collect();
        let m = positions.len();
        let pattern = if k > m {
            None
        } else if k == 0 {
            Some(0)
        } else {
            Some(u64::MAX >> (64 - k))
        };
        let limit = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
        SizedSubsets { positions, pattern, limit }
    }
}

impl Iterator for SizedSubsets {
    type Item = SubsetMask;

    fn next(&mut self) -> Option<SubsetMask> {
        let p = self.pattern?;
        let mut out = 0u64;
        let mut bits = p;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            out |= 1u64 << self.positions[i];
            bits &= bits - 1;
        }
        self.pattern = if p == 0 {
            None
        } else {
            let c = p & p.wrapping_neg();
            let r = p.wrapping_add(c);
            if r == 0 {
                None
            } else {
                let next = (((r ^ p) >> 2) / c) | r;
                (next <= self.limit && next.count_ones() == p.count_ones()).then_some(next)
            }
        };
        Some(SubsetMask(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sized_subsets_ascending_and_complete() {
        let u = SubsetMask(0b1011_0110);
        for k in 0..=6 {
            let got: Vec<u64> = u.subsets_of_size(k).map(|m| m.0).collect();
            let mut want: Vec<u64> = u.subsets().filter(|m| m.len() == k).map(|m| m.0).collect();
            want.sort_unstable();
            assert_eq!(got, want, "k={k}");
        }
    }

    #[test]
    fn submasks_ascending() {
        let got: Vec<u64> = SubsetMask(0x55).subsets().map(|m| m.0).collect();
        assert_eq!(got, [0, 1, 4, 5, 16, 17, 20, 21, 64, 65, 68, 69, 80, 81, 84, 85]);
    }

    #[test]
    fn compress_expand_round_trip() {
        let within = SubsetMask(0b1101_0010);
        let s = SubsetMask(0b0100_0010);
        let c = s.compress(within);
        assert_eq!(c, SubsetMask(0b0101));
        assert_eq!(c.expand(within), s);
    }

    #[test]
    fn full_width_universe() {
        assert_eq!(SubsetMask::full(64).len(), 64);
        assert_eq!(SubsetMask::full(64).subsets_of_size(64).count(), 1);
        assert_eq!(SubsetMask::full(5).subsets_of_size(2).count(), 10);
    }
}
