//! Dense bit-set over the state index range of a single system.
//!
//! Every set is created for a fixed universe size and stays bound to it:
//! combining sets built for different universes is a programming error and
//! panics rather than silently producing nonsense.

use std::fmt;

const BLOCK_BITS: usize = 64;

/// A fixed-universe set of state indices backed by `u64` blocks.
#[derive(Clone, PartialEq, Eq)]
pub struct StateSet {
    universe: usize,
    blocks: Vec<u64>,
    len: usize,
}

impl StateSet {
    /// Creates the empty set over `universe` states.
    pub fn empty(universe: usize) -> Self {
        let blocks = vec![0u64; universe.div_ceil(BLOCK_BITS)];
        StateSet { universe, blocks, len: 0 }
    }

    /// Creates the set containing every state of the universe.
    pub fn full(universe: usize) -> Self {
        let mut set = StateSet::empty(universe);
        for block in &mut set.blocks {
            *block = u64::MAX;
        }
        set.mask_tail();
        set.len = universe;
        set
    }

    /// Collects the given indices into a set over `universe` states.
    pub fn from_indices<I: IntoIterator<Item = usize>>(universe: usize, indices: I) -> Self {
        let mut set = StateSet::empty(universe);
        for idx in indices {
            set.insert(idx);
        }
        set
    }

    /// The number of states this set is defined over.
    pub fn universe(&self) -> usize {
        self.universe
    }

    /// The number of states in the set.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, idx: usize) -> bool {
        assert!(idx < self.universe, "state index {idx} outside universe {}", self.universe);
        self.blocks[idx / BLOCK_BITS] & (1u64 << (idx % BLOCK_BITS)) != 0
    }

    /// Adds a state; returns `true` if it was not already present.
    pub fn insert(&mut self, idx: usize) -> bool {
        assert!(idx < self.universe, "state index {idx} outside universe {}", self.universe);
        let block = &mut self.blocks[idx / BLOCK_BITS];
        let bit = 1u64 << (idx % BLOCK_BITS);
        if *block & bit == 0 {
            *block |= bit;
            self.len += 1;
            true
        } else {
            false
        }
    }

    /// In-place union with a set over the same universe.
    pub fn union_with(&mut self, other: &StateSet) {
        self.check_universe(other);
        for (dst, src) in self.blocks.iter_mut().zip(&other.blocks) {
            *dst |= src;
        }
        self.recount();
    }

    /// In-place intersection with a set over the same universe.
    pub fn intersect_with(&mut self, other: &StateSet) {
        self.check_universe(other);
        for (dst, src) in self.blocks.iter_mut().zip(&other.blocks) {
            *dst &= src;
        }
        self.recount();
    }

    /// In-place complement relative to the universe.
    pub fn complement(&mut self) {
        for block in &mut self.blocks {
            *block = !*block;
        }
        self.mask_tail();
        self.len = self.universe - self.len;
    }

    /// Whether the two sets share at least one state.
    pub fn intersects(&self, other: &StateSet) -> bool {
        self.check_universe(other);
        self.blocks.iter().zip(&other.blocks).any(|(a, b)| a & b != 0)
    }

    /// Iterates over the member indices in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().enumerate().flat_map(|(block_idx, &block)| {
            let base = block_idx * BLOCK_BITS;
            BitIter { block }.map(move |bit| base + bit)
        })
    }

    fn check_universe(&self, other: &StateSet) {
        assert_eq!(
            self.universe, other.universe,
            "state sets belong to different systems ({} vs {} states)",
            self.universe, other.universe
        );
    }

    fn mask_tail(&mut self) {
        let tail = self.universe % BLOCK_BITS;
        if tail != 0 {
            if let Some(last) = self.blocks.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
    }

    fn recount(&mut self) {
        self.len = self.blocks.iter().map(|b| b.count_ones() as usize).sum();
    }
}

struct BitIter {
    block: u64,
}

impl Iterator for BitIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.block == 0 {
            return None;
        }
        let bit = self.block.trailing_zeros() as usize;
        self.block &= self.block - 1;
        Some(bit)
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()?;
        write!(f, "/{}", self.universe)
    }
}
