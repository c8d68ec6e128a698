//! Single-level, set-associative, word-addressed data cache.
//!
//! A cache is described by the triplet `(a, w, S)`: associativity `a`, line
//! size `w` words, total capacity `S` words, organised as `z = S / (a w)`
//! sets. A word address `A` lives in line `A / w`, which maps to set
//! `(A / w) mod z`. Replacement within a set is strict LRU.
//!
//! Every miss is classified as a *cold* load (the line was never resident
//! before) or a *replacement* load (the line was resident once and has since
//! been evicted).

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

pub type Address = u64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CacheError {
    #[error("cache parameters must be positive (a={a}, w={w}, S={size})")]
    NonPositive { a: u64, w: u64, size: u64 },
    #[error("cache size {size} is not a multiple of a*w = {a}*{w}")]
    Indivisible { a: u64, w: u64, size: u64 },
    #[error("cache size {size} != a*z*w = {a}*{z}*{w}")]
    Inconsistent { a: u64, w: u64, size: u64, z: u64 },
}

/// The `(a, w, S)` cache triplet plus the derived set count `z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CacheConfig {
    associativity: u64,
    line_words: u64,
    size_words: u64,
    sets: u64,
}

impl CacheConfig {
    pub fn new(associativity: u64, line_words: u64, size_words: u64) -> Result<Self, CacheError> {
        let (a, w, size) = (associativity, line_words, size_words);
        if a == 0 || w == 0 || size == 0 {
            return Err(CacheError::NonPositive { a, w, size });
        }
        if size % (a * w) != 0 {
            return Err(CacheError::Indivisible { a, w, size });
        }
        Ok(Self {
            associativity: a,
            line_words: w,
            size_words: size,
            sets: size / (a * w),
        })
    }

    /// Builds a config from all four parameters, checking `S = a * z * w`.
    pub fn with_sets(a: u64, w: u64, size: u64, z: u64) -> Result<Self, CacheError> {
        if a == 0 || w == 0 || size == 0 || z == 0 {
            return Err(CacheError::NonPositive { a, w, size });
        }
        if a.checked_mul(z).and_then(|v| v.checked_mul(w)) != Some(size) {
            return Err(CacheError::Inconsistent { a, w, size, z });
        }
        Self::new(a, w, size)
    }

    pub fn direct_mapped(line_words: u64, size_words: u64) -> Result<Self, CacheError> {
        Self::new(1, line_words, size_words)
    }

    pub fn fully_associative(line_words: u64, size_words: u64) -> Result<Self, CacheError> {
        if line_words == 0 {
            return Err(CacheError::NonPositive { a: 0, w: 0, size: size_words });
        }
        Self::new(size_words / line_words, line_words, size_words)
    }

    pub fn associativity(&self) -> u64 {
        self.associativity
    }

    pub fn line_words(&self) -> u64 {
        self.line_words
    }

    pub fn size_words(&self) -> u64 {
        self.size_words
    }

    pub fn sets(&self) -> u64 {
        self.sets
    }

    /// Number of lines the cache can hold, `S / w`.
    pub fn lines(&self) -> u64 {
        self.size_words / self.line_words
    }

    pub fn is_fully_associative(&self) -> bool {
        self.sets == 1
    }

    pub fn is_direct_mapped(&self) -> bool {
        self.associativity == 1
    }

    #[inline]
    pub fn line_of(&self, address: Address) -> u64 {
        address / self.line_words
    }

    #[inline]
    pub fn set_of_line(&self, line: u64) -> usize {
        (line % self.sets) as usize
    }

    /// Word offset inside the line, `A mod w`.
    #[inline]
    pub fn word_of(&self, address: Address) -> u64 {
        address % self.line_words
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AccessOutcome {
    Hit,
    Cold,
    Replacement,
}

impl AccessOutcome {
    pub fn is_miss(self) -> bool {
        !matches!(self, AccessOutcome::Hit)
    }
}

/// Counters at word-access granularity; misses are counted per line fetch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct AccessStats {
    pub accesses: u64,
    pub hits: u64,
    pub cold_loads: u64,
    pub replacement_loads: u64,
    pub misses: u64,
}

impl AccessStats {
    #[inline]
    pub fn record(&mut self, outcome: AccessOutcome) {
        self.accesses += 1;
        match outcome {
            AccessOutcome::Hit => self.hits += 1,
            AccessOutcome::Cold => {
                self.cold_loads += 1;
                self.misses += 1;
            }
            AccessOutcome::Replacement => {
                self.replacement_loads += 1;
                self.misses += 1;
            }
        }
    }

    pub fn merge(&self, other: &AccessStats) -> AccessStats {
        AccessStats {
            accesses: self.accesses + other.accesses,
            hits: self.hits + other.hits,
            cold_loads: self.cold_loads + other.cold_loads,
            replacement_loads: self.replacement_loads + other.replacement_loads,
            misses: self.misses + other.misses,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.accesses == self.hits + self.misses
            && self.misses == self.cold_loads + self.replacement_loads
    }
}

/// Lines ever made resident. Dense bitmap for small line numbers, hash set
/// for the sparse tail so arbitrary 64-bit addresses stay cheap.
#[derive(Debug, Clone, Default)]
struct LineSet {
    dense: Vec<u64>,
    sparse: HashSet<u64>,
}

const DENSE_LIMIT: u64 = 1 << 28;

impl LineSet {
    /// Inserts `line`, returning true if it was not present.
    #[inline]
    fn insert(&mut self, line: u64) -> bool {
        if line < DENSE_LIMIT {
            let word = (line / 64) as usize;
            if word >= self.dense.len() {
                self.dense.resize((word + 1).next_power_of_two(), 0);
            }
            let bit = 1u64 << (line % 64);
            let fresh = self.dense[word] & bit == 0;
            self.dense[word] |= bit;
            fresh
        } else {
            self.sparse.insert(line)
        }
    }

    fn contains(&self, line: u64) -> bool {
        if line < DENSE_LIMIT {
            self.dense
                .get((line / 64) as usize)
                .is_some_and(|w| w & (1u64 << (line % 64)) != 0)
        } else {
            self.sparse.contains(&line)
        }
    }

    fn len(&self) -> usize {
        self.dense.iter().map(|w| w.count_ones() as usize).sum::<usize>() + self.sparse.len()
    }
}

// Small sets keep an MRU-first vector; wide sets (high associativity) use a
// stamp-ordered map so an access stays logarithmic.
const SMALL_SET: u64 = 32;

#[derive(Debug, Clone)]
enum SetStore {
    Direct(Option<u64>),
    Small(Vec<u64>),
    Wide {
        stamp_of: HashMap<u64, u64>,
        by_stamp: BTreeMap<u64, u64>,
    },
}

impl SetStore {
    fn new(associativity: u64) -> Self {
        if associativity == 1 {
            SetStore::Direct(None)
        } else if associativity <= SMALL_SET {
            SetStore::Small(Vec::with_capacity(associativity as usize))
        } else {
            SetStore::Wide {
                stamp_of: HashMap::new(),
                by_stamp: BTreeMap::new(),
            }
        }
    }

    /// Touches `line`; returns true on hit. On miss inserts it, evicting the
    /// least recently used line if the set is full.
    #[inline]
    fn touch(&mut self, line: u64, capacity: usize, stamp: u64) -> bool {
        match self {
            SetStore::Direct(slot) => {
                if *slot == Some(line) {
                    true
                } else {
                    *slot = Some(line);
                    false
                }
            }
            SetStore::Small(lines) => {
                if let Some(pos) = lines.iter().position(|&l| l == line) {
                    lines[..=pos].rotate_right(1);
                    true
                } else {
                    if lines.len() == capacity {
                        lines.pop();
                    }
                    lines.insert(0, line);
                    false
                }
            }
            SetStore::Wide { stamp_of, by_stamp } => {
                if let Some(old) = stamp_of.insert(line, stamp) {
                    by_stamp.remove(&old);
                    by_stamp.insert(stamp, line);
                    true
                } else {
                    if by_stamp.len() == capacity {
                        let (_, victim) = by_stamp.pop_first().expect("full set is non-empty");
                        stamp_of.remove(&victim);
                    }
                    by_stamp.insert(stamp, line);
                    false
                }
            }
        }
    }

    fn lines_mru_first(&self) -> Vec<u64> {
        match self {
            SetStore::Direct(slot) => slot.iter().copied().collect(),
            SetStore::Small(lines) => lines.clone(),
            SetStore::Wide { by_stamp, .. } => by_stamp.values().rev().copied().collect(),
        }
    }
}

/// Live cache contents plus the history of lines ever loaded.
///
/// Memory grows with the number of distinct lines touched.
#[derive(Debug, Clone)]
pub struct CacheState {
    config: CacheConfig,
    sets: Vec<SetStore>,
    loaded_ever: LineSet,
    clock: u64,
    stats: AccessStats,
}

impl CacheState {
    pub fn new(config: CacheConfig) -> Self {
        let sets = (0..config.sets)
            .map(|_| SetStore::new(config.associativity))
            .collect();
        Self {
            config,
            sets,
            loaded_ever: LineSet::default(),
            clock: 0,
            stats: AccessStats::default(),
        }
    }

    pub fn config(&self) -> &CacheConfig {
        &self.config
    }

    pub fn stats(&self) -> AccessStats {
        self.stats
    }

    /// Accesses one word and updates the contents and counters.
    #[inline]
    pub fn access(&mut self, address: Address) -> AccessOutcome {
        let line = self.config.line_of(address);
        let set = self.config.set_of_line(line);
        self.clock += 1;
        let hit = self.sets[set].touch(line, self.config.associativity as usize, self.clock);
        let outcome = if hit {
            AccessOutcome::Hit
        } else if self.loaded_ever.insert(line) {
            AccessOutcome::Cold
        } else {
            AccessOutcome::Replacement
        };
        self.stats.record(outcome);
        outcome
    }

    /// Resident lines of `set`, most recently used first.
    pub fn set_contents(&self, set: usize) -> Vec<u64> {
        self.sets[set].lines_mru_first()
    }

    pub fn was_loaded(&self, line: u64) -> bool {
        self.loaded_ever.contains(line)
    }

    pub fn distinct_lines_loaded(&self) -> usize {
        self.loaded_ever.len()
    }
}

/// Access outcome on a fresh state for every address of `trace`.
pub fn run_trace<I>(config: CacheConfig, trace: I) -> AccessStats
where
    I: IntoIterator<Item = Address>,
{
    let mut state = CacheState::new(config);
    for address in trace {
        state.access(address);
    }
    state.stats()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(a: u64, w: u64, s: u64) -> CacheConfig {
        CacheConfig::new(a, w, s).unwrap()
    }

    #[test]
    fn compulsory_misses_fill_empty_cache() {
        let mut state = CacheState::new(cfg(1, 1, 8));
        for a in 0..8 {
            assert_eq!(state.access(a), AccessOutcome::Cold);
        }
        for a in 0..8 {
            assert_eq!(state.access(a), AccessOutcome::Hit);
        }
        let s = state.stats();
        assert_eq!((s.cold_loads, s.replacement_loads, s.hits), (8, 0, 8));
    }

    #[test]
    fn same_set_ping_pong() {
        let trace = (0..10).map(|i| if i % 2 == 0 { 0 } else { 8 });
        let s = run_trace(cfg(1, 1, 8), trace);
        assert_eq!(s.cold_loads, 2);
        assert_eq!(s.replacement_loads, 8);
        assert!(s.is_consistent());
    }

    #[test]
    fn trace_examples() {
        let fa = cfg(8, 4, 32);
        assert!(fa.is_fully_associative());
        let s = run_trace(fa, 0..32);
        assert_eq!(s.cold_loads, 8);
        assert_eq!(s.misses, 8);

        let s = run_trace(cfg(1, 2, 8), [0, 1, 2, 3]);
        assert_eq!((s.cold_loads, s.hits), (2, 2));

        // (2,1,4): lines 0, 2 and 4 all land in set 0 of the two sets, so the
        // third cold load evicts line 0 and the final access re-fetches it.
        let c = CacheConfig::with_sets(2, 1, 4, 2).unwrap();
        let s = run_trace(c, [0, 2, 4, 0]);
        assert_eq!(s.cold_loads, 3);
        assert_eq!(s.replacement_loads, 1);
        assert_eq!(s.hits, 0);
        assert_eq!(s.accesses, 4);
    }

    #[test]
    fn config_validation() {
        assert!(CacheConfig::new(0, 1, 8).is_err());
        assert!(CacheConfig::new(3, 1, 8).is_err());
        assert!(CacheConfig::with_sets(2, 2, 16, 3).is_err());
        let c = CacheConfig::with_sets(2, 2, 16, 4).unwrap();
        assert_eq!(c.sets(), 4);
        assert!(cfg(1, 4, 64).is_direct_mapped());
    }

    #[test]
    fn wide_sets_use_lru() {
        let c = cfg(64, 1, 64);
        let mut state = CacheState::new(c);
        for a in 0..64 {
            state.access(a);
        }
        state.access(0); // 0 becomes MRU, 1 is LRU
        assert_eq!(state.access(100), AccessOutcome::Cold);
        assert_eq!(state.access(0), AccessOutcome::Hit);
        assert_eq!(state.access(1), AccessOutcome::Replacement);
        assert_eq!(state.set_contents(0)[0], 1);
    }

    #[test]
    fn huge_addresses_are_tracked() {
        let s = run_trace(cfg(1, 1, 4), [u64::MAX - 3, u64::MAX - 7, u64::MAX - 3]);
        assert_eq!((s.cold_loads, s.replacement_loads), (2, 1));
    }
}
