//! The single-attribute storage unit.
//!
//! A [`Column`] holds three layers:
//!
//! * the raw value array, in tuple-insertion order and never compressed;
//! * the sorted indices, a permutation of tuple ids ordered by value, with
//!   equal values ordered by ascending tuple id;
//! * the unique map, from each distinct value to the [`MatchRange`] of its run
//!   inside the sorted indices.
//!
//! The two index layers are built on first use and are immutable afterwards,
//! so a column can be shared freely between readers.

use std::sync::OnceLock;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::primitives::MIN_PAR_LEN;
use crate::{StorageError, TupleId, Value};

/// A run of equal values inside a column's sorted indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MatchRange {
    pub start: usize,
    pub count: usize,
}

impl MatchRange {
    pub fn new(start: usize, count: usize) -> Self {
        Self { start, count }
    }

    pub fn end(&self) -> usize {
        self.start + self.count
    }
}

/// Sorted indices plus the unique map of one column.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ColumnIndex {
    sorted: Vec<TupleId>,
    unique: FxHashMap<Value, MatchRange>,
    // distinct values in ascending order; lets appends merge run by run
    keys: Vec<Value>,
}

impl ColumnIndex {
    pub fn sorted_idx(&self) -> &[TupleId] {
        &self.sorted
    }

    pub fn unique_idx(&self) -> &FxHashMap<Value, MatchRange> {
        &self.unique
    }

    /// Distinct values, ascending.
    pub fn distinct_values(&self) -> &[Value] {
        &self.keys
    }

    pub fn probe(&self, v: Value) -> Option<MatchRange> {
        self.unique.get(&v).copied()
    }

    /// Tuple ids whose value lies in `range`, ascending.
    pub fn ids_in(&self, range: MatchRange) -> &[TupleId] {
        &self.sorted[range.start..range.end()]
    }
}

/// Build the sorted indices and unique map of a raw value array.
///
/// Ties are broken by tuple id, so the result is a pure function of `raw`.
pub fn build_index(raw: &[Value]) -> ColumnIndex {
    assert!(
        raw.len() <= TupleId::MAX as usize,
        "column length exceeds the tuple id domain"
    );
    let mut packed: Vec<u64> = raw
        .par_iter()
        .with_min_len(MIN_PAR_LEN)
        .enumerate()
        .map(|(id, &v)| (u64::from(v) << 32) | id as u64)
        .collect();
    packed.par_sort_unstable();

    let sorted: Vec<TupleId> = packed
        .par_iter()
        .with_min_len(MIN_PAR_LEN)
        .map(|&k| k as TupleId)
        .collect();

    let mut keys = Vec::new();
    let mut unique = FxHashMap::default();
    let mut i = 0;
    while i < packed.len() {
        let v = (packed[i] >> 32) as Value;
        let mut j = i + 1;
        while j < packed.len() && (packed[j] >> 32) as Value == v {
            j += 1;
        }
        keys.push(v);
        unique.insert(v, MatchRange::new(i, j - i));
        i = j;
    }
    ColumnIndex {
        sorted,
        unique,
        keys,
    }
}

/// One decomposed attribute of a relation version.
#[derive(Debug, Clone, Default)]
pub struct Column {
    raw: Vec<Value>,
    index: OnceLock<ColumnIndex>,
}

impl PartialEq for Column {
    fn eq(&self, other: &Self) -> bool {
        self.raw == other.raw
    }
}

impl Eq for Column {}

impl From<Vec<Value>> for Column {
    fn from(raw: Vec<Value>) -> Self {
        Self::new(raw)
    }
}

impl Column {
    /// Wrap a raw array. Indexes are built lazily on the first probe.
    pub fn new(raw: Vec<Value>) -> Self {
        Self {
            raw,
            index: OnceLock::new(),
        }
    }

    /// Wrap a raw array and build its indexes immediately.
    pub fn indexed(raw: Vec<Value>) -> Self {
        let col = Self::new(raw);
        col.index();
        col
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn raw(&self) -> &[Value] {
        &self.raw
    }

    pub fn into_raw(self) -> Vec<Value> {
        self.raw
    }

    pub fn is_indexed(&self) -> bool {
        self.index.get().is_some()
    }

    pub fn index(&self) -> &ColumnIndex {
        self.index.get_or_init(|| build_index(&self.raw))
    }

    pub fn sorted_idx(&self) -> &[TupleId] {
        self.index().sorted_idx()
    }

    pub fn unique_idx(&self) -> &FxHashMap<Value, MatchRange> {
        self.index().unique_idx()
    }

    /// Range of sorted-index positions holding `v`; `None` when `v` is absent.
    pub fn probe(&self, v: Value) -> Option<MatchRange> {
        if self.raw.is_empty() {
            return None;
        }
        self.index().probe(v)
    }

    /// `out[i] = raw[ids[i]]`.
    pub fn gather(&self, ids: &[TupleId]) -> Result<Vec<Value>, StorageError> {
        if let Some(&bad) = ids.par_iter().find_any(|&&id| id as usize >= self.raw.len()) {
            return Err(StorageError::IdOutOfBounds {
                id: bad,
                len: self.raw.len(),
            });
        }
        Ok(crate::primitives::gather_u32(&self.raw, ids))
    }

    /// Append `new_values` as tuple ids `len..len+new_values.len()` and bring
    /// the indexes up to date.
    ///
    /// Existing ids never move. When the old indexes exist they are merged run
    /// by run with the indexed delta instead of re-sorting everything; the
    /// result is identical to [`build_index`] over the concatenated array.
    pub fn append_and_reindex(&self, new_values: &[Value]) -> Column {
        if new_values.is_empty() {
            return self.clone();
        }
        self.clone().append_owned(new_values)
    }

    /// [`Column::append_and_reindex`] reusing this column's raw buffer.
    pub fn append_owned(mut self, new_values: &[Value]) -> Column {
        if new_values.is_empty() {
            return self;
        }
        assert!(
            self.raw.len() + new_values.len() <= TupleId::MAX as usize,
            "column length exceeds the tuple id domain"
        );
        let base = self.raw.len() as TupleId;
        self.raw.extend_from_slice(new_values);
        let Some(old) = self.index.take() else {
            return self;
        };
        let delta = build_index(new_values);
        let merged = merge_indexes(&old, &delta, base);
        drop(old);
        Column {
            raw: self.raw,
            index: OnceLock::from(merged),
        }
    }
}

/// Merge the index of an existing column with the index of an appended block
/// whose ids are offset by `base`. Every appended id exceeds every old id, so
/// within a run the old ids come first.
fn merge_indexes(old: &ColumnIndex, delta: &ColumnIndex, base: TupleId) -> ColumnIndex {
    let mut keys = Vec::with_capacity(old.keys.len() + delta.keys.len());
    let (mut i, mut j) = (0, 0);
    while i < old.keys.len() || j < delta.keys.len() {
        let take_old = j == delta.keys.len()
            || (i < old.keys.len() && old.keys[i] <= delta.keys[j]);
        let take_new = i == old.keys.len()
            || (j < delta.keys.len() && delta.keys[j] <= old.keys[i]);
        if take_old {
            keys.push(old.keys[i]);
            i += 1;
            if take_new {
                j += 1;
            }
        } else {
            keys.push(delta.keys[j]);
            j += 1;
        }
    }

    let total = old.sorted.len() + delta.sorted.len();
    let mut unique = FxHashMap::with_capacity_and_hasher(keys.len(), Default::default());
    let mut runs = Vec::with_capacity(keys.len());
    let mut start = 0;
    for &k in &keys {
        let o = old.probe(k);
        let d = delta.probe(k);
        let count = o.map_or(0, |r| r.count) + d.map_or(0, |r| r.count);
        unique.insert(k, MatchRange::new(start, count));
        runs.push((o, d));
        start += count;
    }
    debug_assert_eq!(start, total);

    let mut sorted = vec![0 as TupleId; total];
    let mut slices = Vec::with_capacity(runs.len());
    let mut rest = sorted.as_mut_slice();
    for &(o, d) in &runs {
        let n = o.map_or(0, |r| r.count) + d.map_or(0, |r| r.count);
        let (head, tail) = rest.split_at_mut(n);
        slices.push(head);
        rest = tail;
    }
    slices
        .into_par_iter()
        .zip(runs.par_iter())
        .with_min_len(64)
        .for_each(|(dst, &(o, d))| {
            let mut k = 0;
            if let Some(r) = o {
                dst[..r.count].copy_from_slice(old.ids_in(r));
                k = r.count;
            }
            if let Some(r) = d {
                for (slot, &id) in dst[k..].iter_mut().zip(delta.ids_in(r)) {
                    *slot = id + base;
                }
            }
        });

    ColumnIndex {
        sorted,
        unique,
        keys,
    }
}
