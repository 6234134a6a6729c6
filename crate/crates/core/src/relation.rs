//! Decomposed (DSM) relations.
//!
//! An n-ary relation is stored as n [`Column`]s whose positions are aligned:
//! row `i` is `(cols[0].raw[i], .., cols[n-1].raw[i])`. The position is the
//! surrogate tuple id, so no explicit id column is kept.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;

use crate::column::Column;
use crate::primitives::{compact_indices, gather_u32, MIN_PAR_LEN};
use crate::{StorageError, TupleId, Value};

/// Which of the three semi-naive versions of a relation is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelationVersion {
    Full,
    Delta,
    New,
}

impl fmt::Display for RelationVersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelationVersion::Full => "full",
            RelationVersion::Delta => "delta",
            RelationVersion::New => "new",
        })
    }
}

/// A set of aligned columns: one version of a relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Version {
    columns: Vec<Column>,
}

impl Version {
    pub fn empty(arity: usize) -> Self {
        assert!(arity >= 1, "relations have at least one column");
        Self {
            columns: (0..arity).map(|_| Column::default()).collect(),
        }
    }

    /// Build a version from raw column arrays of equal length.
    pub fn from_columns(cols: Vec<Vec<Value>>) -> Result<Self, StorageError> {
        if cols.is_empty() {
            return Err(StorageError::ZeroArity);
        }
        let len = cols[0].len();
        if let Some((j, c)) = cols.iter().enumerate().find(|(_, c)| c.len() != len) {
            return Err(StorageError::MisalignedColumns {
                column: j,
                len: c.len(),
                expected: len,
            });
        }
        Ok(Self {
            columns: cols.into_iter().map(Column::new).collect(),
        })
    }

    pub(crate) fn from_aligned(columns: Vec<Column>) -> Self {
        debug_assert!(!columns.is_empty());
        debug_assert!(columns.iter().all(|c| c.len() == columns[0].len()));
        Self { columns }
    }

    /// Split rows into aligned columns. Duplicate rows are kept.
    pub fn decompose<R: AsRef<[Value]>>(arity: usize, rows: &[R]) -> Result<Self, StorageError> {
        if arity == 0 {
            return Err(StorageError::ZeroArity);
        }
        let mut cols = vec![Vec::with_capacity(rows.len()); arity];
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != arity {
                return Err(StorageError::RowArity {
                    row: i,
                    found: row.len(),
                    expected: arity,
                });
            }
            for (col, &v) in cols.iter_mut().zip(row) {
                col.push(v);
            }
        }
        let version = Self::from_columns(cols)?;
        version.build_indexes();
        Ok(version)
    }

    /// Rows in tuple-id order.
    pub fn reconstruct(&self) -> Vec<Vec<Value>> {
        (0..self.len()).map(|i| self.row(i)).collect()
    }

    pub fn row(&self, id: usize) -> Vec<Value> {
        self.columns.iter().map(|c| c.raw()[id]).collect()
    }

    pub fn arity(&self) -> usize {
        self.columns.len()
    }

    pub fn len(&self) -> usize {
        self.columns[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &Column {
        &self.columns[j]
    }

    /// Force the lazy indexes of every column.
    pub fn build_indexes(&self) {
        self.columns.par_iter().for_each(|c| {
            c.index();
        });
    }

    /// Rows `ids` in the given order, columns reordered by `col_map`.
    /// Ids must be valid; callers check untrusted input.
    pub(crate) fn gather_rows(&self, ids: &[TupleId], col_map: &[usize]) -> Version {
        let columns = col_map
            .par_iter()
            .map(|&j| Column::new(gather_u32(self.columns[j].raw(), ids)))
            .collect();
        Version::from_aligned(columns)
    }

    /// Column-wise concatenation of versions of the same arity. Indexes are
    /// left to be built on demand.
    pub fn concat<'a, I>(arity: usize, parts: I) -> Version
    where
        I: IntoIterator<Item = &'a Version>,
    {
        let parts: Vec<&Version> = parts.into_iter().collect();
        let total: usize = parts.iter().map(|p| p.len()).sum();
        let columns = (0..arity)
            .map(|j| {
                let mut raw = Vec::with_capacity(total);
                for p in &parts {
                    raw.extend_from_slice(p.columns[j].raw());
                }
                Column::new(raw)
            })
            .collect();
        Version::from_aligned(columns)
    }

    /// `self ++ other`, keeping the ids of `self` and indexing the result.
    pub fn append(&self, other: &Version) -> Version {
        assert_eq!(self.arity(), other.arity(), "append across arities");
        let columns = self
            .columns
            .par_iter()
            .zip(other.columns.par_iter())
            .map(|(c, d)| {
                c.index();
                c.append_and_reindex(d.raw())
            })
            .collect();
        Version::from_aligned(columns)
    }

    /// [`Version::append`] reusing this version's buffers.
    pub fn append_owned(self, other: &Version) -> Version {
        assert_eq!(self.arity(), other.arity(), "append across arities");
        let columns = self
            .columns
            .into_par_iter()
            .zip(other.columns.par_iter())
            .map(|(c, d)| {
                c.index();
                c.append_owned(d.raw())
            })
            .collect();
        Version::from_aligned(columns)
    }

    fn cmp_rows(&self, a: usize, b: usize) -> Ordering {
        for c in &self.columns {
            match c.raw()[a].cmp(&c.raw()[b]) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }

    /// One representative per distinct row (the one with the smallest id), in
    /// first-occurrence order, with ids re-densified.
    pub fn dedup_rows(&self) -> Version {
        let n = self.len();
        if n <= 1 {
            return self.clone();
        }
        let first = self.first_occurrences();
        let keep = compact_indices(n, |i| first[i]);
        if keep.len() == n {
            return self.clone();
        }
        let map: Vec<usize> = (0..self.arity()).collect();
        self.gather_rows(&keep, &map)
    }

    /// `flags[i]` is true iff no row with a smaller id equals row `i`.
    fn first_occurrences(&self) -> Vec<bool> {
        let n = self.len();
        let mut first = vec![false; n];
        if self.arity() <= 3 {
            let mut keys: Vec<u128> = (0..n)
                .into_par_iter()
                .with_min_len(MIN_PAR_LEN)
                .map(|i| {
                    let mut k: u128 = 0;
                    for c in &self.columns {
                        k = (k << 32) | u128::from(c.raw()[i]);
                    }
                    (k << 32) | i as u128
                })
                .collect();
            keys.par_sort_unstable();
            let id = |k: u128| (k as u32) as usize;
            let row = |k: u128| k >> 32;
            first[id(keys[0])] = true;
            for w in keys.windows(2) {
                if row(w[0]) != row(w[1]) {
                    first[id(w[1])] = true;
                }
            }
        } else {
            let mut ids: Vec<usize> = (0..n).collect();
            ids.par_sort_unstable_by(|&a, &b| self.cmp_rows(a, b).then(a.cmp(&b)));
            first[ids[0]] = true;
            for w in ids.windows(2) {
                if self.cmp_rows(w[0], w[1]) != Ordering::Equal {
                    first[w[1]] = true;
                }
            }
        }
        first
    }

    /// True iff two rows are equal. Test and debug helper.
    pub fn has_duplicate_rows(&self) -> bool {
        self.len() > 1 && self.first_occurrences().iter().any(|f| !f)
    }
}

/// A named relation with its full, delta and new versions.
#[derive(Debug, Clone)]
pub struct Relation {
    name: String,
    arity: usize,
    pub full: Version,
    pub delta: Version,
    pub new: Version,
    merges: usize,
}

impl Relation {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Self {
            name: name.into(),
            arity,
            full: Version::empty(arity),
            delta: Version::empty(arity),
            new: Version::empty(arity),
            merges: 0,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn version(&self, v: RelationVersion) -> &Version {
        match v {
            RelationVersion::Full => &self.full,
            RelationVersion::Delta => &self.delta,
            RelationVersion::New => &self.new,
        }
    }

    /// Number of merges performed on this relation so far.
    pub fn merge_count(&self) -> usize {
        self.merges
    }

    /// Fold DELTA into FULL by concatenation and clear NEW.
    ///
    /// DELTA must already be free of duplicates, both internally and against
    /// FULL. It stays in place as the "most recent iteration" version; the
    /// appended rows take ids `|FULL|..|FULL|+|DELTA|`.
    pub fn merge_delta(&mut self) {
        debug_assert!(!self.delta.has_duplicate_rows());
        let full = std::mem::replace(&mut self.full, Version::empty(self.arity));
        self.full = full.append_owned(&self.delta);
        self.new = Version::empty(self.arity);
        self.merges += 1;
    }
}
