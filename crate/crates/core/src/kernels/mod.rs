//! Relational algebra kernels over decomposed relations.
//!
//! Joins return matched tuple ids only; values are materialized later by
//! [`project`], and only for the columns the caller asks for.

mod dedup;
mod join;

pub use dedup::{deduplicate, difference};
pub use join::{column_join, filter_pairs_eq, join_values, IdPairSet, MatchVector};

use crate::column::Column;
use crate::primitives::compact_indices;
use crate::relation::Version;
use crate::{StorageError, TupleId, Value};

/// Ids whose value equals `v`, ascending.
pub fn select_eq(col: &Column, v: Value) -> Vec<TupleId> {
    match col.probe(v) {
        // equal-value runs are already in ascending id order
        Some(r) => col.index().ids_in(r).to_vec(),
        None => Vec::new(),
    }
}

/// Materialize rows `ids` of `ver`, output column `k` taken from source
/// column `col_map[k]`. Columns may repeat or be reordered.
pub fn project(ver: &Version, ids: &[TupleId], col_map: &[usize]) -> Result<Version, StorageError> {
    if col_map.is_empty() {
        return Err(StorageError::ZeroArity);
    }
    if let Some(&j) = col_map.iter().find(|&&j| j >= ver.arity()) {
        return Err(StorageError::ColumnOutOfBounds {
            column: j,
            arity: ver.arity(),
        });
    }
    if let Some(&id) = ids.iter().find(|&&id| id as usize >= ver.len()) {
        return Err(StorageError::IdOutOfBounds { id, len: ver.len() });
    }
    Ok(ver.gather_rows(ids, col_map))
}

/// Ids of rows whose columns `i` and `j` differ.
pub fn filter_neq(ver: &Version, i: usize, j: usize) -> Vec<TupleId> {
    let (a, b) = (ver.column(i).raw(), ver.column(j).raw());
    compact_indices(ver.len(), |k| a[k] != b[k])
}

/// Set union of disjoint versions: a plain concatenation.
pub fn union_concat(full: &Version, delta: &Version) -> Version {
    full.append(delta)
}
