//! Membership of NEW rows in FULL, answered column by column.
//!
//! Every column of NEW probes the matching FULL column in its own parallel
//! pass. A row with a miss in any column cannot be in FULL and is dropped
//! before the id-set stage. For the survivors, the row is present iff the
//! per-column id runs share a tuple id. Runs are sorted by id, so the check
//! walks the shortest run and binary-searches the others, stopping at the
//! first common id.

use rayon::prelude::*;

use crate::column::MatchRange;
use crate::primitives::{compact_indices, MIN_PAR_LEN};
use crate::relation::Version;
use crate::TupleId;

/// `flags[i]` is true iff row `i` of `new_ver` already occurs in `full`.
pub fn deduplicate(new_ver: &Version, full: &Version) -> Vec<bool> {
    assert_eq!(new_ver.arity(), full.arity(), "deduplicate across arities");
    let n = new_ver.len();
    let mut flags = vec![false; n];
    if n == 0 || full.is_empty() {
        return flags;
    }

    let ranges: Vec<Vec<Option<MatchRange>>> = new_ver
        .columns()
        .iter()
        .zip(full.columns())
        .map(|(nc, fc)| {
            let index = fc.index();
            nc.raw()
                .par_iter()
                .with_min_len(MIN_PAR_LEN)
                .map(|&v| index.probe(v))
                .collect()
        })
        .collect();

    let survivors = compact_indices(n, |i| ranges.iter().all(|r| r[i].is_some()));

    let hits: Vec<bool> = survivors
        .par_iter()
        .with_min_len(256)
        .map(|&i| {
            let runs: Vec<&[TupleId]> = ranges
                .iter()
                .zip(full.columns())
                .map(|(r, fc)| fc.index().ids_in(r[i as usize].expect("survivor")))
                .collect();
            runs_overlap(&runs)
        })
        .collect();

    for (&i, &hit) in survivors.iter().zip(&hits) {
        flags[i as usize] = hit;
    }
    flags
}

/// True iff every run contains some common id. Each run is sorted ascending.
fn runs_overlap(runs: &[&[TupleId]]) -> bool {
    let (short, _) = runs
        .iter()
        .enumerate()
        .min_by_key(|(_, r)| r.len())
        .expect("at least one column");
    runs[short].iter().any(|id| {
        runs.iter()
            .enumerate()
            .all(|(k, r)| k == short || r.binary_search(id).is_ok())
    })
}

/// Rows of `new_ver` whose flag is false, ids re-densified in order.
pub fn difference(new_ver: &Version, flags: &[bool]) -> Version {
    assert_eq!(new_ver.len(), flags.len(), "flags misaligned with NEW");
    let keep = compact_indices(flags.len(), |i| !flags[i]);
    if keep.len() == flags.len() {
        return new_ver.clone();
    }
    let map: Vec<usize> = (0..new_ver.arity()).collect();
    new_ver.gather_rows(&keep, &map)
}
