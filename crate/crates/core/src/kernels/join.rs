//! Two-phase hash join over one column of each side.
//!
//! Phase one probes the build side's unique map for every probe value, drops
//! misses, and reduces the run lengths to the exact output size. Phase two
//! allocates the output once, turns the run lengths into output offsets with
//! an exclusive scan, and fills the output in equal-sized chunks: each chunk
//! finds the run owning its first slot by binary search over the offsets and
//! then walks forward. Writers own disjoint slices, so the result is the same
//! for any number of workers.

use rayon::prelude::*;

use crate::column::{Column, MatchRange};
use crate::primitives::{compact_indices, exclusive_scan, MIN_PAR_LEN};
use crate::{TupleId, Value};

/// Matched tuple-id pairs of a join, aligned by position.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdPairSet {
    pub a_ids: Vec<TupleId>,
    pub b_ids: Vec<TupleId>,
}

impl IdPairSet {
    pub fn len(&self) -> usize {
        self.a_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a_ids.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (TupleId, TupleId)> + '_ {
        self.a_ids.iter().copied().zip(self.b_ids.iter().copied())
    }
}

/// Phase-one output: the non-empty build-side runs and the probe ids that hit
/// them, aligned by position.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatchVector {
    pub ranges: Vec<MatchRange>,
    pub matched: Vec<TupleId>,
}

impl MatchVector {
    /// Probe `build` with every value of `probe`.
    pub fn count_phase(probe: &[Value], build: &Column) -> MatchVector {
        if probe.is_empty() || build.is_empty() {
            return MatchVector::default();
        }
        let index = build.index();
        let hits: Vec<Option<MatchRange>> = probe
            .par_iter()
            .with_min_len(MIN_PAR_LEN)
            .map(|&v| index.probe(v))
            .collect();
        let matched = compact_indices(hits.len(), |x| hits[x].is_some());
        let ranges = matched
            .par_iter()
            .with_min_len(MIN_PAR_LEN)
            .map(|&x| hits[x as usize].expect("kept only hits"))
            .collect();
        MatchVector { ranges, matched }
    }

    /// Exact number of output pairs.
    pub fn total_size(&self) -> usize {
        self.ranges
            .par_iter()
            .with_min_len(MIN_PAR_LEN)
            .map(|r| r.count)
            .sum()
    }

    /// Output offset of every run (exclusive scan of the run lengths).
    pub fn offsets(&self) -> (Vec<usize>, usize) {
        let counts: Vec<usize> = self.ranges.iter().map(|r| r.count).collect();
        exclusive_scan(&counts)
    }

    /// Run owning output slot `n`: the `j` with `pos_buf[j] <= n < pos_buf[j+1]`,
    /// where the slot past the last run is `total`.
    pub fn locate(pos_buf: &[usize], n: usize) -> usize {
        pos_buf.partition_point(|&p| p <= n) - 1
    }

    /// The pair written at output slot `n`.
    pub fn resolve(&self, build: &Column, pos_buf: &[usize], n: usize) -> (TupleId, TupleId) {
        let j = Self::locate(pos_buf, n);
        let r = self.ranges[j];
        (self.matched[j], build.sorted_idx()[r.start + (n - pos_buf[j])])
    }

    /// Phase two: materialize the pairs into a single pre-sized allocation.
    pub fn write_phase(&self, build: &Column) -> IdPairSet {
        let (pos_buf, total) = self.offsets();
        let mut out = IdPairSet {
            a_ids: vec![0; total],
            b_ids: vec![0; total],
        };
        if total == 0 {
            return out;
        }
        let sorted = build.sorted_idx();
        let workers = rayon::current_num_threads().max(1);
        let chunk = (total / (workers * 4)).max(MIN_PAR_LEN);
        out.a_ids
            .par_chunks_mut(chunk)
            .zip(out.b_ids.par_chunks_mut(chunk))
            .enumerate()
            .for_each(|(c, (a_out, b_out))| {
                let first = c * chunk;
                let mut j = Self::locate(&pos_buf, first);
                for (k, (a, b)) in a_out.iter_mut().zip(b_out.iter_mut()).enumerate() {
                    let n = first + k;
                    while j + 1 < pos_buf.len() && pos_buf[j + 1] <= n {
                        j += 1;
                    }
                    let r = self.ranges[j];
                    *a = self.matched[j];
                    *b = sorted[r.start + (n - pos_buf[j])];
                }
            });
        out
    }
}

/// Join a probe value array against an indexed build column. `a_ids` index
/// into `probe`, `b_ids` are tuple ids of `build`.
pub fn join_values(probe: &[Value], build: &Column) -> IdPairSet {
    MatchVector::count_phase(probe, build).write_phase(build)
}

/// `{(a, b) : probe_col.raw[a] = build_col.raw[b]}`.
pub fn column_join(probe_col: &Column, build_col: &Column) -> IdPairSet {
    join_values(probe_col.raw(), build_col)
}

/// Keep the pairs whose residual columns agree: `left[a] == right[b]`.
pub fn filter_pairs_eq(pairs: &IdPairSet, left: &[Value], right: &[Value]) -> IdPairSet {
    let keep = compact_indices(pairs.len(), |k| {
        left[pairs.a_ids[k] as usize] == right[pairs.b_ids[k] as usize]
    });
    if keep.len() == pairs.len() {
        return pairs.clone();
    }
    IdPairSet {
        a_ids: crate::primitives::gather_u32(&pairs.a_ids, &keep),
        b_ids: crate::primitives::gather_u32(&pairs.b_ids, &keep),
    }
}
