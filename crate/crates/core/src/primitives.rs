//! Data-parallel building blocks shared by the kernels.
//!
//! Everything here follows the count-then-write shape: a sizing pass, one
//! allocation, then writers that each own a disjoint slice of the output.
//! Results never depend on how rayon splits the work.

use rayon::prelude::*;

/// Below this many elements a kernel is not worth splitting.
pub(crate) const MIN_PAR_LEN: usize = 4096;

/// Exclusive prefix sum. `out[i] = sum(counts[..i])`; returns the offsets and
/// the grand total.
pub fn exclusive_scan(counts: &[usize]) -> (Vec<usize>, usize) {
    let mut offsets = Vec::with_capacity(counts.len());
    let mut acc = 0usize;
    for &c in counts {
        offsets.push(acc);
        acc += c;
    }
    (offsets, acc)
}

/// Number of blocks used for block-wise compaction of `len` items.
fn block_len(len: usize) -> usize {
    let workers = rayon::current_num_threads().max(1);
    (len / (workers * 4)).max(MIN_PAR_LEN)
}

/// Keep the indices `i` for which `keep(i)` holds, in ascending order.
///
/// Each block counts its survivors, an exclusive scan assigns every block its
/// output offset, and blocks write their survivors into disjoint regions.
pub fn compact_indices<F>(len: usize, keep: F) -> Vec<u32>
where
    F: Fn(usize) -> bool + Sync,
{
    if len == 0 {
        return Vec::new();
    }
    let block = block_len(len);
    let nblocks = len.div_ceil(block);
    let flags: Vec<bool> = (0..len)
        .into_par_iter()
        .with_min_len(MIN_PAR_LEN)
        .map(&keep)
        .collect();
    let counts: Vec<usize> = flags
        .par_chunks(block)
        .map(|c| c.iter().filter(|&&f| f).count())
        .collect();
    let (offsets, total) = exclusive_scan(&counts);
    let mut out = vec![0u32; total];
    let mut slices = Vec::with_capacity(nblocks);
    let mut rest = out.as_mut_slice();
    for &c in &counts {
        let (head, tail) = rest.split_at_mut(c);
        slices.push(head);
        rest = tail;
    }
    slices
        .into_par_iter()
        .zip(flags.par_chunks(block))
        .enumerate()
        .for_each(|(b, (dst, fl))| {
            let base = b * block;
            let mut k = 0;
            for (i, &f) in fl.iter().enumerate() {
                if f {
                    dst[k] = (base + i) as u32;
                    k += 1;
                }
            }
        });
    debug_assert_eq!(offsets.len(), nblocks);
    out
}

/// `out[i] = src[idx[i]]` for a trusted index array.
pub(crate) fn gather_u32(src: &[u32], idx: &[u32]) -> Vec<u32> {
    idx.par_iter()
        .with_min_len(MIN_PAR_LEN)
        .map(|&i| src[i as usize])
        .collect()
}
