//! Running one compiled plan over fixed input versions.

use std::borrow::Cow;

use crate::column::Column;
use crate::frontend::{Binding, Output, RulePlan};
use crate::kernels::{filter_neq, filter_pairs_eq, join_values, select_eq};
use crate::primitives::{compact_indices, gather_u32};
use crate::relation::Version;
use crate::{TupleId, Value};

/// Apply the constant selections and intra-atom equalities of a scan.
fn narrow<'a>(plan: &RulePlan, atom: usize, source: &'a Version) -> Cow<'a, Version> {
    let scan = &plan.atoms[atom];
    if !scan.is_filtered() || source.is_empty() {
        return Cow::Borrowed(source);
    }
    let keeps = |id: usize| {
        scan.constants
            .iter()
            .all(|&(c, v)| source.column(c).raw()[id] == v)
            && scan
                .local_eqs
                .iter()
                .all(|&(x, y)| source.column(x).raw()[id] == source.column(y).raw()[id])
    };
    let ids: Vec<TupleId> = match scan.constants.first() {
        Some(&(c, v)) => {
            let hits = select_eq(source.column(c), v);
            let kept = compact_indices(hits.len(), |k| keeps(hits[k] as usize));
            gather_u32(&hits, &kept)
        }
        None => compact_indices(source.len(), keeps),
    };
    let map: Vec<usize> = (0..source.arity()).collect();
    Cow::Owned(source.gather_rows(&ids, &map))
}

/// Intermediate join result: for every joined atom, the tuple id it
/// contributes to each output row. `None` is the identity (only the first
/// atom, before any join).
struct Matches<'a> {
    inputs: Vec<Cow<'a, Version>>,
    ids: Vec<Option<Vec<TupleId>>>,
    len: usize,
}

impl Matches<'_> {
    fn values(&self, b: Binding) -> Cow<'_, [Value]> {
        let raw = self.inputs[b.atom].column(b.column).raw();
        match &self.ids[b.atom] {
            None => Cow::Borrowed(raw),
            Some(ids) => Cow::Owned(gather_u32(raw, ids)),
        }
    }
}

/// Evaluate `plan` once. `sources[i]` is the version read by body atom `i`.
/// The output has the head's arity and may contain duplicate rows.
pub fn execute_plan(plan: &RulePlan, sources: &[&Version]) -> Version {
    assert_eq!(sources.len(), plan.atoms.len(), "one source per body atom");
    let empty = || Version::empty(plan.head_arity);
    let inputs: Vec<Cow<'_, Version>> = sources
        .iter()
        .enumerate()
        .map(|(i, s)| narrow(plan, i, s))
        .collect();
    if inputs.iter().any(|v| v.is_empty()) {
        return empty();
    }
    let len = inputs[0].len();
    let mut m = Matches {
        ids: vec![None; inputs.len()],
        inputs,
        len,
    };

    for step in &plan.joins {
        let build = &m.inputs[step.atom];
        let mut pairs = {
            let probe = m.values(step.key.0);
            join_values(&probe, build.column(step.key.1))
        };
        for &(left, col) in &step.residual {
            if pairs.is_empty() {
                break;
            }
            let lv = m.values(left);
            pairs = filter_pairs_eq(&pairs, &lv, build.column(col).raw());
        }
        if pairs.is_empty() {
            return empty();
        }
        let a_ids = pairs.a_ids;
        for slot in m.ids.iter_mut().take(step.atom) {
            *slot = Some(match slot.take() {
                None => a_ids.clone(),
                Some(prev) => gather_u32(&prev, &a_ids),
            });
        }
        m.ids[step.atom] = Some(pairs.b_ids);
        m.len = a_ids.len();
    }

    let columns: Vec<Column> = plan
        .candidate
        .iter()
        .map(|o| match *o {
            Output::Column(b) => Column::new(m.values(b).into_owned()),
            Output::Const(v) => Column::new(vec![v; m.len]),
        })
        .collect();
    let mut cand = Version::from_aligned(columns);
    for &(i, j) in &plan.guards {
        let ids = filter_neq(&cand, i, j);
        if ids.len() < cand.len() {
            let map: Vec<usize> = (0..cand.arity()).collect();
            cand = cand.gather_rows(&ids, &map);
        }
    }
    if cand.arity() > plan.head_arity {
        cand = Version::from_aligned(cand.columns()[..plan.head_arity].to_vec());
    }
    cand
}
