//! Semi-naive fixpoint evaluation.
//!
//! Every relation keeps FULL, DELTA and NEW versions. One iteration runs the
//! delta variants of all rules against the versions as they stood at the
//! start of the iteration, pools everything derived for a head relation into
//! its NEW, removes duplicates (inside NEW, then against FULL) and merges the
//! remaining delta into FULL exactly once.

mod exec;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

pub use exec::execute_plan;

use crate::frontend::{compile_program, FrontendError, Program, RulePlan};
use crate::kernels::{deduplicate, difference};
use crate::relation::{Relation, RelationVersion, Version};
use crate::{Dictionary, StorageError, Value};

/// Input facts per relation name.
pub type Edb = BTreeMap<String, Vec<Vec<Value>>>;

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("{0}")]
    Frontend(#[from] FrontendError),
    #[error("relation `{relation}`: {source}")]
    Storage {
        relation: String,
        source: StorageError,
    },
    #[error("facts given for relation `{0}`, which the program never mentions")]
    UnknownRelation(String),
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

/// One rule plan bound to the versions its body atoms read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanVariant {
    pub rule: usize,
    pub sources: Vec<RelationVersion>,
    /// Runs in the first iteration only (the body reads no derived relation).
    pub once: bool,
}

/// Semi-naive decomposition of one rule. For `k` body occurrences of derived
/// relations there are `k` variants; variant `i` reads occurrence `i` from
/// DELTA and everything else from FULL.
pub fn delta_rewrite(rule: usize, plan: &RulePlan, program: &Program) -> Vec<PlanVariant> {
    let idb: Vec<usize> = plan
        .atoms
        .iter()
        .enumerate()
        .filter(|(_, a)| program.is_idb(&a.relation))
        .map(|(i, _)| i)
        .collect();
    if idb.is_empty() {
        return vec![PlanVariant {
            rule,
            sources: vec![RelationVersion::Full; plan.atoms.len()],
            once: true,
        }];
    }
    idb.iter()
        .map(|&occ| PlanVariant {
            rule,
            sources: (0..plan.atoms.len())
                .map(|j| {
                    if j == occ {
                        RelationVersion::Delta
                    } else {
                        RelationVersion::Full
                    }
                })
                .collect(),
            once: false,
        })
        .collect()
}

/// What one iteration did.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IterationStats {
    pub iteration: usize,
    /// New rows merged per head relation (zero entries included).
    pub deltas: BTreeMap<String, usize>,
    /// Merges performed per relation during this iteration.
    pub merges: BTreeMap<String, usize>,
    /// FULL sizes at the end of the iteration, all relations.
    pub full_sizes: BTreeMap<String, usize>,
    /// Candidate rows produced by rule plans before any deduplication.
    pub derived: BTreeMap<String, usize>,
    pub elapsed: Duration,
}

/// Relations plus the compiled rules driving them.
#[derive(Debug, Clone)]
pub struct EvaluationState {
    relations: BTreeMap<String, Relation>,
    plans: Vec<RulePlan>,
    variants: Vec<PlanVariant>,
    iteration: usize,
    stats: Vec<IterationStats>,
    fixpoint: bool,
}

impl EvaluationState {
    /// Compile `program` and load FULL = DELTA = deduplicated facts (inline
    /// facts plus `edb`) for every relation.
    pub fn seed(program: &Program, edb: &Edb, dict: &mut Dictionary) -> Result<Self, EngineError> {
        let plans = compile_program(program, dict)?;
        if let Some(name) = edb.keys().find(|k| program.arity(k).is_none()) {
            return Err(EngineError::UnknownRelation(name.clone()));
        }
        let mut rows: BTreeMap<&str, Vec<Vec<Value>>> = BTreeMap::new();
        for fact in &program.facts {
            let row = fact.values.iter().map(|c| c.resolve(dict)).collect();
            rows.entry(&fact.relation).or_default().push(row);
        }
        let mut relations = BTreeMap::new();
        for (name, &arity) in &program.relations {
            let mut all = rows.remove(name.as_str()).unwrap_or_default();
            if let Some(extra) = edb.get(name) {
                all.extend(extra.iter().cloned());
            }
            let storage = |source| EngineError::Storage {
                relation: name.clone(),
                source,
            };
            let full = Version::decompose(arity, &all).map_err(storage)?.dedup_rows();
            full.build_indexes();
            let mut rel = Relation::new(name.clone(), arity);
            rel.delta = full.clone();
            rel.full = full;
            relations.insert(name.clone(), rel);
        }
        let variants = plans
            .iter()
            .enumerate()
            .flat_map(|(i, p)| delta_rewrite(i, p, program))
            .collect();
        Ok(Self {
            relations,
            plans,
            variants,
            iteration: 0,
            stats: Vec::new(),
            fixpoint: false,
        })
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> impl Iterator<Item = &Relation> {
        self.relations.values()
    }

    pub fn plans(&self) -> &[RulePlan] {
        &self.plans
    }

    pub fn variants(&self) -> &[PlanVariant] {
        &self.variants
    }

    /// Iterations run so far.
    pub fn iterations(&self) -> usize {
        self.iteration
    }

    pub fn stats(&self) -> &[IterationStats] {
        &self.stats
    }

    pub fn is_fixpoint(&self) -> bool {
        self.fixpoint
    }

    /// Reconstructed FULL rows of a relation, sorted.
    pub fn sorted_rows(&self, name: &str) -> Option<Vec<Vec<Value>>> {
        let mut rows = self.relations.get(name)?.full.reconstruct();
        rows.sort_unstable();
        Some(rows)
    }

    /// One semi-naive round. Returns the delta size of every head relation.
    pub fn run_iteration(&mut self) -> BTreeMap<String, usize> {
        let started = Instant::now();
        let first = self.iteration == 0;

        let mut pooled: BTreeMap<String, Vec<Version>> = BTreeMap::new();
        for variant in &self.variants {
            if variant.once && !first {
                continue;
            }
            let plan = &self.plans[variant.rule];
            let sources: Vec<&Version> = plan
                .atoms
                .iter()
                .zip(&variant.sources)
                .map(|(a, &v)| self.relations[&a.relation].version(v))
                .collect();
            let out = execute_plan(plan, &sources);
            pooled.entry(plan.target.clone()).or_default().push(out);
        }

        let mut stats = IterationStats {
            iteration: self.iteration,
            ..Default::default()
        };
        for rel in self.relations.values_mut() {
            let name = rel.name().to_owned();
            let Some(parts) = pooled.get(&name) else {
                rel.delta = Version::empty(rel.arity());
                continue;
            };
            let merges_before = rel.merge_count();
            let new = Version::concat(rel.arity(), parts);
            stats.derived.insert(name.clone(), new.len());
            rel.new = new.dedup_rows();
            let flags = deduplicate(&rel.new, &rel.full);
            rel.delta = difference(&rel.new, &flags);
            rel.delta.build_indexes();
            rel.merge_delta();
            stats.deltas.insert(name.clone(), rel.delta.len());
            stats.merges.insert(name, rel.merge_count() - merges_before);
        }
        stats.full_sizes = self
            .relations
            .iter()
            .map(|(k, r)| (k.clone(), r.full.len()))
            .collect();
        stats.elapsed = started.elapsed();
        let deltas = stats.deltas.clone();
        self.fixpoint = deltas.values().all(|&d| d == 0);
        self.stats.push(stats);
        self.iteration += 1;
        deltas
    }

    /// Iterate until an iteration merges nothing anywhere.
    pub fn run_to_fixpoint(&mut self) {
        while !self.fixpoint {
            self.run_iteration();
        }
    }
}

/// Evaluate `program` over `edb` to its least fixpoint in the current rayon
/// pool.
pub fn evaluate(program: &Program, edb: &Edb, dict: &mut Dictionary) -> Result<EvaluationState, EngineError> {
    let mut state = EvaluationState::seed(program, edb, dict)?;
    state.run_to_fixpoint();
    Ok(state)
}

/// [`evaluate`] on a dedicated pool of `workers` threads.
pub fn evaluate_with_workers(
    program: &Program,
    edb: &Edb,
    dict: &mut Dictionary,
    workers: usize,
) -> Result<EvaluationState, EngineError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| EngineError::Pool(e.to_string()))?;
    pool.install(|| evaluate(program, edb, dict))
}
