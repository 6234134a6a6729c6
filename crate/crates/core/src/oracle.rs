//! Naive bottom-up evaluator over plain row sets.
//!
//! Ground truth for the engine's tests. It shares the AST and the string
//! dictionary with the engine and nothing else: no columns, no kernels, no
//! compiled plans. Each round recomputes the immediate consequence of every
//! rule from scratch by nested loops until nothing changes.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::engine::Edb;
use crate::frontend::{Program, Rule, Term};
use crate::{Dictionary, Value};

/// Relation name to set of rows.
pub type RowSet = BTreeMap<String, BTreeSet<Vec<Value>>>;

/// Per-relation lookup from `(column, value)` to the rows holding it.
struct Lookup<'a> {
    rows: Vec<&'a Vec<Value>>,
    by_col: HashMap<(usize, Value), Vec<usize>>,
}

impl<'a> Lookup<'a> {
    fn new(set: &'a BTreeSet<Vec<Value>>) -> Self {
        let rows: Vec<&Vec<Value>> = set.iter().collect();
        let mut by_col: HashMap<(usize, Value), Vec<usize>> = HashMap::new();
        for (i, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                by_col.entry((c, v)).or_default().push(i);
            }
        }
        Self { rows, by_col }
    }
}

/// A body term with constants already encoded.
#[derive(Clone)]
enum Arg {
    Var(String),
    Const(Value),
    Any,
}

fn encode_args(args: &[Term], dict: &mut Dictionary) -> Vec<Arg> {
    args.iter()
        .map(|t| match t {
            Term::Var(v) => Arg::Var(v.clone()),
            Term::Const(c) => Arg::Const(c.resolve(dict)),
            Term::Wildcard => Arg::Any,
        })
        .collect()
}

/// Head tuples produced by one application of `rule` to `rows`.
pub fn single_step(rule: &Rule, rows: &RowSet, dict: &mut Dictionary) -> BTreeSet<Vec<Value>> {
    let empty = BTreeSet::new();
    let body: Vec<Vec<Arg>> = rule.body.iter().map(|a| encode_args(&a.args, dict)).collect();
    let head = encode_args(&rule.head.args, dict);
    let lookups: Vec<Lookup> = rule
        .body
        .iter()
        .map(|a| Lookup::new(rows.get(&a.relation).unwrap_or(&empty)))
        .collect();
    let mut out = BTreeSet::new();
    let mut env: HashMap<String, Value> = HashMap::new();
    extend(rule, &body, &lookups, 0, &mut env, &head, &mut out);
    out
}

fn extend(
    rule: &Rule,
    body: &[Vec<Arg>],
    lookups: &[Lookup],
    depth: usize,
    env: &mut HashMap<String, Value>,
    head: &[Arg],
    out: &mut BTreeSet<Vec<Value>>,
) {
    if depth == body.len() {
        if rule.guards.iter().all(|g| env[&g.left] != env[&g.right]) {
            out.insert(
                head.iter()
                    .map(|a| match a {
                        Arg::Var(v) => env[v],
                        Arg::Const(c) => *c,
                        Arg::Any => unreachable!("validated heads have no wildcard"),
                    })
                    .collect(),
            );
        }
        return;
    }
    let args = &body[depth];
    let lookup = &lookups[depth];
    // narrow by the first column whose value is already known
    let known = args.iter().enumerate().find_map(|(c, a)| match a {
        Arg::Const(v) => Some((c, *v)),
        Arg::Var(x) => env.get(x).map(|&v| (c, v)),
        Arg::Any => None,
    });
    let all: Vec<usize>;
    let candidates: &[usize] = match known {
        Some(key) => lookup.by_col.get(&key).map_or(&[], Vec::as_slice),
        None => {
            all = (0..lookup.rows.len()).collect();
            &all
        }
    };
    for &i in candidates {
        let row = lookup.rows[i];
        let mut fresh = Vec::new();
        let mut ok = true;
        for (a, &v) in args.iter().zip(row.iter()) {
            match a {
                Arg::Const(c) if *c != v => ok = false,
                Arg::Var(x) => match env.get(x) {
                    Some(&bound) if bound != v => ok = false,
                    Some(_) => {}
                    None => {
                        env.insert(x.clone(), v);
                        fresh.push(x.clone());
                    }
                },
                _ => {}
            }
            if !ok {
                break;
            }
        }
        if ok {
            extend(rule, body, lookups, depth + 1, env, head, out);
        }
        for x in fresh {
            env.remove(&x);
        }
    }
}

/// Least model of a positive program: facts plus `edb`, closed under all
/// rules.
pub fn naive_evaluate(program: &Program, edb: &Edb, dict: &mut Dictionary) -> RowSet {
    let mut rows: RowSet = program
        .relations
        .keys()
        .map(|k| (k.clone(), BTreeSet::new()))
        .collect();
    for fact in &program.facts {
        let row = fact.values.iter().map(|c| c.resolve(dict)).collect();
        rows.entry(fact.relation.clone()).or_default().insert(row);
    }
    for (name, facts) in edb {
        rows.entry(name.clone())
            .or_default()
            .extend(facts.iter().cloned());
    }
    loop {
        let mut changed = false;
        let derived: Vec<(String, BTreeSet<Vec<Value>>)> = program
            .rules
            .iter()
            .map(|r| (r.head.relation.clone(), single_step(r, &rows, dict)))
            .collect();
        for (name, set) in derived {
            let target = rows.entry(name).or_default();
            for row in set {
                changed |= target.insert(row);
            }
        }
        if !changed {
            return rows;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_program;

    fn set(rows: &[&[Value]]) -> BTreeSet<Vec<Value>> {
        rows.iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn tc_path() {
        let p = parse_program(
            "reach(x,y) :- edge(x,y). reach(x,z) :- edge(x,y), reach(y,z). edge(1,2). edge(2,3).",
        )
        .unwrap();
        let out = naive_evaluate(&p, &Edb::new(), &mut Dictionary::new());
        assert_eq!(out["reach"], set(&[&[1, 2], &[1, 3], &[2, 3]]));
    }

    #[test]
    fn sg_base_rule_is_symmetric() {
        let p = parse_program(
            "sg(x,y) :- edge(p,x), edge(p,y), x != y.
             sg(x,y) :- edge(a,x), sg(a,b), edge(b,y), x != y.
             edge(0,1). edge(0,2).",
        )
        .unwrap();
        let out = naive_evaluate(&p, &Edb::new(), &mut Dictionary::new());
        assert_eq!(out["sg"], set(&[&[1, 2], &[2, 1]]));
    }

    #[test]
    fn single_step_cases() {
        let p = parse_program("reach(x,z) :- edge(x,y), reach(y,z).").unwrap();
        let mut rows = RowSet::new();
        rows.insert("edge".into(), set(&[&[1, 2]]));
        rows.insert("reach".into(), set(&[&[2, 3]]));
        let mut d = Dictionary::new();
        assert_eq!(single_step(&p.rules[0], &rows, &mut d), set(&[&[1, 3]]));
        rows.insert("reach".into(), set(&[&[5, 3]]));
        assert!(single_step(&p.rules[0], &rows, &mut d).is_empty());
    }

    #[test]
    fn constants_wildcards_and_repeats() {
        let p = parse_program("a(x) :- b(x, x, _). c(y) :- b(7, y, _).").unwrap();
        let mut rows = RowSet::new();
        rows.insert("b".into(), set(&[&[1, 1, 0], &[1, 2, 0], &[7, 4, 9]]));
        let mut d = Dictionary::new();
        assert_eq!(single_step(&p.rules[0], &rows, &mut d), set(&[&[1]]));
        assert_eq!(single_step(&p.rules[1], &rows, &mut d), set(&[&[4]]));
    }
}
