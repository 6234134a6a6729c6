mod common;

use std::collections::{BTreeMap, BTreeSet};

use dsmlog::engine::{execute_plan, Edb, EvaluationState};
use dsmlog::frontend::{compile_rule, parse_program, Program};
use dsmlog::oracle::{naive_evaluate, single_step, RowSet};
use dsmlog::{evaluate, Dictionary, Value, Version};
use rand::Rng;

use common::{edge_edb, TC};

fn engine_sets(state: &EvaluationState, program: &Program) -> RowSet {
    program
        .relations
        .keys()
        .map(|k| (k.clone(), state.sorted_rows(k).unwrap().into_iter().collect()))
        .collect()
}

fn random_valid_program(rng: &mut impl Rng) -> (Program, Edb) {
    loop {
        let (text, edb) = common::random_program(rng);
        if let Ok(p) = parse_program(&text) {
            return (p, edb);
        }
    }
}

#[test]
fn semi_naive_equals_naive_on_random_programs() {
    let mut rng = common::rng(2024);
    let mut valid = 0;
    let mut attempts = 0;
    while valid < 150 {
        attempts += 1;
        let (text, edb) = common::random_program(&mut rng);
        let Ok(program) = parse_program(&text) else { continue };
        valid += 1;
        let mut d1 = Dictionary::new();
        let state = evaluate(&program, &edb, &mut d1).unwrap();
        let want = naive_evaluate(&program, &edb, &mut Dictionary::new());
        assert_eq!(engine_sets(&state, &program), want, "program:\n{text}");
    }
    assert!(attempts < valid * 3, "generator produced too many invalid programs");
}

#[test]
fn one_plan_execution_matches_single_step() {
    let mut rng = common::rng(99);
    for _ in 0..150 {
        let (program, edb) = random_valid_program(&mut rng);
        // arbitrary contents for every relation, derived ones included
        let mut rows = RowSet::new();
        for (name, &arity) in &program.relations {
            let set: BTreeSet<Vec<Value>> = match edb.get(name) {
                Some(r) => r.iter().cloned().collect(),
                None => {
                    let n = rng.gen_range(0..40);
                    common::random_rows(&mut rng, n, arity, common::Skew::Uniform(6)).into_iter().collect()
                }
            };
            rows.insert(name.clone(), set);
        }
        let versions: BTreeMap<&String, Version> = rows
            .iter()
            .map(|(k, s)| {
                let r: Vec<Vec<Value>> = s.iter().cloned().collect();
                (k, Version::decompose(program.relations[k], &r).unwrap())
            })
            .collect();
        let mut dict = Dictionary::new();
        for rule in &program.rules {
            let plan = compile_rule(rule, &program, &mut dict).unwrap();
            let sources: Vec<&Version> = rule.body.iter().map(|a| &versions[&a.relation]).collect();
            let got: BTreeSet<Vec<Value>> = execute_plan(&plan, &sources).reconstruct().into_iter().collect();
            assert_eq!(got, single_step(rule, &rows, &mut dict), "rule: {rule}");
        }
    }
}

#[test]
fn iterations_are_monotone_and_duplicate_free() {
    let mut rng = common::rng(7);
    for _ in 0..40 {
        let (program, edb) = random_valid_program(&mut rng);
        let mut state = EvaluationState::seed(&program, &edb, &mut Dictionary::new()).unwrap();
        let mut prev: BTreeMap<String, usize> = BTreeMap::new();
        let bound: usize = 1 + program.relations.values().map(|&a| 8usize.pow(a as u32)).sum::<usize>();
        while !state.is_fixpoint() {
            state.run_iteration();
            assert!(state.iterations() <= bound, "no fixpoint within {bound} iterations");
            for rel in state.relations() {
                assert!(!rel.full.has_duplicate_rows());
                let before = prev.get(rel.name()).copied().unwrap_or(0);
                assert!(rel.full.len() >= before);
                prev.insert(rel.name().to_owned(), rel.full.len());
            }
        }
    }
}

#[test]
fn tc_fixpoint_cases() {
    let p = parse_program(TC).unwrap();
    for (edges, expect, label) in [
        (common::path(20), 190, "path-20"),
        (common::cycle(7), 49, "cycle-7"),
        (vec![[1, 1]], 1, "self loop"),
        (Vec::new(), 0, "empty"),
    ] {
        let st = evaluate(&p, &edge_edb(&edges), &mut Dictionary::new()).unwrap();
        assert_eq!(st.relation("reach").unwrap().full.len(), expect, "{label}");
    }
}

#[test]
fn two_disjoint_cycles() {
    let p = parse_program(TC).unwrap();
    let mut edges = common::cycle(3);
    edges.extend(common::cycle(4).into_iter().map(|[a, b]| [a + 10, b + 10]));
    let st = evaluate(&p, &edge_edb(&edges), &mut Dictionary::new()).unwrap();
    assert_eq!(st.relation("reach").unwrap().full.len(), 9 + 16);
}

#[test]
fn same_generation_on_binary_tree() {
    let p = parse_program(common::SG).unwrap();
    let edges = common::binary_tree(3);
    let st = evaluate(&p, &edge_edb(&edges), &mut Dictionary::new()).unwrap();
    // ordered pairs of distinct nodes on the same level
    let expect: usize = (1..=3).map(|l| (1usize << l) * ((1usize << l) - 1)).sum();
    assert_eq!(st.relation("sg").unwrap().full.len(), expect);
    let naive = naive_evaluate(&p, &edge_edb(&edges), &mut Dictionary::new());
    assert_eq!(st.sorted_rows("sg").unwrap(), naive["sg"].iter().cloned().collect::<Vec<_>>());
}

#[test]
fn university_rules_match_oracle() {
    let text = "\
        memberOf(s, g) :- worksFor(s, g).\n\
        memberOf(s, g) :- undergraduateDegreeFrom(s, g), worksFor(s, d), subOrganizationOf(d, g).\n\
        subOrgTrans(a, c) :- subOrganizationOf(a, c).\n\
        subOrgTrans(a, c) :- subOrganizationOf(a, b), subOrgTrans(b, c).\n\
        inUniversity(p, u) :- memberOf(p, d), subOrgTrans(d, u), university(u).\n\
        colleague(a, b) :- worksFor(a, d), worksFor(b, d), a != b.\n\
        taughtBy(s, t) :- takesCourse(s, c), teacherOf(t, c).\n\
        advisedColleague(s, t) :- advisor(s, a), colleague(a, t).\n";
    let p = parse_program(text).unwrap();
    let mut rng = common::rng(314);
    let mut edb = Edb::new();
    let mut add = |name: &str, rows: Vec<Vec<Value>>| {
        edb.insert(name.to_string(), rows);
    };
    let pick = |rng: &mut rand_chacha::ChaCha8Rng, lo: u32, hi: u32| rng.gen_range(lo..hi);
    // universities 0..3, departments 3..15, groups 15..30, people 30..130, courses 130..160
    add("university", (0..3).map(|u| vec![u]).collect());
    let mut sub = Vec::new();
    for d in 3..15 {
        sub.push(vec![d, pick(&mut rng, 0, 3)]);
    }
    for g in 15..30 {
        sub.push(vec![g, pick(&mut rng, 3, 15)]);
    }
    add("subOrganizationOf", sub);
    add("worksFor", (0..100).map(|_| vec![pick(&mut rng, 30, 130), pick(&mut rng, 3, 30)]).collect());
    add("undergraduateDegreeFrom", (0..100).map(|_| vec![pick(&mut rng, 30, 130), pick(&mut rng, 0, 3)]).collect());
    add("takesCourse", (0..100).map(|_| vec![pick(&mut rng, 30, 130), pick(&mut rng, 130, 160)]).collect());
    add("teacherOf", (0..100).map(|_| vec![pick(&mut rng, 30, 130), pick(&mut rng, 130, 160)]).collect());
    add("advisor", (0..100).map(|_| vec![pick(&mut rng, 30, 130), pick(&mut rng, 30, 130)]).collect());
    let st = evaluate(&p, &edb, &mut Dictionary::new()).unwrap();
    let naive = naive_evaluate(&p, &edb, &mut Dictionary::new());
    assert_eq!(engine_sets(&st, &p), naive);
    assert!(!naive["inUniversity"].is_empty());
}

#[test]
fn string_constants_through_dictionary() {
    let p = parse_program(
        "parent(\"Larry\", \"Alice\"). parent(\"Alice\", \"Bob\").\n\
         ancestor(x, y) :- parent(x, y).\n\
         ancestor(x, z) :- parent(x, y), ancestor(y, z).\n\
         fromLarry(y) :- ancestor(\"Larry\", y).",
    )
    .unwrap();
    let mut dict = Dictionary::new();
    let st = evaluate(&p, &Edb::new(), &mut dict).unwrap();
    let names: BTreeSet<&str> = st
        .sorted_rows("fromLarry")
        .unwrap()
        .iter()
        .map(|r| dict.decode(r[0]).unwrap())
        .collect();
    assert_eq!(names, BTreeSet::from(["Alice", "Bob"]));
}
