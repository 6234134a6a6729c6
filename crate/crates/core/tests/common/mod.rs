//! Generators and independent oracles shared by the integration suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use dsmlog::engine::Edb;
use dsmlog::Value;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TC: &str = "reach(x, y) :- edge(x, y).\nreach(x, z) :- edge(x, y), reach(y, z).\n";

pub const SG: &str = "sg(x, y) :- edge(p, x), edge(p, y), x != y.\n\
                      sg(x, y) :- edge(a, x), sg(a, b), edge(b, y), x != y.\n";

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn edge_edb(edges: &[[Value; 2]]) -> Edb {
    let mut e = Edb::new();
    e.insert("edge".into(), edges.iter().map(|r| r.to_vec()).collect());
    e
}

pub fn path(n: u32) -> Vec<[Value; 2]> {
    (0..n.saturating_sub(1)).map(|i| [i, i + 1]).collect()
}

pub fn cycle(n: u32) -> Vec<[Value; 2]> {
    (0..n).map(|i| [i, (i + 1) % n]).collect()
}

/// Directed Erdős–Rényi graph without self loops.
pub fn er_graph(rng: &mut impl Rng, n: u32, p: f64) -> Vec<[Value; 2]> {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.gen_bool(p) {
                edges.push([a, b]);
            }
        }
    }
    edges
}

/// Balanced binary tree with edges parent -> child; `depth` levels below the root.
pub fn binary_tree(depth: u32) -> Vec<[Value; 2]> {
    let nodes = (1u32 << (depth + 1)) - 1;
    (1..nodes).map(|c| [(c - 1) / 2, c]).collect()
}

/// Octahedron subdivided `levels` times. Vertices are numbered in creation
/// order (6 corners, then edge midpoints level by level); each undirected mesh
/// edge becomes one directed edge from the larger to the smaller id.
pub fn subdivided_octahedron(levels: u32) -> (usize, usize, Vec<[Value; 2]>) {
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    let mut nv = 6u32;
    for _ in 0..levels {
        let mut mid: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut m = |a: u32, b: u32| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                nv += 1;
                nv - 1
            })
        };
        for &[a, b, c] in &faces {
            let (ab, bc, ca) = (m(a, b), m(b, c), m(c, a));
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let mut edges = BTreeSet::new();
    for &[a, b, c] in &faces {
        for (x, y) in [(a, b), (b, c), (c, a)] {
            edges.insert([x.max(y), x.min(y)]);
        }
    }
    (nv as usize, faces.len(), edges.into_iter().collect())
}

/// Number of pairs `(a, b)` with a non-empty path from `a` to `b`, by one
/// breadth-first search per source.
pub fn bfs_reach_count(edges: &[[Value; 2]]) -> usize {
    let n = edges.iter().flat_map(|e| e.iter()).max().map_or(0, |&m| m as usize + 1);
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &[a, b] in edges {
        succ[a as usize].push(b as usize);
    }
    let mut mark = vec![usize::MAX; n];
    let mut queue = Vec::new();
    let mut total = 0;
    for s in 0..n {
        queue.clear();
        queue.push(s);
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            for &w in &succ[v] {
                if mark[w] != s {
                    mark[w] = s;
                    total += 1;
                    queue.push(w);
                }
            }
        }
    }
    total
}

/// Directed edge list from a text file: two integer fields per line,
/// separated by whitespace or commas. Lines starting with `%` or `#` and lines
/// with fewer than two numeric fields are skipped.
pub fn read_edge_list(text: &str) -> Vec<[Value; 2]> {
    text.lines()
        .filter(|l| !l.starts_with('%') && !l.starts_with('#'))
        .filter_map(|l| {
            let mut f = l.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty());
            Some([f.next()?.parse().ok()?, f.next()?.parse().ok()?])
        })
        .collect()
}

/// Column shapes exercised by the kernel oracles.
#[derive(Debug, Clone, Copy)]
pub enum Skew {
    Uniform(u32),
    /// 90% of the values are one repeated value.
    HeavyDup,
    /// Zipf-like: value `k` drawn with weight ~ 1/(k+1).
    Zipfish(u32),
}

pub fn column_values(rng: &mut impl Rng, len: usize, skew: Skew) -> Vec<Value> {
    match skew {
        Skew::Uniform(domain) => (0..len).map(|_| rng.gen_range(0..domain.max(1))).collect(),
        Skew::HeavyDup => {
            let hot = rng.gen_range(0..1000);
            (0..len)
                .map(|_| if rng.gen_bool(0.9) { hot } else { rng.gen_range(0..1000) })
                .collect()
        }
        Skew::Zipfish(domain) => (0..len)
            .map(|_| {
                let u: f64 = rng.gen_range(0.0..1.0);
                ((domain as f64).powf(u) - 1.0) as Value
            })
            .collect(),
    }
}

pub fn random_skew(rng: &mut impl Rng) -> Skew {
    match rng.gen_range(0..4) {
        0 => Skew::Uniform(rng.gen_range(1..50)),
        1 => Skew::Uniform(rng.gen_range(1..100_000)),
        2 => Skew::HeavyDup,
        _ => Skew::Zipfish(rng.gen_range(2..500)),
    }
}

/// All `(a, b)` with `left[a] == right[b]`, in lexicographic order.
pub fn nested_loop_join(left: &[Value], right: &[Value]) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for (a, &x) in left.iter().enumerate() {
        for (b, &y) in right.iter().enumerate() {
            if x == y {
                out.push((a as u32, b as u32));
            }
        }
    }
    out
}

pub fn sorted(mut v: Vec<(u32, u32)>) -> Vec<(u32, u32)> {
    v.sort_unstable();
    v
}

/// Random rows over a skewed value domain.
pub fn random_rows(rng: &mut impl Rng, n: usize, arity: usize, skew: Skew) -> Vec<Vec<Value>> {
    let cols: Vec<Vec<Value>> = (0..arity).map(|_| column_values(rng, n, skew)).collect();
    (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

/// Random program from the supported fragment: EDB `e1`/`e2`, IDB `i1`/`i2`,
/// 1-3 body atoms joined left to right without cross products, optional
/// constants, wildcards, repeated variables and `!=` guards. The first two
/// rules read only EDB relations so both derived relations have a base case.
pub fn random_program(rng: &mut impl Rng) -> (String, Edb) {
    let arity: BTreeMap<&str, usize> = [
        ("e1", rng.gen_range(1..=3)),
        ("e2", 2),
        ("i1", rng.gen_range(1..=3)),
        ("i2", 2),
    ]
    .into_iter()
    .collect();
    let rels = ["e1", "e2", "i1", "i2"];
    let vars = ["a", "b", "c", "d", "e"];
    let mut text = String::new();
    let nrules = rng.gen_range(2..=5);
    let mut rule_no = 0;
    while rule_no < nrules {
        let head = if rule_no < 2 { ["i1", "i2"][rule_no] } else { ["i1", "i2"][rng.gen_range(0..2)] };
        let natoms = rng.gen_range(1..=3);
        let mut seen: Vec<&str> = Vec::new();
        let mut body = Vec::new();
        for k in 0..natoms {
            let rel = if rule_no < 2 {
                ["e1", "e2"][rng.gen_range(0..2)]
            } else {
                rels[rng.gen_range(0..4)]
            };
            let n = arity[rel];
            let mut args: Vec<String> = Vec::new();
            let mut shares = k == 0;
            for c in 0..n {
                let roll = rng.gen_range(0..10);
                let needs_var = c == n - 1 && !args.iter().any(|a| vars.contains(&a.as_str()));
                let arg = if !shares && c == n - 1 {
                    let v = seen[rng.gen_range(0..seen.len())];
                    shares = true;
                    v.to_string()
                } else if needs_var {
                    vars[rng.gen_range(0..vars.len())].to_string()
                } else if roll == 0 {
                    rng.gen_range(0..4u32).to_string()
                } else if roll == 1 {
                    "_".to_string()
                } else {
                    let v = vars[rng.gen_range(0..vars.len())];
                    if seen.contains(&v) {
                        shares = true;
                    }
                    v.to_string()
                };
                args.push(arg);
            }
            for a in &args {
                if let Some(v) = vars.iter().find(|v| **v == a) {
                    if !seen.contains(v) {
                        seen.push(v);
                    }
                }
            }
            body.push(format!("{rel}({})", args.join(", ")));
        }
        let head_args: Vec<String> = (0..arity[head])
            .map(|_| {
                if rng.gen_range(0..8) == 0 {
                    rng.gen_range(0..4u32).to_string()
                } else {
                    seen[rng.gen_range(0..seen.len())].to_string()
                }
            })
            .collect();
        if seen.len() >= 2 && rng.gen_bool(0.3) {
            let mut pick = seen.clone();
            pick.shuffle(rng);
            body.push(format!("{} != {}", pick[0], pick[1]));
        }
        text.push_str(&format!("{head}({}) :- {}.\n", head_args.join(", "), body.join(", ")));
        rule_no += 1;
    }
    if rng.gen_bool(0.5) {
        text.push_str("i2(a, c) :- i2(a, b), e2(b, c).\n");
    }
    let mut edb = Edb::new();
    for rel in ["e1", "e2"] {
        let n = rng.gen_range(0..=60);
        let domain = rng.gen_range(2..8);
        let rows = random_rows(rng, n, arity[rel], Skew::Uniform(domain));
        edb.insert(rel.to_string(), rows);
    }
    // make sure both EDB relations exist in the program text
    text.push_str(&format!(
        ".decl e1({})\n.decl e2(p, q)\n",
        (0..arity["e1"]).map(|i| format!("c{i}")).collect::<Vec<_>>().join(", ")
    ));
    text.push_str(&format!(
        ".decl i1({})\n",
        (0..arity["i1"]).map(|i| format!("c{i}")).collect::<Vec<_>>().join(", ")
    ));
    (text, edb)
}
