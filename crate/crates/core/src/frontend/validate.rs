use std::collections::BTreeSet;

use super::ast::{Atom, Program, Rule, Term};
use super::Diagnostic;

/// Everything that keeps a parsed program from compiling. Empty iff the
/// program is positive, range-restricted, arity-consistent and free of cross
/// products under left-to-right join order.
pub fn validate_program(program: &Program) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for fact in &program.facts {
        check_arity(program, &fact.relation, fact.values.len(), fact.span, &mut out);
    }
    for rule in &program.rules {
        validate_rule(program, rule, &mut out);
    }
    out
}

fn check_arity(
    program: &Program,
    relation: &str,
    arity: usize,
    span: super::Span,
    out: &mut Vec<Diagnostic>,
) {
    match program.arity(relation) {
        Some(known) if known != arity => out.push(Diagnostic::new(
            span,
            format!("relation `{relation}` used with arity {arity}, but it has arity {known}"),
        )),
        None => out.push(Diagnostic::new(
            span,
            format!("relation `{relation}` is missing from the relation table"),
        )),
        _ => {}
    }
}

fn validate_rule(program: &Program, rule: &Rule, out: &mut Vec<Diagnostic>) {
    check_arity(program, &rule.head.relation, rule.head.arity(), rule.head.span, out);
    for a in &rule.body {
        check_arity(program, &a.relation, a.arity(), a.span, out);
    }
    if rule.body.is_empty() {
        out.push(Diagnostic::new(rule.span, "rule body needs at least one atom"));
        return;
    }

    let bound: BTreeSet<&str> = rule.body.iter().flat_map(Atom::variables).collect();
    for t in &rule.head.args {
        match t {
            Term::Var(v) if !bound.contains(v.as_str()) => out.push(Diagnostic::new(
                rule.head.span,
                format!("head variable `{v}` does not occur in the body; existential variables are not supported"),
            )),
            Term::Wildcard => out.push(Diagnostic::new(
                rule.head.span,
                "`_` cannot appear in a rule head",
            )),
            _ => {}
        }
    }
    for g in &rule.guards {
        for v in [&g.left, &g.right] {
            if !bound.contains(v.as_str()) {
                out.push(Diagnostic::new(
                    g.span,
                    format!("guard variable `{v}` does not occur in a body atom"),
                ));
            }
        }
    }

    let mut seen: BTreeSet<&str> = rule.body[0].variables().collect();
    for atom in &rule.body[1..] {
        let vars: BTreeSet<&str> = atom.variables().collect();
        if vars.is_disjoint(&seen) {
            out.push(Diagnostic::new(
                atom.span,
                format!("atom `{atom}` shares no variable with the atoms before it; cross products are not supported"),
            ));
        }
        seen.extend(vars);
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn diags(text: &str) -> Vec<Diagnostic> {
        validate_program(&parse(text).unwrap())
    }

    #[test]
    fn tc_is_clean() {
        assert!(diags("reach(x,y) :- edge(x,y). reach(x,z) :- edge(x,y), reach(y,z).").is_empty());
    }

    #[test]
    fn unbound_head_variable() {
        let d = diags("a(x, w) :- b(x).");
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("`w`"));
    }

    #[test]
    fn cross_product() {
        let d = diags("a(x,y) :- b(x), c(y).");
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("cross product"));
        assert_eq!((d[0].span.line, d[0].span.column), (1, 17));
    }

    #[test]
    fn guard_and_head_checks() {
        assert_eq!(diags("a(x) :- b(x), x != z.").len(), 1);
        assert_eq!(diags("a(_) :- b(x).").len(), 1);
        assert_eq!(diags("a(x) :- x != y.").len(), 1);
    }
}
