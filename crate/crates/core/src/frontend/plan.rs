//! Rule compilation to relational algebra plans.
//!
//! Body atoms are joined left to right. Each atom is first narrowed by its
//! constants (equality selection) and by variables repeated inside the atom.
//! A join step hashes on the first variable the new atom shares with the
//! atoms before it; any further shared variables become residual equality
//! filters on the matched pairs. The head is then projected, together with
//! any guard-only variables, `!=` guards are applied, and the guard-only
//! columns are dropped.

use std::collections::HashMap;
use std::fmt;

use super::ast::{Program, Rule, Term};
use super::{validate_program, Diagnostic};
use crate::{Dictionary, Value};

/// Column `column` of body atom `atom`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Binding {
    pub atom: usize,
    pub column: usize,
}

impl Binding {
    fn new(atom: usize, column: usize) -> Self {
        Self { atom, column }
    }
}

/// Per-atom pre-join narrowing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomScan {
    pub relation: String,
    pub arity: usize,
    /// `(column, value)` pairs the atom must match.
    pub constants: Vec<(usize, Value)>,
    /// Column pairs that must agree (a variable repeated inside the atom).
    pub local_eqs: Vec<(usize, usize)>,
}

impl AtomScan {
    pub fn is_filtered(&self) -> bool {
        !self.constants.is_empty() || !self.local_eqs.is_empty()
    }
}

/// Join the accumulated left side with body atom `atom`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinStep {
    pub atom: usize,
    /// Left-side column hashed against column `key.1` of the new atom.
    pub key: (Binding, usize),
    /// Further `(left, right column)` equalities.
    pub residual: Vec<(Binding, usize)>,
}

/// Source of one projected column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Output {
    Column(Binding),
    Const(Value),
}

/// Compiled form of one rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RulePlan {
    pub target: String,
    pub atoms: Vec<AtomScan>,
    pub joins: Vec<JoinStep>,
    /// Head columns first, then any guard variable missing from the head.
    pub candidate: Vec<Output>,
    /// `!=` pairs over candidate columns.
    pub guards: Vec<(usize, usize)>,
    pub head_arity: usize,
}

impl RulePlan {
    /// Relations read by the body, in atom order.
    pub fn body_relations(&self) -> impl Iterator<Item = &str> {
        self.atoms.iter().map(|a| a.relation.as_str())
    }
}

impl fmt::Display for RulePlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |b: &Binding| format!("{}#{}.col{}", self.atoms[b.atom].relation, b.atom, b.column);
        for (i, a) in self.atoms.iter().enumerate() {
            write!(f, "scan {}#{i}", a.relation)?;
            for (c, v) in &a.constants {
                write!(f, " col{c}={v}")?;
            }
            for (x, y) in &a.local_eqs {
                write!(f, " col{x}=col{y}")?;
            }
            writeln!(f)?;
        }
        for j in &self.joins {
            write!(
                f,
                "join {}#{} on {} = col{}",
                self.atoms[j.atom].relation,
                j.atom,
                name(&j.key.0),
                j.key.1
            )?;
            for (b, c) in &j.residual {
                write!(f, ", {} = col{c}", name(b))?;
            }
            writeln!(f)?;
        }
        let cols: Vec<String> = self
            .candidate
            .iter()
            .map(|o| match o {
                Output::Column(b) => name(b),
                Output::Const(v) => v.to_string(),
            })
            .collect();
        writeln!(f, "project {}({})", self.target, cols.join(", "))?;
        for (i, j) in &self.guards {
            writeln!(f, "filter col{i} != col{j}")?;
        }
        Ok(())
    }
}

/// Compile one validated rule. String constants are encoded through `dict`.
pub fn compile_rule(rule: &Rule, program: &Program, dict: &mut Dictionary) -> Result<RulePlan, Diagnostic> {
    if rule.body.is_empty() {
        return Err(Diagnostic::new(rule.span, "rule body needs at least one atom"));
    }
    let mut bound: HashMap<&str, Binding> = HashMap::new();
    let mut atoms = Vec::with_capacity(rule.body.len());
    let mut joins = Vec::new();

    for (i, atom) in rule.body.iter().enumerate() {
        let arity = program.arity(&atom.relation).unwrap_or(atom.arity());
        if arity != atom.arity() {
            return Err(Diagnostic::new(
                atom.span,
                format!("relation `{}` used with arity {}, but it has arity {arity}", atom.relation, atom.arity()),
            ));
        }
        let mut scan = AtomScan {
            relation: atom.relation.clone(),
            arity,
            constants: Vec::new(),
            local_eqs: Vec::new(),
        };
        let mut key = None;
        let mut residual = Vec::new();
        let mut local: HashMap<&str, usize> = HashMap::new();
        for (c, t) in atom.args.iter().enumerate() {
            match t {
                Term::Const(k) => scan.constants.push((c, k.resolve(dict))),
                Term::Wildcard => {}
                Term::Var(v) => {
                    if let Some(&first) = local.get(v.as_str()) {
                        scan.local_eqs.push((first, c));
                        continue;
                    }
                    local.insert(v, c);
                    if let Some(&left) = bound.get(v.as_str()) {
                        if key.is_none() {
                            key = Some((left, c));
                        } else {
                            residual.push((left, c));
                        }
                    }
                }
            }
        }
        if i > 0 {
            let Some(key) = key else {
                return Err(Diagnostic::new(
                    atom.span,
                    format!("atom `{atom}` shares no variable with the atoms before it; cross products are not supported"),
                ));
            };
            joins.push(JoinStep {
                atom: i,
                key,
                residual,
            });
        }
        for (v, c) in local {
            bound.entry(v).or_insert(Binding::new(i, c));
        }
        atoms.push(scan);
    }

    let lookup = |v: &str, span| {
        bound
            .get(v)
            .copied()
            .ok_or_else(|| Diagnostic::new(span, format!("variable `{v}` does not occur in a body atom")))
    };

    let mut candidate = Vec::with_capacity(rule.head.arity());
    let mut by_var: HashMap<&str, usize> = HashMap::new();
    for t in &rule.head.args {
        match t {
            Term::Var(v) => {
                by_var.entry(v).or_insert(candidate.len());
                candidate.push(Output::Column(lookup(v, rule.head.span)?));
            }
            Term::Const(k) => candidate.push(Output::Const(k.resolve(dict))),
            Term::Wildcard => {
                return Err(Diagnostic::new(rule.head.span, "`_` cannot appear in a rule head"))
            }
        }
    }
    let head_arity = candidate.len();
    let mut guards = Vec::with_capacity(rule.guards.len());
    for g in &rule.guards {
        let mut col = |v: &'_ str| -> Result<usize, Diagnostic> {
            if let Some(&c) = by_var.get(v) {
                return Ok(c);
            }
            let b = lookup(v, g.span)?;
            candidate.push(Output::Column(b));
            by_var.insert(bound.get_key_value(v).map(|(k, _)| *k).unwrap_or_default(), candidate.len() - 1);
            Ok(candidate.len() - 1)
        };
        let l = col(&g.left)?;
        let r = col(&g.right)?;
        guards.push((l, r));
    }

    Ok(RulePlan {
        target: rule.head.relation.clone(),
        atoms,
        joins,
        candidate,
        guards,
        head_arity,
    })
}

/// Validate and compile every rule of `program`.
pub fn compile_program(program: &Program, dict: &mut Dictionary) -> Result<Vec<RulePlan>, super::FrontendError> {
    let diagnostics = validate_program(program);
    if !diagnostics.is_empty() {
        return Err(super::FrontendError::new(diagnostics));
    }
    program
        .rules
        .iter()
        .map(|r| compile_rule(r, program, dict))
        .collect::<Result<_, _>>()
        .map_err(|d| super::FrontendError::new(vec![d]))
}
