//! Lexer and recursive-descent parser for the rule language.
//!
//! ```text
//! program := item*
//! item    := ".decl" IDENT "(" param ("," param)* ")"
//!          | atom "."                       (ground fact)
//!          | atom ":-" literal ("," literal)* "."
//! param   := IDENT (":" IDENT)?
//! literal := atom | IDENT "!=" IDENT
//! atom    := IDENT "(" term ("," term)* ")"
//! term    := IDENT | "_" | UINT | STRING
//! ```
//!
//! `//` and `/* */` comments are skipped.

use std::collections::BTreeMap;

use super::ast::{Atom, Constant, Fact, Guard, Program, RelationDecl, Rule, Span, Term};
use super::{Diagnostic, FrontendError};
use crate::Value;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(Value),
    Str(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Decl,
    Implies,
    Neq,
    Bang,
    Colon,
    Cmp(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Decl => "`.decl`".into(),
            Tok::Implies => "`:-`".into(),
            Tok::Neq => "`!=`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Cmp(op) => format!("`{op}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next()
    }

    fn span(&self) -> Span {
        Span::new(self.line, self.column)
    }

    fn err(span: Span, message: impl Into<String>) -> Diagnostic {
        Diagnostic::new(span, message)
    }

    fn skip_trivia(&mut self) -> Result<(), Diagnostic> {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.peek2() == Some('/') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                Some('/') if self.peek2() == Some('*') => {
                    let start = self.span();
                    self.bump();
                    self.bump();
                    loop {
                        match self.bump() {
                            Some('*') if self.peek() == Some('/') => {
                                self.bump();
                                break;
                            }
                            Some(_) => {}
                            None => return Err(Self::err(start, "unterminated block comment")),
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn next_token(&mut self) -> Result<(Tok, Span), Diagnostic> {
        self.skip_trivia()?;
        let span = self.span();
        let Some(c) = self.bump() else {
            return Ok((Tok::Eof, span));
        };
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => {
                if self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
                    let word = self.word(String::new());
                    if word == "decl" {
                        Tok::Decl
                    } else {
                        return Err(Self::err(span, format!("unknown directive `.{word}`")));
                    }
                } else {
                    Tok::Dot
                }
            }
            ':' => {
                if self.peek() == Some('-') {
                    self.bump();
                    Tok::Implies
                } else {
                    Tok::Colon
                }
            }
            '!' => {
                if self.peek() == Some('=') {
                    self.bump();
                    Tok::Neq
                } else {
                    Tok::Bang
                }
            }
            '<' | '>' => {
                if self.peek() == Some('=') {
                    self.bump();
                    Tok::Cmp(if c == '<' { "<=" } else { ">=" })
                } else {
                    Tok::Cmp(if c == '<' { "<" } else { ">" })
                }
            }
            '=' => Tok::Cmp("="),
            '"' => Tok::Str(self.string(span)?),
            c if c.is_ascii_digit() => {
                let mut digits = String::from(c);
                while let Some(d) = self.peek().filter(|d| d.is_ascii_digit()) {
                    digits.push(d);
                    self.bump();
                }
                let v = digits.parse::<Value>().map_err(|_| {
                    Self::err(span, format!("integer `{digits}` does not fit in 32 bits"))
                })?;
                Tok::Int(v)
            }
            c if c.is_alphabetic() || c == '_' => Tok::Ident(self.word(String::from(c))),
            c => return Err(Self::err(span, format!("unexpected character `{c}`"))),
        };
        Ok((tok, span))
    }

    fn word(&mut self, mut s: String) -> String {
        while let Some(c) = self.peek().filter(|c| c.is_alphanumeric() || *c == '_') {
            s.push(c);
            self.bump();
        }
        s
    }

    fn string(&mut self, start: Span) -> Result<String, Diagnostic> {
        let mut s = String::new();
        loop {
            match self.bump() {
                Some('"') => return Ok(s),
                Some('\\') => {
                    let esc = self.span();
                    match self.bump() {
                        Some('n') => s.push('\n'),
                        Some('t') => s.push('\t'),
                        Some('r') => s.push('\r'),
                        Some('"') => s.push('"'),
                        Some('\\') => s.push('\\'),
                        Some(c) => return Err(Self::err(esc, format!("unknown escape `\\{c}`"))),
                        None => return Err(Self::err(start, "unterminated string literal")),
                    }
                }
                Some('\n') | None => return Err(Self::err(start, "unterminated string literal")),
                Some(c) => s.push(c),
            }
        }
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    span: Span,
    // arity and first-use position of every relation
    arities: BTreeMap<String, (usize, Span)>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Result<Self, Diagnostic> {
        let mut lexer = Lexer::new(text);
        let (tok, span) = lexer.next_token()?;
        Ok(Self {
            lexer,
            tok,
            span,
            arities: BTreeMap::new(),
        })
    }

    fn advance(&mut self) -> Result<(Tok, Span), Diagnostic> {
        let (tok, span) = self.lexer.next_token()?;
        Ok((
            std::mem::replace(&mut self.tok, tok),
            std::mem::replace(&mut self.span, span),
        ))
    }

    fn unexpected(&self, wanted: &str) -> Diagnostic {
        Diagnostic::new(
            self.span,
            format!("expected {wanted}, found {}", self.tok.describe()),
        )
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<Span, Diagnostic> {
        if self.tok == tok {
            Ok(self.advance()?.1)
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn ident(&mut self, wanted: &str) -> Result<(String, Span), Diagnostic> {
        match &self.tok {
            Tok::Ident(_) => {
                let (tok, span) = self.advance()?;
                let Tok::Ident(s) = tok else { unreachable!() };
                Ok((s, span))
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    fn record_arity(&mut self, name: &str, arity: usize, span: Span) -> Result<(), Diagnostic> {
        match self.arities.get(name) {
            Some(&(known, first)) if known != arity => Err(Diagnostic::new(
                span,
                format!(
                    "relation `{name}` used with arity {arity}, but it has arity {known} (first use at {first})"
                ),
            )),
            Some(_) => Ok(()),
            None => {
                self.arities.insert(name.to_owned(), (arity, span));
                Ok(())
            }
        }
    }

    fn program(mut self) -> Result<Program, Diagnostic> {
        let mut program = Program::default();
        while self.tok != Tok::Eof {
            if self.tok == Tok::Decl {
                let decl = self.decl()?;
                self.record_arity(&decl.name, decl.attributes.len(), decl.span)?;
                program.decls.push(decl);
                continue;
            }
            let head = self.atom()?;
            match self.tok {
                Tok::Dot => {
                    self.advance()?;
                    self.record_arity(&head.relation, head.arity(), head.span)?;
                    let fact = ground(head)?;
                    program.facts.push(fact);
                }
                Tok::Implies => {
                    self.advance()?;
                    let rule = self.rule_body(head)?;
                    self.record_arity(&rule.head.relation, rule.head.arity(), rule.head.span)?;
                    for a in &rule.body {
                        self.record_arity(&a.relation, a.arity(), a.span)?;
                    }
                    program.rules.push(rule);
                }
                _ => return Err(self.unexpected("`.` or `:-`")),
            }
        }
        program.relations = self
            .arities
            .into_iter()
            .map(|(k, (a, _))| (k, a))
            .collect();
        Ok(program)
    }

    fn decl(&mut self) -> Result<RelationDecl, Diagnostic> {
        let span = self.expect(Tok::Decl, "`.decl`")?;
        let (name, _) = self.ident("relation name")?;
        self.expect(Tok::LParen, "`(`")?;
        let mut attributes = Vec::new();
        loop {
            let (attr, _) = self.ident("attribute name")?;
            if self.tok == Tok::Colon {
                self.advance()?;
                self.ident("attribute type")?;
            }
            attributes.push(attr);
            match self.tok {
                Tok::Comma => {
                    self.advance()?;
                }
                Tok::RParen => {
                    self.advance()?;
                    break;
                }
                _ => return Err(self.unexpected("`,` or `)`")),
            }
        }
        Ok(RelationDecl {
            name,
            attributes,
            span,
        })
    }

    fn atom(&mut self) -> Result<Atom, Diagnostic> {
        let (relation, span) = self.ident("relation name")?;
        self.atom_args(relation, span)
    }

    fn atom_args(&mut self, relation: String, span: Span) -> Result<Atom, Diagnostic> {
        self.expect(Tok::LParen, "`(`")?;
        if self.tok == Tok::RParen {
            return Err(Diagnostic::new(
                span,
                format!("relation `{relation}` has no arguments; nullary relations are not supported"),
            ));
        }
        let mut args = Vec::new();
        loop {
            args.push(self.term()?);
            match self.tok {
                Tok::Comma => {
                    self.advance()?;
                }
                Tok::RParen => {
                    self.advance()?;
                    break;
                }
                _ => return Err(self.unexpected("`,` or `)`")),
            }
        }
        Ok(Atom {
            relation,
            args,
            span,
        })
    }

    fn term(&mut self) -> Result<Term, Diagnostic> {
        let term = match &self.tok {
            Tok::Ident(s) if s == "_" => Term::Wildcard,
            Tok::Ident(s) => Term::Var(s.clone()),
            Tok::Int(v) => Term::Const(Constant::Int(*v)),
            Tok::Str(s) => Term::Const(Constant::Str(s.clone())),
            _ => return Err(self.unexpected("a variable or constant")),
        };
        self.advance()?;
        Ok(term)
    }

    fn rule_body(&mut self, head: Atom) -> Result<Rule, Diagnostic> {
        let span = head.span;
        let mut body = Vec::new();
        let mut guards = Vec::new();
        loop {
            match &self.tok {
                Tok::Bang => {
                    return Err(Diagnostic::new(
                        self.span,
                        "negation is not supported; programs must be positive",
                    ))
                }
                Tok::Ident(_) => {
                    let (name, at) = self.ident("literal")?;
                    if self.tok == Tok::LParen {
                        body.push(self.atom_args(name, at)?);
                    } else {
                        guards.push(self.guard(Term::Var(name), at)?);
                    }
                }
                Tok::Int(_) | Tok::Str(_) => {
                    let at = self.span;
                    let lhs = self.term()?;
                    guards.push(self.guard(lhs, at)?);
                }
                _ => return Err(self.unexpected("a body atom or `!=` guard")),
            }
            match self.tok {
                Tok::Comma => {
                    self.advance()?;
                }
                Tok::Dot => {
                    self.advance()?;
                    break;
                }
                _ => return Err(self.unexpected("`,` or `.`")),
            }
        }
        Ok(Rule {
            head,
            body,
            guards,
            span,
        })
    }

    fn guard(&mut self, lhs: Term, span: Span) -> Result<Guard, Diagnostic> {
        match self.tok {
            Tok::Neq => {
                self.advance()?;
            }
            Tok::Cmp(op) => {
                return Err(Diagnostic::new(
                    self.span,
                    format!("comparison `{op}` is not supported; only `!=` guards are"),
                ))
            }
            _ => return Err(self.unexpected("`(` or `!=`")),
        }
        let rhs_span = self.span;
        let rhs = self.term()?;
        match (lhs, rhs) {
            (Term::Var(left), Term::Var(right)) => Ok(Guard { left, right, span }),
            (Term::Var(_), _) => Err(Diagnostic::new(
                rhs_span,
                "guards compare two variables; constants and `_` are not allowed",
            )),
            _ => Err(Diagnostic::new(
                span,
                "guards compare two variables; constants and `_` are not allowed",
            )),
        }
    }
}

fn ground(atom: Atom) -> Result<Fact, Diagnostic> {
    let mut values = Vec::with_capacity(atom.args.len());
    for t in atom.args {
        match t {
            Term::Const(c) => values.push(c),
            other => {
                return Err(Diagnostic::new(
                    atom.span,
                    format!("fact `{}` is not ground: `{other}` is not a constant", atom.relation),
                ))
            }
        }
    }
    Ok(Fact {
        relation: atom.relation,
        values,
        span: atom.span,
    })
}

/// Syntax and arity checks only; see [`super::parse_program`] for the full
/// front door.
pub fn parse(text: &str) -> Result<Program, FrontendError> {
    Parser::new(text)
        .and_then(Parser::program)
        .map_err(|d| FrontendError::new(vec![d]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err(text: &str) -> Diagnostic {
        parse(text).unwrap_err().diagnostics.remove(0)
    }

    #[test]
    fn tc_program() {
        let p = parse("reach(x,y) :- edge(x,y). reach(x,z) :- edge(x,y), reach(y,z).").unwrap();
        assert_eq!(p.rules.len(), 2);
        assert_eq!(p.arity("reach"), Some(2));
        assert_eq!(p.arity("edge"), Some(2));
        assert_eq!(p.rules[1].body[1].args[0], Term::Var("y".into()));
    }

    #[test]
    fn sg_guard() {
        let p = parse("sg(x,y) :- edge(p,x), edge(p,y), x != y.").unwrap();
        assert_eq!(p.rules[0].guards.len(), 1);
        assert_eq!(p.rules[0].guards[0].left, "x");
        assert_eq!(p.rules[0].guards[0].right, "y");
    }

    #[test]
    fn arity_mismatch() {
        let d = err("a(x) :- b(x,y,z).\nb(u,v).");
        assert_eq!((d.span.line, d.span.column), (2, 1));
        assert!(d.message.contains("arity"), "{}", d.message);
    }

    #[test]
    fn syntax_error_position() {
        let d = err("edge(1,2).\nreach(x y) :- edge(x,y).");
        assert_eq!((d.span.line, d.span.column), (2, 9));
    }

    #[test]
    fn facts_decls_comments() {
        let p = parse(
            "// comment\n.decl edge(from: number, to: number)\n/* block\n */ edge(1, 2).\nname(\"Alice\", \"a\\\"b\").",
        )
        .unwrap();
        assert_eq!(p.decls[0].attributes, vec!["from", "to"]);
        assert_eq!(p.facts.len(), 2);
        assert_eq!(p.facts[1].values[1], Constant::Str("a\"b".into()));
    }

    #[test]
    fn rejected_constructs() {
        assert!(err("a(x) :- b(x), !c(x).").message.contains("negation"));
        assert!(err("a(x) :- b(x), x < 3.").message.contains("only `!=`"));
        assert!(err("a(x) :- b(x), x != 3.").message.contains("two variables"));
        assert!(err("a(x).").message.contains("not ground"));
        assert!(err("a() :- b(1).").message.contains("nullary"));
        assert!(err("a(4294967296).").message.contains("32 bits"));
        assert!(err("a(1) :- b(1)").message.contains("end of input"));
    }
}
