//! Parsing, validation and compilation of positive Datalog programs.

pub mod ast;
mod parser;
mod plan;
mod validate;

use std::fmt;

pub use ast::{Atom, Constant, Fact, Guard, Program, RelationDecl, Rule, Span, Term};
pub use parser::parse;
pub use plan::{compile_program, compile_rule, AtomScan, Binding, JoinStep, Output, RulePlan};
pub use validate::validate_program;

/// A message tied to a source position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    pub fn new(span: Span, message: impl Into<String>) -> Self {
        Self {
            span,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

/// One or more diagnostics that stop a program from being accepted.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct FrontendError {
    pub diagnostics: Vec<Diagnostic>,
}

impl FrontendError {
    pub fn new(diagnostics: Vec<Diagnostic>) -> Self {
        Self { diagnostics }
    }

    /// Diagnostics rendered as `file:line:column: message`, one per line.
    pub fn render(&self, file: &str) -> String {
        self.diagnostics
            .iter()
            .map(|d| format!("{file}:{d}"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl fmt::Display for FrontendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Parse and validate. The result is a program every rule of which compiles.
pub fn parse_program(text: &str) -> Result<Program, FrontendError> {
    let program = parse(text)?;
    let diagnostics = validate_program(&program);
    if diagnostics.is_empty() {
        Ok(program)
    } else {
        Err(FrontendError::new(diagnostics))
    }
}
