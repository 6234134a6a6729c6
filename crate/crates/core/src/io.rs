//! Tab-separated fact files.
//!
//! A file is read in one of two modes, picked from its first line: if every
//! field there is a plain unsigned integer the whole file is integer-coded,
//! otherwise every field of the file goes through the string dictionary.
//! Dumps are sorted so that outputs diff cleanly.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::frontend::{Constant, Program, Term};
use crate::{Dictionary, Value};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: expected {expected} fields, found {found}")]
    FieldCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: integer `{field}` does not fit in 32 bits")]
    Overflow { line: usize, field: String },
    #[error("line {line}: `{field}` is not an unsigned integer, but the file is integer-coded")]
    NotInteger { line: usize, field: String },
    #[error("line {line}: bad escape in `{field}`")]
    BadEscape { line: usize, field: String },
}

/// How the fields of a fact file were turned into values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    Integer,
    Dictionary,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedFacts {
    pub rows: Vec<Vec<Value>>,
    pub encoding: Encoding,
}

fn is_integer_like(field: &str) -> bool {
    !field.is_empty() && field.bytes().all(|b| b.is_ascii_digit())
}

/// Undo `\t`, `\n`, `\r` and `\\` escapes.
pub fn unescape_field(field: &str) -> Option<String> {
    if !field.contains('\\') {
        return Some(field.to_owned());
    }
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next()? {
            't' => out.push('\t'),
            'n' => out.push('\n'),
            'r' => out.push('\r'),
            '\\' => out.push('\\'),
            _ => return None,
        }
    }
    Some(out)
}

pub fn escape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\\' => out.push_str("\\\\"),
            c => out.push(c),
        }
    }
    out
}

/// Parse fact text. Blank lines are skipped; `\r\n` endings are accepted.
pub fn parse_facts(text: &str, arity: usize, dict: &mut Dictionary) -> Result<LoadedFacts, IoError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.is_empty())
        .peekable();
    let encoding = match lines.peek() {
        Some((_, first)) if first.split('\t').all(is_integer_like) => Encoding::Integer,
        Some(_) => Encoding::Dictionary,
        None => Encoding::Integer,
    };
    let mut rows = Vec::new();
    for (line, text) in lines {
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() != arity {
            return Err(IoError::FieldCount {
                line,
                expected: arity,
                found: fields.len(),
            });
        }
        let mut row = Vec::with_capacity(arity);
        for f in fields {
            let v = match encoding {
                Encoding::Integer => {
                    if !is_integer_like(f) {
                        return Err(IoError::NotInteger {
                            line,
                            field: f.to_owned(),
                        });
                    }
                    f.parse::<Value>().map_err(|_| IoError::Overflow {
                        line,
                        field: f.to_owned(),
                    })?
                }
                Encoding::Dictionary => {
                    let s = unescape_field(f).ok_or_else(|| IoError::BadEscape {
                        line,
                        field: f.to_owned(),
                    })?;
                    dict.encode(&s)
                }
            };
            row.push(v);
        }
        rows.push(row);
    }
    Ok(LoadedFacts { rows, encoding })
}

/// Read `path` as a fact file of the given arity.
pub fn load_facts(path: &Path, arity: usize, dict: &mut Dictionary) -> Result<LoadedFacts, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_facts(&text, arity, dict)
}

/// Rows as sorted TSV text. With `decode`, values are printed through the
/// dictionary (values it does not know are printed as numbers).
pub fn format_rows(rows: &[Vec<Value>], dict: &Dictionary, decode: bool) -> String {
    let mut lines: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|&v| match (decode, dict.decode(v)) {
                    (true, Some(s)) => escape_field(s),
                    _ => v.to_string(),
                })
                .collect()
        })
        .collect();
    if decode {
        lines.sort();
    } else {
        // numeric order for integer relations
        lines.sort_by(|a, b| {
            let key = |r: &Vec<String>| r.iter().map(|f| f.parse::<u64>().unwrap_or(u64::MAX)).collect::<Vec<_>>();
            key(a).cmp(&key(b))
        });
    }
    lines.dedup();
    let mut out = String::new();
    for l in lines {
        out.push_str(&l.join("\t"));
        out.push('\n');
    }
    out
}

/// Write the rows of a relation to `path` as sorted TSV.
pub fn dump_relation(rows: &[Vec<Value>], dict: &Dictionary, decode: bool, path: &Path) -> Result<(), IoError> {
    fs::write(path, format_rows(rows, dict, decode)).map_err(|source| IoError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Relations whose values should be decoded through the dictionary: those
/// loaded in dictionary mode, those with string constants in facts, and
/// everything derived from them.
pub fn string_relations(program: &Program, loaded: &BTreeSet<String>) -> BTreeSet<String> {
    let mut out = loaded.clone();
    for f in &program.facts {
        if f.values.iter().any(|c| matches!(c, Constant::Str(_))) {
            out.insert(f.relation.clone());
        }
    }
    let has_str = |args: &[Term]| args.iter().any(|t| matches!(t, Term::Const(Constant::Str(_))));
    loop {
        let before = out.len();
        for r in &program.rules {
            if has_str(&r.head.args)
                || r.body.iter().any(|a| out.contains(&a.relation) || has_str(&a.args))
            {
                out.insert(r.head.relation.clone());
            }
        }
        if out.len() == before {
            return out;
        }
    }
}
