//! A column-oriented Datalog engine.
//!
//! Relations are stored decomposed: one [`Column`] per attribute, each with a
//! raw value array, a value-sorted permutation of tuple ids and a map from
//! every distinct value to its run in that permutation. Positive Datalog
//! rules are compiled to relational algebra plans (selection, projection,
//! two-phase hash join, inequality filters) and evaluated semi-naively: every
//! iteration runs all rules against the latest delta, pools the results per
//! head relation, removes rows already known through a column-wise
//! membership check, and appends what is left to the full relation.
//!
//! ```
//! use dsmlog::{evaluate, frontend::parse_program, Dictionary};
//!
//! let program = parse_program(
//!     "edge(1,2). edge(2,3).
//!      reach(x,y) :- edge(x,y).
//!      reach(x,z) :- edge(x,y), reach(y,z).",
//! )
//! .unwrap();
//! let mut dict = Dictionary::new();
//! let state = evaluate(&program, &Default::default(), &mut dict).unwrap();
//! assert_eq!(state.relation("reach").unwrap().full.len(), 3);
//! ```

pub mod column;
pub mod dictionary;
pub mod engine;
pub mod frontend;
pub mod io;
pub mod kernels;
pub mod oracle;
pub mod primitives;
pub mod relation;

pub use column::{build_index, Column, ColumnIndex, MatchRange};
pub use dictionary::Dictionary;
pub use engine::{evaluate, evaluate_with_workers, EvaluationState, IterationStats};
pub use relation::{Relation, RelationVersion, Version};

/// A dictionary-encoded constant.
pub type Value = u32;

/// Dense row offset inside one relation version.
pub type TupleId = u32;

/// Contract violations on the storage layer.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StorageError {
    #[error("tuple id {id} out of bounds for length {len}")]
    IdOutOfBounds { id: TupleId, len: usize },
    #[error("column {column} out of bounds for arity {arity}")]
    ColumnOutOfBounds { column: usize, arity: usize },
    #[error("row {row} has {found} fields, expected {expected}")]
    RowArity {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("column {column} has length {len}, expected {expected}")]
    MisalignedColumns {
        column: usize,
        len: usize,
        expected: usize,
    },
    #[error("relations need at least one column")]
    ZeroArity,
}
