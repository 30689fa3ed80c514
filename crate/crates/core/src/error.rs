use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::noisyor::NoisyOrParams;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// A single problem found while validating a raw table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Empty,
    RaggedRow { row: usize, len: usize, expected: usize },
    ArityTooSmall { column: usize, arity: usize },
    ValueOutOfRange { row: usize, column: usize, value: usize, arity: usize },
    NotPermutation,
    NameCount { names: usize, columns: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "dataset has no rows or no columns"),
            Violation::RaggedRow { row, len, expected } => {
                write!(f, "row {row} has {len} values, expected {expected}")
            }
            Violation::ArityTooSmall { column, arity } => {
                write!(f, "column {column} has arity {arity}, must be at least 2")
            }
            Violation::ValueOutOfRange { row, column, value, arity } => {
                write!(f, "value {value} at row {row}, column {column} is outside [0, {arity})")
            }
            Violation::NotPermutation => write!(f, "ordering is not a permutation"),
            Violation::NameCount { names, columns } => {
                write!(f, "{names} names given for {columns} columns")
            }
        }
    }
}

struct Joined<'a, T>(&'a [T]);

impl<T: fmt::Display> fmt::Display for Joined<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{item}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid dataset: {}", Joined(.0))]
    InvalidDataset(Vec<Violation>),
    #[error("ordering is not a permutation of 0..{len}")]
    NotPermutation { len: usize },
    #[error("node {node} out of range ({count} nodes)")]
    NodeOutOfRange { node: usize, count: usize },
    #[error("node count mismatch: {left} vs {right}")]
    NodeCountMismatch { left: usize, right: usize },
    #[error("variable orderings differ")]
    OrderingMismatch,
    #[error("parent {parent} does not precede child {child} in the ordering")]
    ParentOrder { parent: usize, child: usize },
    #[error("duplicate parent {parent} for node {child}")]
    DuplicateParent { parent: usize, child: usize },
    #[error("graph contains a cycle")]
    Cycle,
    #[error("arc {parent}->{child} is outside the candidate universe")]
    ArcOutsideUniverse { parent: usize, child: usize },
    #[error("parent configuration count {configs} exceeds capacity {limit}")]
    ConfigCapacity { configs: u128, limit: u64 },
    #[error("enumerating {subsets} parent sets exceeds capacity {limit}")]
    EnumerationCapacity { subsets: u128, limit: u64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("variable {node} is not binary (arity {arity})")]
    NotBinary { node: usize, arity: usize },
    #[error("parent {parent} is not a link of this noisy-OR family")]
    UnknownParent { parent: usize },
    #[error("infinite gradient: y = 1 observed with zero total activation")]
    InfiniteGradient,
    #[error(
        "noisy-OR fit did not converge after {iterations} iterations \
         (projected gradient norm {grad_norm:e})"
    )]
    NonConvergence {
        iterations: usize,
        grad_norm: f64,
        best: alloc::boxed::Box<NoisyOrParams>,
    },
    #[error("network spec line {line}: {message}")]
    SpecParse { line: usize, message: String },
    #[error("invalid network: {}", Joined(.0))]
    InvalidNetwork(Vec<String>),
}
