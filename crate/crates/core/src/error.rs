use thiserror::Error;

use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistError {
    #[error("total mass {} exceeds 1", format_rational(.0))]
    MassOverflow(Rational),
    #[error("negative scaling factor {}", format_rational(.0))]
    NegativeScale(Rational),
    #[error("state {0} is not in the support")]
    NotInSupport(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown state index {0}")]
    UnknownState(usize),
    #[error("unknown state `{0}`")]
    UnknownStateName(String),
    #[error("duplicate state name `{0}`")]
    DuplicateState(String),
    #[error("automaton has no states")]
    Empty,
    #[error("transition from `{state}` targets a distribution of mass {}", format_rational(.mass))]
    NotADistribution { state: String, mass: Rational },
    #[error("non-positive rate {} on Markovian transition from `{state}`", format_rational(.rate))]
    NonPositiveRate { state: String, rate: Rational },
    #[error("reserved action name `{0}`")]
    ReservedAction(String),
    #[error("chi actions are not allowed in a Markov automaton")]
    ChiInMarkovAutomaton,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolytopeError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeakError {
    #[error("scheduler enumeration exceeded the limit of {0} schedulers")]
    SchedulerLimit(usize),
    #[error("ill-formed scheduler: {0}")]
    IllFormedScheduler(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("automaton has {states} states, above the oracle bound of {bound}")]
    TooLarge { states: usize, bound: usize },
    #[error("passing partitions are not closed under union")]
    NoCoarsest,
    #[error(transparent)]
    Weak(#[from] WeakError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivError {
    #[error("distributions have different mass: {} vs {}", format_rational(.0), format_rational(.1))]
    MassMismatch(Rational, Rational),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors of the model text format. Line and column are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("semantic error at line {line}: {message}")]
    Semantic { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}
