//! Weak and naive weak bisimulation for finite Markov automata.
//!
//! Models are mapped to probabilistic automata with χ-labelled timed steps,
//! then refined by a partition algorithm that tracks vanishing states.

pub mod chi;
pub mod dist;
pub mod error;
pub mod lp;
pub mod model;
pub mod partition;
pub mod polytope;
pub mod rational;
pub mod weak;
pub mod refinement;
pub mod format;
pub mod oracle;
pub mod elimination;
pub mod dot;
pub mod report;
