//! Reversible quantum cellular automata on wrapped integer lattices.

pub mod algebra;
pub mod clifford;
pub mod cli;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod quasiprob;
pub mod rules;
pub mod structure;
pub mod tensor;
pub mod walks;
