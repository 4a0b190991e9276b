//! Robustness checking for PGAS programs with one-sided communication.
//!
//! A program is robust when no computation has a happens-before cycle.
//! [`robustness::check_robustness`] decides this exactly through a
//! normal-form multiheaded automaton; [`oracle`] is a bounded brute-force
//! cross-check.

pub mod corpus;
pub mod dsl;
pub mod mha;
pub mod oracle;
pub mod robustness;
pub mod semantics;
pub mod traces;

pub use dsl::{parse_program, validate, Instance, ProgramCode};
pub use semantics::{Computation, Event, EventKind, Machine};
