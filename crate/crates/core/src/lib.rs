//! Lie algebras of vector fields.

pub mod expr;
pub mod fields;
pub mod linalg;
pub mod sample;
pub mod algebra;
pub mod invariants;
pub mod flows;
pub mod mobility;
pub mod catalog;
pub mod cli;
