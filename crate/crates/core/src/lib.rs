//! Proof outlines for weak memory models: syntax, assertions, a finite
//! semantic oracle and a syntactic rule engine.

pub mod assertion;
pub mod axioms;
pub mod entail;
pub mod litmus;
pub mod model;
pub mod obligations;
pub mod oracle;
pub mod parser;
pub mod relation;
pub mod render;
pub mod rules;
pub mod soundness;
pub mod syntax;
