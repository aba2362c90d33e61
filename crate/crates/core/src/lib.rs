//! Exact-arithmetic toolkit for fuzzy ALC under the Zadeh, Łukasiewicz,
//! Product and Gödel operator families.

pub mod cli;
pub mod degrees;
pub mod fmp;
pub mod kbio;
pub mod modelsearch;
pub mod semantics;
pub mod syntax;
pub mod transform;

pub use degrees::{Degree, LogDyadicDegree, OperatorFamily};
pub use semantics::FiniteInterpretation;
pub use syntax::{Axiom, Concept, KnowledgeBase, TboxAxiom};
