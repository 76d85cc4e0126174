//! Rewriting of OWL 2 QL ontology-mediated queries into nonrecursive datalog.
//!
//! The crate covers the whole pipeline: parsing ontologies, data and queries
//! ([`dl`]), a canonical-model oracle ([`chase`]), datalog programs and their
//! transformations ([`ndl`]), three evaluation engines ([`eval`]), three
//! rewriting constructions ([`rewrite`]) and benchmark inputs ([`bench`]).

pub mod bench;
pub mod chase;
pub mod dl;
pub mod error;
pub mod eval;
pub mod ndl;
pub mod rewrite;

pub use error::{Error, ErrorKind, Result};
