//! OWL 2 QL syntax: roles, basic concepts, TBoxes, ABoxes and conjunctive queries.

mod abox;
mod cq;
mod parse;
mod syntax;
mod tbox;

pub use abox::{h_complete, ABox};
pub use cq::{Cq, CqAtom};
pub use parse::{parse_abox, parse_cq, parse_tbox};
pub use syntax::{BasicConcept, Role, Word};
pub use tbox::{exists_concept_name, Axiom, Depth, TBox, EXISTS_INV_PREFIX, EXISTS_PREFIX};
