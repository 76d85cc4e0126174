//! Nonrecursive datalog: programs, structural analysis, transformations and
//! the text format.

mod program;
mod text;
mod transform;

pub use program::{Atom, Clause, Program, Report, Term, EQ};
pub use text::{emit_program, parse_program, EqMode};
pub use transform::{infer_weight_function, is_weight_function, lift_linear, lift_to_arbitrary, to_skinny};
