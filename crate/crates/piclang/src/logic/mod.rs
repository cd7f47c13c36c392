//! Relational ESO sentences over pixel and coordinate signatures.

pub mod ast;
pub mod classify;
pub mod parse;
pub mod render;

pub use ast::{
    and, atom, exists, forall, iff, implies, not, or, rel, rel_vars, xor, xor_all, Atom, EsoSentence, Formula,
    Signature, Term,
};
pub use classify::{classify_fragment, is_sorted, prenex_universal, FragmentDescriptor};
pub use parse::{parse_formula, parse_sentence};
pub use render::{render_formula, render_pretty, render_sentence};
