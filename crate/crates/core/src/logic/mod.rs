//! Abstract syntax, concrete grammar, parser and printer for ring-logic
//! formulas.

mod ast;
mod parser;
mod printer;
pub mod random;

pub use ast::{count_exact, Formula, Sentence, Term};
pub use parser::{parse, parse_term};
