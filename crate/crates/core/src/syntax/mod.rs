//! Concrete syntax: parsing, printing and serialization.

mod io;
mod lexer;
mod parser;
mod printer;

pub use io::{
    automaton_from_json, automaton_to_dot, automaton_to_json, format_system, parse_system,
    FORMAT_VERSION,
};
pub use lexer::is_identifier;
pub use parser::{parse_star, parse_sterm, parse_term};
pub use printer::{format_op, format_rational, format_star, format_sterm, format_term};
