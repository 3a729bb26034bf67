//! Formula and message syntax: ASTs, the concrete grammar, and printing.

mod formula;
mod message;
mod parser;

pub use formula::{AgentId, Classification, Cmp, EvBound, Formula};
pub use message::Message;
pub use parser::{is_proposition_name, parse_formula, parse_message};
