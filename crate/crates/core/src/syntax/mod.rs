//! Concrete syntax: formula AST, parser and printer, and the model file format.

mod formula;
mod model_file;
mod parser;

pub use formula::{format_formula, mentioned_experiments, Formula};
pub use model_file::{parse_model, LocatedValidationError, ModelFileError};
pub use parser::{parse_formula, ParseError};
