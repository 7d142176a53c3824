//! Surface language: tokens, syntax tree, parser and desugaring.

pub mod ast;
pub mod desugar;
pub mod lexer;
pub mod parser;

pub use ast::{DefName, IndexLabel, IndexSuffix, Node, NodeKind, Param};
pub use desugar::desugar_define_indices;
pub use lexer::{tokenize, Tok, Token};

use crate::error::Result;

/// Tokenize and parse, without desugaring.
pub fn parse_str(text: &str) -> Result<Vec<Node>> {
    parser::Parser::new(tokenize(text)?).parse_program()
}

/// Tokenize, parse and desugar a whole program.
pub fn parse_program(text: &str) -> Result<Vec<Node>> {
    desugar::desugar_program(parse_str(text)?)
}
