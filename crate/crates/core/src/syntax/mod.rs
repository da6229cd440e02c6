//! Lexing, parsing and printing of specification source text.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod span;

pub use ast::*;
pub use lexer::{to_ascii, tokenize, LexError, Token, TokenKind};
pub use parser::{parse, parse_command, parse_expr, parse_spec, ParseError, SyntaxError};
pub use printer::{print_command, print_decl, print_expr, print_expr_bare, print_spec, print_type};
pub use span::{SourceMap, Span};
