//! Script-level front end: lexer, parser, printers, and the driver that
//! turns a parsed script into solver calls and formats responses.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;
