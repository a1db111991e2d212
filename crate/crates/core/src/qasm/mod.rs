//! OpenQASM 2.0 front-end.
//!
//! The accepted subset covers register declarations, the `qelib1.inc` one-
//! and two-qubit gates (`u1`/`u2` are lowered to `U3`), measurement, `barrier`
//! (ignored) and single-bit `if` conditions. Multiple registers are flattened
//! into one index space in declaration order.

mod emit;
mod lexer;
mod parser;

use std::fmt;

use thiserror::Error;

pub use emit::emit_qasm;
pub use parser::parse_qasm;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lex,
    Syntax,
    Semantic,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Lex => "lexical",
            ParseErrorKind::Syntax => "syntax",
            ParseErrorKind::Semantic => "semantic",
        })
    }
}

/// A diagnostic with a 1-based line and column.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind} error: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub(crate) fn new(kind: ParseErrorKind, pos: Pos, message: impl Into<String>) -> Self {
        Self { line: pos.line, column: pos.column, message: message.into(), kind }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Pos {
    pub line: usize,
    pub column: usize,
}
