//! Problem files and rendering.

mod json;
mod lexer;
mod parser;
mod render;

use std::fmt;

pub use json::{expr_from_json, expr_to_json, tensor_from_json, tensor_to_json, JsonError};
pub use parser::{parse, parse_with, ParseOptions, Problem};
pub use render::{render_coef, render_expr, render_latex, render_tensor, render_tensor_latex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    Undeclared,
    MixedLowerLimits,
    NonSeparable,
    NotZeroFree,
    Invalid,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::Undeclared => "undeclared symbol",
            ParseErrorKind::MixedLowerLimits => "mixed lower limits",
            ParseErrorKind::NonSeparable => "non-separable kernel",
            ParseErrorKind::NotZeroFree => "not zero-free",
            ParseErrorKind::Invalid => "invalid problem",
        })
    }
}

/// A problem-file error with a 1-based source position.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{line}:{col}: {kind}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn syntax(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError { kind: ParseErrorKind::Syntax, line, col, message: message.into() }
    }
}
