//! Concrete syntax for types, terms and program files.
//!
//! ```text
//! (program name?
//!   (arg-type (real 2))
//!   (body (op sum (op square arg))))
//! ```
//!
//! Terms: `(lam (x t) e)`, `(app f e)`, `(let (x e1) e2)`, `(pair a b)`,
//! `(fst e)`, `(snd e)`, `(op name e)`, `(const c1 c2 ...)` (short for
//! `(op (const c1 c2 ...) unit)`), `unit` and bare variables. Target
//! programs also use `(zero t)`, `(plus a b)`, `(lop name e)`, `(lid t)`,
//! `(lcomp f g)`, `(lapp f e)`, `(lswap e)`, `(leval e t)`, `(lsing e t)`,
//! `(lcurryinv e t)`, `(lfst a b)`, `(lsnd a b)` and `(lpair f g)`. Types additionally include `(linfun a b)` and
//! `(map k v)`.

use std::collections::HashMap;

use thiserror::Error;

use crate::typecheck::{Location, TypeError};

pub mod parse;
pub mod print;
pub mod sexpr;

pub use parse::{parse_programs, parse_source_program, parse_term, parse_type, ParsedProgram};
pub use print::{format_number, print_program, print_programs, print_term, print_type};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{col}: {message}")]
pub struct SyntaxError {
    pub message: String,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{line}:{col}: {error}")]
    Type { error: TypeError, line: usize, col: usize },
}

impl ParseError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax(e) => (e.line, e.col),
            ParseError::Type { line, col, .. } => (*line, *col),
        }
    }
}

/// Source positions of the subterms of a parsed term, by child-index path.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Spans(HashMap<Location, (usize, usize)>);

impl Spans {
    pub fn insert(&mut self, path: &[u8], line: usize, col: usize) {
        self.0.insert(path.to_vec(), (line, col));
    }

    /// Position of the closest recorded ancestor of `path`.
    pub fn locate(&self, path: &[u8]) -> (usize, usize) {
        (0..=path.len()).rev().find_map(|k| self.0.get(&path[..k]).copied()).unwrap_or((1, 1))
    }

    /// Attaches a position to a type error raised on the spanned term.
    pub fn locate_error(&self, error: TypeError) -> ParseError {
        let (line, col) = self.locate(error.location());
        ParseError::Type { error, line, col }
    }
}
