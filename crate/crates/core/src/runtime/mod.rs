//! Evaluation of target programs.
//!
//! [`eval`] is an environment-based call-by-value interpreter that
//! implements the linear types directly (linear functions as functions,
//! `Map` as a list of pairs). [`symbolic`] is an independent call-by-name
//! evaluator over terms that produces normal forms; the two are expected to
//! agree at real-vector types.

use thiserror::Error;

use crate::name::Name;

pub mod eval;
pub mod symbolic;
pub mod value;

pub use eval::{eval_combinator, eval_definitional, Interp};
pub use symbolic::{eval_symbolic, SymbolicError};
pub use value::{plus_values, zero_of, Env, Value};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuntimeError {
    #[error("width mismatch: {left} vs {right}")]
    WidthMismatch { left: usize, right: usize },
    #[error("unbound variable `{0}`")]
    UnboundVariable(Name),
    #[error("unknown operation `{0}`")]
    UnknownOp(String),
    #[error("evaluation stuck: {0}")]
    Stuck(String),
}
