//! Source-to-source automatic differentiation for a simply typed λ-calculus
//! over real arrays.
//!
//! Programs are elaborated into categorical combinators ([`combinator`]),
//! transformed by the forward and reverse AD macros ([`ad`]) into a target
//! language with abstract types of linear functions and formal sums
//! ([`term`], [`types`]), and run by two independent evaluators
//! ([`runtime`]). The [`check`] module compares the results against finite
//! differences and transpose identities over a fuzzed corpus.

pub mod ad;
pub mod check;
pub mod combinator;
pub mod name;
pub mod primitives;
pub mod program;
pub mod runtime;
pub mod syntax;
pub mod term;
pub mod translate;
pub mod typecheck;
pub mod types;

pub use ad::{differentiate, forward_ad, reverse_ad, AdError, AdOutput, Mode};
pub use combinator::{elaborate, reify, Combinator};
pub use name::{Name, NameSupply};
pub use primitives::{builtin_registry, OpSpec, Registry};
pub use program::{Program, TargetProgram};
pub use runtime::value::Value;
pub use term::{PrimOp, SourceTerm, TargetTerm};
pub use translate::{type_translate_fwd, type_translate_rev};
pub use typecheck::{typecheck_source, typecheck_target, TypeError};
pub use types::{SourceType, TargetType};
