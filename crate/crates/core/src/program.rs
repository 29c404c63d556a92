//! Whole programs: a body with one free input variable.

use crate::combinator::{elaborate_with, Combinator};
use crate::name::Name;
use crate::primitives::Registry;
use crate::term::{SourceTerm, TargetTerm};
use crate::typecheck::{Checker, Context, TypeError};
use crate::types::{SourceType, TargetType};

/// A source program `arg : σ ⊢ body : τ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub arg: Name,
    pub arg_type: SourceType,
    pub body: SourceTerm,
}

impl Program {
    pub fn new(arg: &Name, arg_type: SourceType, body: SourceTerm) -> Self {
        Program { arg: arg.clone(), arg_type, body }
    }

    pub fn context(&self) -> Context<SourceType> {
        [(self.arg.clone(), self.arg_type.clone())].into_iter().collect()
    }

    pub fn result_type(&self) -> Result<SourceType, TypeError> {
        self.result_type_with(Registry::builtin())
    }

    pub fn result_type_with(&self, reg: &Registry) -> Result<SourceType, TypeError> {
        Checker::new(reg).source(&self.context(), &self.body)
    }

    /// `λarg:σ. body`.
    pub fn closed(&self) -> SourceTerm {
        SourceTerm::lam(&self.arg, self.arg_type.clone(), self.body.clone())
    }

    pub fn from_closed(t: &SourceTerm) -> Option<Program> {
        match t {
            SourceTerm::Lam(x, ty, body) => Some(Program::new(x, ty.clone(), (**body).clone())),
            _ => None,
        }
    }

    pub fn combinator(&self) -> Result<Combinator, TypeError> {
        self.combinator_with(Registry::builtin())
    }

    pub fn combinator_with(&self, reg: &Registry) -> Result<Combinator, TypeError> {
        elaborate_with(reg, &[(self.arg.clone(), self.arg_type.clone())], &self.body)
    }

    pub fn to_target(&self) -> TargetProgram {
        TargetProgram {
            name: None,
            arg: self.arg.clone(),
            arg_type: self.arg_type.to_target(),
            body: self.body.to_target(),
        }
    }
}

/// A target-language program, as read from or written to a program file.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetProgram {
    pub name: Option<String>,
    pub arg: Name,
    pub arg_type: TargetType,
    pub body: TargetTerm,
}

impl TargetProgram {
    pub fn context(&self) -> Context<TargetType> {
        [(self.arg.clone(), self.arg_type.clone())].into_iter().collect()
    }

    pub fn body_type(&self) -> Result<TargetType, TypeError> {
        Checker::new(Registry::builtin()).target(&self.context(), &self.body)
    }

    /// The source program, when the body uses only source constructs.
    pub fn to_source(&self) -> Option<Program> {
        Some(Program::new(&self.arg, self.arg_type.to_source()?, self.body.to_source()?))
    }
}
