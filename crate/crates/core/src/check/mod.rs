//! Numerical oracles for transformed programs: finite differences,
//! Jacobians, transpose identities, a well-typed program fuzzer, and a
//! catalogue of βη-equal program pairs.

use thiserror::Error;

use crate::ad::{differentiate, AdError, AdOutput, Mode};
use crate::program::Program;
use crate::runtime::value::{Env, Value};
use crate::runtime::{Interp, RuntimeError};
use crate::primitives::Registry;
use crate::typecheck::TypeError;
use crate::types::SourceType;

pub mod catalogue;
pub mod fd;
pub mod fuzz;
pub mod observe;
pub mod report;

pub use fd::{central_difference, central_difference_fn, jacobian_report, transpose_consistency, JacobianReport};
pub use fuzz::gen_random_program;

/// Maximum relative error allowed between forward and reverse derivatives.
pub const FWD_REV_TOL: f64 = 1e-10;
/// Maximum relative error allowed against central differences.
pub const FD_TOL: f64 = 1e-4;
/// Default finite-difference step.
pub const FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error("{0} is not a first-order type")]
    NonFirstOrderType(SourceType),
    #[error("shape mismatch: expected {expected} reals, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("no program found for seed {seed} after {attempts} attempts")]
    GenerationExhausted { seed: u64, attempts: usize },
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Ad(#[from] AdError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

pub type Result<T> = std::result::Result<T, CheckError>;

/// `|a − b| / (1 + |b|)`; NaN compares as infinitely wrong.
pub fn rel_err(a: f64, b: f64) -> f64 {
    let e = (a - b).abs() / (1.0 + b.abs());
    if e.is_nan() {
        f64::INFINITY
    } else {
        e
    }
}

pub fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(&x, &y)| rel_err(x, y)).fold(0.0, f64::max)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A first-order program together with both of its transforms.
pub struct Compiled {
    pub program: Program,
    pub result_type: SourceType,
    pub fwd: AdOutput,
    pub rev: AdOutput,
    n: usize,
    m: usize,
}

impl Compiled {
    pub fn new(program: Program) -> Result<Self> {
        let result_type = program.result_type()?;
        for t in [&program.arg_type, &result_type] {
            if !t.is_first_order() {
                return Err(CheckError::NonFirstOrderType(t.clone()));
            }
        }
        let fwd = differentiate(&program, Mode::Forward)?;
        let rev = differentiate(&program, Mode::Reverse)?;
        let n = program.arg_type.flat_width().unwrap_or(0);
        let m = result_type.flat_width().unwrap_or(0);
        Ok(Compiled { program, result_type, fwd, rev, n, m })
    }

    /// Input and output widths.
    pub fn widths(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    fn interp(&self) -> Interp<'static> {
        Interp::new(Registry::builtin())
    }

    fn input(&self, x: &[f64]) -> Result<Value> {
        Value::from_flat(&self.program.arg_type.to_target(), x)
            .ok_or(CheckError::ShapeMismatch { expected: self.n, found: x.len() })
    }

    fn env(&self, x: &[f64]) -> Result<Env> {
        Ok(Env::new().bind(&self.program.arg, self.input(x)?))
    }

    fn flat(v: Value) -> Result<Vec<f64>> {
        v.to_flat().ok_or_else(|| RuntimeError::Stuck(format!("expected a first-order result, found {v:?}")).into())
    }

    /// The source program's value at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let env = self.env(x)?;
        Self::flat(self.interp().eval(&env, &self.program.body.to_target())?)
    }

    fn eval_transformed(&self, out: &AdOutput, term: &crate::term::TargetTerm, x: &[f64]) -> Result<Value> {
        let env = Env::new().bind(&out.input, self.input(x)?);
        Ok(self.interp().eval(&env, term)?)
    }

    pub fn fwd_primal(&self, x: &[f64]) -> Result<Vec<f64>> {
        Self::flat(self.eval_transformed(&self.fwd, &self.fwd.primal, x)?)
    }

    pub fn rev_primal(&self, x: &[f64]) -> Result<Vec<f64>> {
        Self::flat(self.eval_transformed(&self.rev, &self.rev.primal, x)?)
    }

    /// The forward derivative at `x` as a linear-function value.
    pub fn fwd_linear(&self, x: &[f64]) -> Result<Value> {
        self.eval_transformed(&self.fwd, &self.fwd.deriv, x)
    }

    /// The reverse derivative at `x` as a linear-function value.
    pub fn rev_linear(&self, x: &[f64]) -> Result<Value> {
        self.eval_transformed(&self.rev, &self.rev.deriv, x)
    }

    /// Applies a derivative value to flat input `v` of type `ty`.
    pub fn apply_linear(&self, lin: &Value, ty: &SourceType, v: &[f64]) -> Result<Vec<f64>> {
        let width = ty.flat_width().unwrap_or(0);
        let arg = Value::from_flat(&ty.to_target(), v).ok_or(CheckError::ShapeMismatch { expected: width, found: v.len() })?;
        Self::flat(self.interp().apply_lin(lin, &arg)?)
    }

    /// Jacobian-vector product `Df(x)(v)`.
    pub fn jvp(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let lin = self.fwd_linear(x)?;
        self.apply_linear(&lin, &self.program.arg_type, v)
    }

    /// Transposed product `Dᵀf(x)(w)`.
    pub fn vjp(&self, x: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        let lin = self.rev_linear(x)?;
        self.apply_linear(&lin, &self.result_type, w)
    }
}
