//! The registry of primitive operations.
//!
//! Every primitive comes with its smooth semantics and two derivative
//! builders: given the primal variable `x : Dom(op)`, the forward builder
//! produces a target term `D op(x) : LinFun(Dom(op), Cod(op))` and the
//! reverse builder a term `Dᵀop(x) : LinFun(Cod(op), Dom(op))`. Derivative
//! terms are assembled from the linear combinators plus registered *linear
//! operations*, which are linear in one argument and parametrised by a
//! primal value.
//!
//! # Extending the registry
//!
//! A new first-order op needs a shape rule, its semantics, and both
//! derivative builders; register it with [`Registry::insert_op`] (and any
//! new linear ops its derivatives use with [`Registry::insert_lop`]). The
//! property suite in `tests/primitive_laws.rs` iterates over the whole
//! registry, so a new op is checked against finite differences, linearity
//! and the transpose identity without further changes.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::name::{Name, NameSupply};
use crate::term::build::*;
use crate::term::{PrimOp, TargetTerm};
use crate::types::{SourceType, TargetType};

pub const CONST: &str = "const";
pub const MAP: &str = "map";

/// The linear op names used by the derivative of `map`.
pub const MAP_JVP: &str = "map_jvp";
pub const MAP_VJP: &str = "map_vjp";

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{op}: {reason}")]
pub struct ShapeError {
    pub op: String,
    pub reason: String,
}

impl ShapeError {
    fn new(op: &str, reason: impl Into<String>) -> Self {
        ShapeError { op: op.to_string(), reason: reason.into() }
    }
}

/// The instantiated signature of an op at a particular argument type.
#[derive(Debug, Clone, PartialEq)]
pub struct OpSig {
    pub dom: SourceType,
    pub cod: SourceType,
}

impl OpSig {
    /// The widths `n₁..n_k` of a first-order domain `ℝ^{n₁} × … × ℝ^{n_k}`.
    pub fn domain_widths(&self) -> Vec<usize> {
        fn go(t: &SourceType, out: &mut Vec<usize>) {
            match t {
                SourceType::Real(n) => out.push(*n),
                SourceType::Prod(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                _ => {}
            }
        }
        let mut out = Vec::new();
        go(&self.dom, &mut out);
        out
    }

    pub fn codomain_width(&self) -> usize {
        self.cod.flat_width().unwrap_or(0)
    }
}

/// Signature of a linear op instance: the linear argument and result types.
#[derive(Debug, Clone, PartialEq)]
pub struct LinSig {
    pub dom: TargetType,
    pub cod: TargetType,
}

/// Inputs available to a derivative builder.
pub struct DerivCtx<'a> {
    pub op: &'a PrimOp,
    pub sig: &'a OpSig,
    /// The variable holding the primal argument.
    pub x: &'a Name,
    pub supply: &'a mut NameSupply,
}

impl DerivCtx<'_> {
    fn x(&self) -> TargetTerm {
        var(self.x)
    }

    fn dom(&self) -> TargetType {
        self.sig.dom.to_target()
    }

    fn cod(&self) -> TargetType {
        self.sig.cod.to_target()
    }

    fn cod_width(&self) -> usize {
        self.sig.codomain_width()
    }
}

pub type ShapeRule = fn(&[f64], &SourceType) -> Result<OpSig, ShapeError>;
pub type DerivBuilder = fn(&mut DerivCtx<'_>) -> TargetTerm;
pub type LinShapeRule = fn(&TargetType) -> Result<LinSig, ShapeError>;

pub enum Semantics {
    /// `f(params, leaves)` where `leaves` are the real-vector components of the argument.
    FirstOrder(fn(&[f64], &[&[f64]]) -> Vec<f64>),
    /// Elementwise application of a function `ℝ → ℝ` to an array.
    Map,
}

pub enum LinSemantics {
    /// `f(primal leaves, linear argument)`.
    FirstOrder(fn(&[&[f64]], &[f64]) -> Vec<f64>),
    /// `(g, w) ↦ zipWith (f;snd) v w + map g v` at primal `(f, v)`.
    MapJvp,
    /// `w ↦ ⟨zip v w, zipWith (f;snd) v w⟩` at primal `(f, v)`.
    MapVjp,
}

pub struct OpSpec {
    pub name: String,
    pub higher_order: bool,
    pub shape: ShapeRule,
    pub semantics: Semantics,
    pub fwd_deriv: DerivBuilder,
    pub rev_deriv: DerivBuilder,
    /// Primal term of the forward transform; `op(x)` when absent.
    pub fwd_primal: Option<DerivBuilder>,
    /// Primal term of the reverse transform; `op(x)` when absent.
    pub rev_primal: Option<DerivBuilder>,
}

impl OpSpec {
    pub fn signature(&self, op: &PrimOp, arg: &SourceType) -> Result<OpSig, ShapeError> {
        (self.shape)(&op.params, arg)
    }

    pub fn primal_term(&self, fwd: bool, cx: &mut DerivCtx<'_>) -> TargetTerm {
        let custom = if fwd { self.fwd_primal } else { self.rev_primal };
        match custom {
            Some(b) => b(cx),
            None => TargetTerm::Op(cx.op.clone(), Arc::new(var(cx.x))),
        }
    }
}

pub struct LinOpSpec {
    pub name: String,
    pub shape: LinShapeRule,
    pub semantics: LinSemantics,
}

/// Primitive and linear operations, keyed by name.
pub struct Registry {
    ops: BTreeMap<String, OpSpec>,
    lops: BTreeMap<String, LinOpSpec>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry { ops: BTreeMap::new(), lops: BTreeMap::new() }
    }

    /// The shared builtin registry.
    pub fn builtin() -> &'static Registry {
        static REG: OnceLock<Registry> = OnceLock::new();
        REG.get_or_init(builtin_registry)
    }

    pub fn insert_op(&mut self, spec: OpSpec) {
        self.ops.insert(spec.name.clone(), spec);
    }

    pub fn insert_lop(&mut self, spec: LinOpSpec) {
        self.lops.insert(spec.name.clone(), spec);
    }

    pub fn op(&self, name: &str) -> Option<&OpSpec> {
        self.ops.get(name)
    }

    pub fn lop(&self, name: &str) -> Option<&LinOpSpec> {
        self.lops.get(name)
    }

    pub fn ops(&self) -> impl Iterator<Item = &OpSpec> {
        self.ops.values()
    }

    pub fn lops(&self) -> impl Iterator<Item = &LinOpSpec> {
        self.lops.values()
    }
}

// ---------------------------------------------------------------------------
// Shape rules

fn real_width(op: &str, t: &SourceType) -> Result<usize, ShapeError> {
    match t {
        SourceType::Real(n) => Ok(*n),
        other => Err(ShapeError::new(op, format!("expected a real array, found {other}"))),
    }
}

fn two_reals(op: &str, t: &SourceType) -> Result<(usize, usize), ShapeError> {
    match t {
        SourceType::Prod(a, b) => Ok((real_width(op, a)?, real_width(op, b)?)),
        other => Err(ShapeError::new(op, format!("expected a pair of real arrays, found {other}"))),
    }
}

fn sig(dom: SourceType, cod_width: usize) -> OpSig {
    OpSig { dom, cod: SourceType::Real(cod_width) }
}

fn shape_const(params: &[f64], t: &SourceType) -> Result<OpSig, ShapeError> {
    if *t != SourceType::Unit {
        return Err(ShapeError::new(CONST, format!("constants take unit, found {t}")));
    }
    if params.is_empty() {
        return Err(ShapeError::new(CONST, "a constant needs at least one component"));
    }
    Ok(sig(SourceType::Unit, params.len()))
}

fn shape_elementwise_binary(name: &'static str) -> impl Fn(&[f64], &SourceType) -> Result<OpSig, ShapeError> {
    move |_, t| {
        let (n, m) = two_reals(name, t)?;
        if n != m {
            return Err(ShapeError::new(name, format!("operand widths differ ({n} vs {m})")));
        }
        Ok(sig(t.clone(), n))
    }
}

fn shape_add(p: &[f64], t: &SourceType) -> Result<OpSig, ShapeError> {
    shape_elementwise_binary("add")(p, t)
}

fn shape_mul(p: &[f64], t: &SourceType) -> Result<OpSig, ShapeError> {
    shape_elementwise_binary("mul")(p, t)
}

fn shape_inner(p: &[f64], t: &SourceType) -> Result<OpSig, ShapeError> {
    let s = shape_elementwise_binary("inner")(p, t)?;
    Ok(sig(s.dom, 1))
}

fn shape_unary_same(name: &'static str) -> impl Fn(&[f64], &SourceType) -> Result<OpSig, ShapeError> {
    move |_, t| Ok(sig(t.clone(), real_width(name, t)?))
}

fn shape_square(p: &[f64], t: &SourceType) -> Result<OpSig, ShapeError> {
    shape_unary_same("square")(p, t)
}

fn shape_sigmoid(p: &[f64], t: &SourceType) -> Result<OpSig, ShapeError> {
    shape_unary_same("sigmoid")(p, t)
}

fn shape_sum(_: &[f64], t: &SourceType) -> Result<OpSig, ShapeError> {
    real_width("sum", t)?;
    Ok(sig(t.clone(), 1))
}

fn shape_swap(_: &[f64], t: &SourceType) -> Result<OpSig, ShapeError> {
    match real_width("swap", t)? {
        2 => Ok(sig(t.clone(), 2)),
        n => Err(ShapeError::new("swap", format!("swap acts on (real 2), found width {n}"))),
    }
}

fn shape_prod2(_: &[f64], t: &SourceType) -> Result<OpSig, ShapeError> {
    match real_width("prod2", t)? {
        2 => Ok(sig(t.clone(), 1)),
        n => Err(ShapeError::new("prod2", format!("prod2 acts on (real 2), found width {n}"))),
    }
}

fn shape_scale(_: &[f64], t: &SourceType) -> Result<OpSig, ShapeError> {
    match two_reals("scale", t)? {
        (1, n) => Ok(sig(t.clone(), n)),
        (k, _) => Err(ShapeError::new("scale", format!("the scalar factor must have width 1, found {k}"))),
    }
}

fn shape_matvec(_: &[f64], t: &SourceType) -> Result<OpSig, ShapeError> {
    let (k, m) = two_reals("matvec", t)?;
    if k % m != 0 {
        return Err(ShapeError::new("matvec", format!("matrix width {k} is not a multiple of vector width {m}")));
    }
    Ok(sig(t.clone(), k / m))
}

fn scalar_fun() -> SourceType {
    SourceType::fun(SourceType::real(1), SourceType::real(1))
}

fn shape_map(_: &[f64], t: &SourceType) -> Result<OpSig, ShapeError> {
    match t {
        SourceType::Prod(f, v) if **f == scalar_fun() => Ok(sig(t.clone(), real_width(MAP, v)?)),
        other => Err(ShapeError::new(MAP, format!("expected (prod (fun (real 1) (real 1)) (real n)), found {other}"))),
    }
}

// ---------------------------------------------------------------------------
// Semantics

fn sem_const(params: &[f64], _: &[&[f64]]) -> Vec<f64> {
    params.to_vec()
}

fn sem_add(_: &[f64], a: &[&[f64]]) -> Vec<f64> {
    a[0].iter().zip(a[1]).map(|(x, y)| x + y).collect()
}

fn sem_mul(_: &[f64], a: &[&[f64]]) -> Vec<f64> {
    a[0].iter().zip(a[1]).map(|(x, y)| x * y).collect()
}

fn sem_square(_: &[f64], a: &[&[f64]]) -> Vec<f64> {
    a[0].iter().map(|x| x * x).collect()
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn sem_sigmoid(_: &[f64], a: &[&[f64]]) -> Vec<f64> {
    a[0].iter().map(|&x| sigmoid(x)).collect()
}

fn sem_sum(_: &[f64], a: &[&[f64]]) -> Vec<f64> {
    vec![a[0].iter().sum()]
}

fn sem_swap(_: &[f64], a: &[&[f64]]) -> Vec<f64> {
    vec![a[0][1], a[0][0]]
}

fn sem_prod2(_: &[f64], a: &[&[f64]]) -> Vec<f64> {
    vec![a[0][0] * a[0][1]]
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sem_inner(_: &[f64], a: &[&[f64]]) -> Vec<f64> {
    vec![dot(a[0], a[1])]
}

fn sem_scale(_: &[f64], a: &[&[f64]]) -> Vec<f64> {
    a[1].iter().map(|x| a[0][0] * x).collect()
}

/// `A x` for a row-major `A` with `x.len()` columns.
fn matvec(a: &[f64], x: &[f64]) -> Vec<f64> {
    a.chunks(x.len()).map(|row| dot(row, x)).collect()
}

fn sem_matvec(_: &[f64], a: &[&[f64]]) -> Vec<f64> {
    matvec(a[0], a[1])
}

// ---------------------------------------------------------------------------
// Linear ops

fn lin_shape_vec(name: &'static str, t: &TargetType) -> Result<usize, ShapeError> {
    match t {
        TargetType::Real(n) => Ok(*n),
        other => Err(ShapeError::new(name, format!("primal must be a real array, found {other}"))),
    }
}

fn lsig(dom: usize, cod: usize) -> LinSig {
    LinSig { dom: TargetType::Real(dom), cod: TargetType::Real(cod) }
}

fn lin_pair_widths(name: &'static str, t: &TargetType) -> Result<(usize, usize), ShapeError> {
    match t {
        TargetType::Prod(a, b) => Ok((lin_shape_vec(name, a)?, lin_shape_vec(name, b)?)),
        other => Err(ShapeError::new(name, format!("primal must be a pair of real arrays, found {other}"))),
    }
}

fn lin_matvec_widths(name: &'static str, t: &TargetType) -> Result<(usize, usize, usize), ShapeError> {
    let (k, m) = lin_pair_widths(name, t)?;
    if k % m != 0 {
        return Err(ShapeError::new(name, format!("matrix width {k} is not a multiple of {m}")));
    }
    Ok((k, m, k / m))
}

fn map_primal_type(name: &'static str, t: &TargetType) -> Result<usize, ShapeError> {
    let r = TargetType::real(1);
    let expected_f = TargetType::fun(r.clone(), TargetType::prod(r.clone(), TargetType::linfun(r.clone(), r)));
    match t {
        TargetType::Prod(f, v) if **f == expected_f => lin_shape_vec(name, v),
        other => Err(ShapeError::new(name, format!("unexpected primal type {other}"))),
    }
}

fn builtin_lops() -> Vec<LinOpSpec> {
    vec![
        LinOpSpec {
            name: "emul".into(),
            shape: |t| lin_shape_vec("emul", t).map(|n| lsig(n, n)),
            semantics: LinSemantics::FirstOrder(|p, y| p[0].iter().zip(y).map(|(a, b)| a * b).collect()),
        },
        LinOpSpec {
            name: "inner_with".into(),
            shape: |t| lin_shape_vec("inner_with", t).map(|n| lsig(n, 1)),
            semantics: LinSemantics::FirstOrder(|p, y| vec![dot(p[0], y)]),
        },
        LinOpSpec {
            name: "scale_by".into(),
            shape: |t| lin_shape_vec("scale_by", t).map(|n| lsig(1, n)),
            semantics: LinSemantics::FirstOrder(|p, y| p[0].iter().map(|a| y[0] * a).collect()),
        },
        LinOpSpec {
            name: "rescale".into(),
            shape: |t| match lin_pair_widths("rescale", t)? {
                (1, n) => Ok(lsig(n, n)),
                (k, _) => Err(ShapeError::new("rescale", format!("scalar factor has width {k}"))),
            },
            semantics: LinSemantics::FirstOrder(|p, y| y.iter().map(|b| p[0][0] * b).collect()),
        },
        LinOpSpec {
            name: "lsum".into(),
            shape: |t| lin_shape_vec("lsum", t).map(|n| lsig(n, 1)),
            semantics: LinSemantics::FirstOrder(|_, y| vec![y.iter().sum()]),
        },
        LinOpSpec {
            name: "broadcast".into(),
            shape: |t| lin_shape_vec("broadcast", t).map(|n| lsig(1, n)),
            semantics: LinSemantics::FirstOrder(|p, y| vec![y[0]; p[0].len()]),
        },
        LinOpSpec {
            name: "swap_lin".into(),
            shape: |t| match lin_shape_vec("swap_lin", t)? {
                2 => Ok(lsig(2, 2)),
                n => Err(ShapeError::new("swap_lin", format!("expected width 2, found {n}"))),
            },
            semantics: LinSemantics::FirstOrder(|_, y| vec![y[1], y[0]]),
        },
        LinOpSpec {
            name: "mv_dmat".into(),
            shape: |t| lin_matvec_widths("mv_dmat", t).map(|(k, _, n)| lsig(k, n)),
            semantics: LinSemantics::FirstOrder(|p, da| matvec(da, p[1])),
        },
        LinOpSpec {
            name: "mv_dvec".into(),
            shape: |t| lin_matvec_widths("mv_dvec", t).map(|(_, m, n)| lsig(m, n)),
            semantics: LinSemantics::FirstOrder(|p, dx| matvec(p[0], dx)),
        },
        LinOpSpec {
            name: "mv_outer".into(),
            shape: |t| lin_matvec_widths("mv_outer", t).map(|(k, _, n)| lsig(n, k)),
            semantics: LinSemantics::FirstOrder(|p, w| w.iter().flat_map(|wi| p[1].iter().map(move |xj| wi * xj)).collect()),
        },
        LinOpSpec {
            name: "mv_tvec".into(),
            shape: |t| lin_matvec_widths("mv_tvec", t).map(|(_, m, n)| lsig(n, m)),
            semantics: LinSemantics::FirstOrder(|p, w| {
                let m = p[1].len();
                let mut out = vec![0.0; m];
                for (row, wi) in p[0].chunks(m).zip(w) {
                    for (o, a) in out.iter_mut().zip(row) {
                        *o += a * wi;
                    }
                }
                out
            }),
        },
        LinOpSpec {
            name: MAP_JVP.into(),
            shape: |t| {
                let n = map_primal_type(MAP_JVP, t)?;
                let r = TargetType::real(1);
                Ok(LinSig {
                    dom: TargetType::prod(TargetType::fun(r.clone(), r), TargetType::real(n)),
                    cod: TargetType::real(n),
                })
            },
            semantics: LinSemantics::MapJvp,
        },
        LinOpSpec {
            name: MAP_VJP.into(),
            shape: |t| {
                let n = map_primal_type(MAP_VJP, t)?;
                let r1 = TargetType::real(1);
                Ok(LinSig {
                    dom: TargetType::real(n),
                    cod: TargetType::prod(TargetType::map(r1.clone(), r1), TargetType::real(n)),
                })
            },
            semantics: LinSemantics::MapVjp,
        },
    ]
}

// ---------------------------------------------------------------------------
// Derivative builders

fn dom_parts(cx: &DerivCtx<'_>) -> (TargetType, TargetType) {
    match cx.dom() {
        TargetType::Prod(a, b) => (*a, *b),
        other => panic!("binary op {} instantiated at non-product {other}", cx.op.name),
    }
}

fn d_const_fwd(cx: &mut DerivCtx<'_>) -> TargetTerm {
    zero(TargetType::linfun(TargetType::Unit, cx.cod()))
}

fn d_const_rev(cx: &mut DerivCtx<'_>) -> TargetTerm {
    zero(TargetType::linfun(cx.cod(), TargetType::Unit))
}

fn d_add_fwd(cx: &mut DerivCtx<'_>) -> TargetTerm {
    let (a, b) = dom_parts(cx);
    plus(lfst(a.clone(), b.clone()), lsnd(a, b))
}

fn d_add_rev(cx: &mut DerivCtx<'_>) -> TargetTerm {
    let c = cx.cod();
    lpair(lid(c.clone()), lid(c))
}

// D(*)(x) = (fst x) * (snd y) + (snd x) * (fst y)
fn d_mul_fwd(cx: &mut DerivCtx<'_>) -> TargetTerm {
    let (a, b) = dom_parts(cx);
    plus(
        lcomp(lsnd(a.clone(), b.clone()), lop("emul", fst(cx.x()))),
        lcomp(lfst(a, b), lop("emul", snd(cx.x()))),
    )
}

// Dᵀ(*)(x) = y ↦ ⟨(snd x) * y, (fst x) * y⟩
fn d_mul_rev(cx: &mut DerivCtx<'_>) -> TargetTerm {
    lpair(lop("emul", snd(cx.x())), lop("emul", fst(cx.x())))
}

fn d_square(cx: &mut DerivCtx<'_>) -> TargetTerm {
    lop("emul", op("add", pair(cx.x(), cx.x())))
}

// σ'(x) = σ(x) (1 − σ(x)), self-adjoint.
fn d_sigmoid(cx: &mut DerivCtx<'_>) -> TargetTerm {
    let n = cx.cod_width();
    let s = cx.supply.fresh("s");
    let one_minus_s = op("add", pair(constant(&vec![1.0; n]), op("mul", pair(constant(&vec![-1.0; n]), var(&s)))));
    let_in(
        &s,
        TargetType::real(n),
        op("sigmoid", cx.x()),
        lop("emul", op("mul", pair(var(&s), one_minus_s))),
    )
}

fn d_sum_fwd(cx: &mut DerivCtx<'_>) -> TargetTerm {
    lop("lsum", cx.x())
}

fn d_sum_rev(cx: &mut DerivCtx<'_>) -> TargetTerm {
    lop("broadcast", cx.x())
}

fn d_swap(cx: &mut DerivCtx<'_>) -> TargetTerm {
    lop("swap_lin", cx.x())
}

// D(*)(x) = λy. ⟨swap x, y⟩ for multiplication of the two components of ℝ².
fn d_prod2_fwd(cx: &mut DerivCtx<'_>) -> TargetTerm {
    lop("inner_with", op("swap", cx.x()))
}

// Dᵀ(*)(x) = λy. y · swap x
fn d_prod2_rev(cx: &mut DerivCtx<'_>) -> TargetTerm {
    lop("scale_by", op("swap", cx.x()))
}

fn d_inner_fwd(cx: &mut DerivCtx<'_>) -> TargetTerm {
    let (a, b) = dom_parts(cx);
    plus(
        lcomp(lfst(a.clone(), b.clone()), lop("inner_with", snd(cx.x()))),
        lcomp(lsnd(a, b), lop("inner_with", fst(cx.x()))),
    )
}

fn d_inner_rev(cx: &mut DerivCtx<'_>) -> TargetTerm {
    lpair(lop("scale_by", snd(cx.x())), lop("scale_by", fst(cx.x())))
}

fn d_scale_fwd(cx: &mut DerivCtx<'_>) -> TargetTerm {
    let (a, b) = dom_parts(cx);
    plus(
        lcomp(lfst(a.clone(), b.clone()), lop("scale_by", snd(cx.x()))),
        lcomp(lsnd(a, b), lop("rescale", cx.x())),
    )
}

fn d_scale_rev(cx: &mut DerivCtx<'_>) -> TargetTerm {
    lpair(lop("inner_with", snd(cx.x())), lop("rescale", cx.x()))
}

fn d_matvec_fwd(cx: &mut DerivCtx<'_>) -> TargetTerm {
    let (a, b) = dom_parts(cx);
    plus(lcomp(lfst(a.clone(), b.clone()), lop("mv_dmat", cx.x())), lcomp(lsnd(a, b), lop("mv_dvec", cx.x())))
}

fn d_matvec_rev(cx: &mut DerivCtx<'_>) -> TargetTerm {
    lpair(lop("mv_outer", cx.x()), lop("mv_tvec", cx.x()))
}

// Primal of both transforms of map: map (f;fst, v).
fn d_map_primal(cx: &mut DerivCtx<'_>) -> TargetTerm {
    let a = cx.supply.fresh("a");
    let f_fst = lam(&a, TargetType::real(1), fst(app(fst(cx.x()), var(&a))));
    op(MAP, pair(f_fst, snd(cx.x())))
}

fn d_map_fwd(cx: &mut DerivCtx<'_>) -> TargetTerm {
    lop(MAP_JVP, cx.x())
}

fn d_map_rev(cx: &mut DerivCtx<'_>) -> TargetTerm {
    lop(MAP_VJP, cx.x())
}

fn first_order(
    name: &str,
    shape: ShapeRule,
    sem: fn(&[f64], &[&[f64]]) -> Vec<f64>,
    fwd: DerivBuilder,
    rev: DerivBuilder,
) -> OpSpec {
    OpSpec {
        name: name.to_string(),
        higher_order: false,
        shape,
        semantics: Semantics::FirstOrder(sem),
        fwd_deriv: fwd,
        rev_deriv: rev,
        fwd_primal: None,
        rev_primal: None,
    }
}

/// The builtin primitive operations.
pub fn builtin_registry() -> Registry {
    let mut reg = Registry::empty();
    for spec in [
        first_order(CONST, shape_const, sem_const, d_const_fwd, d_const_rev),
        first_order("add", shape_add, sem_add, d_add_fwd, d_add_rev),
        first_order("mul", shape_mul, sem_mul, d_mul_fwd, d_mul_rev),
        first_order("square", shape_square, sem_square, d_square, d_square),
        first_order("sigmoid", shape_sigmoid, sem_sigmoid, d_sigmoid, d_sigmoid),
        first_order("sum", shape_sum, sem_sum, d_sum_fwd, d_sum_rev),
        first_order("swap", shape_swap, sem_swap, d_swap, d_swap),
        first_order("prod2", shape_prod2, sem_prod2, d_prod2_fwd, d_prod2_rev),
        first_order("inner", shape_inner, sem_inner, d_inner_fwd, d_inner_rev),
        first_order("scale", shape_scale, sem_scale, d_scale_fwd, d_scale_rev),
        first_order("matvec", shape_matvec, sem_matvec, d_matvec_fwd, d_matvec_rev),
        OpSpec {
            name: MAP.to_string(),
            higher_order: true,
            shape: shape_map,
            semantics: Semantics::Map,
            fwd_deriv: d_map_fwd,
            rev_deriv: d_map_rev,
            fwd_primal: Some(d_map_primal),
            rev_primal: Some(d_map_primal),
        },
    ] {
        reg.insert_op(spec);
    }
    for spec in builtin_lops() {
        reg.insert_lop(spec);
    }
    reg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: usize) -> SourceType {
        SourceType::real(n)
    }

    #[test]
    fn registry_contains_the_named_operations() {
        let reg = Registry::builtin();
        for name in [CONST, "add", "mul", "matvec", "sum", "sigmoid", "swap", "inner", "scale", "prod2", MAP] {
            assert!(reg.op(name).is_some(), "missing {name}");
        }
        assert!(reg.op(MAP).unwrap().higher_order);
        assert!(!reg.op("mul").unwrap().higher_order);
    }

    #[test]
    fn shapes_follow_the_op_signatures() {
        let reg = Registry::builtin();
        let mv = reg.op("matvec").unwrap();
        let s = mv.signature(&PrimOp::named("matvec"), &SourceType::prod(r(6), r(3))).unwrap();
        assert_eq!(s.cod, r(2));
        assert_eq!(s.domain_widths(), vec![6, 3]);
        assert!(mv.signature(&PrimOp::named("matvec"), &SourceType::prod(r(5), r(3))).is_err());

        let c = reg.op(CONST).unwrap();
        let s = c.signature(&PrimOp::constant(&[1.0, 2.0, 3.0]), &SourceType::Unit).unwrap();
        assert_eq!(s.cod, r(3));
        assert!(s.domain_widths().is_empty());

        let m = reg.op(MAP).unwrap();
        let dom = SourceType::prod(SourceType::fun(r(1), r(1)), r(4));
        assert_eq!(m.signature(&PrimOp::named(MAP), &dom).unwrap().cod, r(4));
        assert!(m.signature(&PrimOp::named(MAP), &SourceType::prod(SourceType::fun(r(2), r(1)), r(4))).is_err());

        assert!(reg.op("add").unwrap().signature(&PrimOp::named("add"), &SourceType::prod(r(2), r(3))).is_err());
    }

    #[test]
    fn first_order_semantics() {
        let reg = Registry::builtin();
        let eval = |name: &str, args: &[&[f64]]| match &reg.op(name).unwrap().semantics {
            Semantics::FirstOrder(f) => f(&[], args),
            Semantics::Map => unreachable!(),
        };
        assert_eq!(eval("mul", &[&[1.0, 2.0], &[3.0, 4.0]]), vec![3.0, 8.0]);
        assert_eq!(eval("sigmoid", &[&[0.0]]), vec![0.5]);
        assert_eq!(eval("sum", &[&[1.0, 2.0, 3.5]]), vec![6.5]);
        // [[1,2,3],[4,5,6]] · (1,0,-1)
        assert_eq!(eval("matvec", &[&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &[1.0, 0.0, -1.0]]), vec![-2.0, -2.0]);
        assert_eq!(eval("swap", &[&[1.0, 2.0]]), vec![2.0, 1.0]);
        assert_eq!(eval("prod2", &[&[3.0, 2.0]]), vec![6.0]);
        assert_eq!(eval("scale", &[&[2.0], &[1.0, -1.0]]), vec![2.0, -2.0]);
    }

    #[test]
    fn matvec_linear_pieces_are_mutually_transpose() {
        let reg = Registry::builtin();
        let f = |name: &str| match &reg.lop(name).unwrap().semantics {
            LinSemantics::FirstOrder(f) => *f,
            _ => unreachable!(),
        };
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let x = [0.5, -1.0, 2.0];
        let primal: [&[f64]; 2] = [&a, &x];
        let w = [0.25, -3.0];
        let dx = [1.0, 2.0, -1.0];
        // ⟨w, A dx⟩ = ⟨Aᵀ w, dx⟩
        let lhs = dot(&w, &f("mv_dvec")(&primal, &dx));
        let rhs = dot(&f("mv_tvec")(&primal, &w), &dx);
        assert!((lhs - rhs).abs() < 1e-12);
        let da = [0.1, 0.2, 0.3, -0.4, 0.5, 0.6];
        let lhs = dot(&w, &f("mv_dmat")(&primal, &da));
        let rhs = dot(&f("mv_outer")(&primal, &w), &da);
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
