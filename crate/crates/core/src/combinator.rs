//! Point-free categorical combinators, elaboration of λ-terms into them, and
//! reification back to λ-syntax.
//!
//! A typing context `x₁:τ₁, …, x_k:τ_k` is packed left-nested with the newest
//! binding rightmost: `((τ₁ × τ₂) × …) × τ_k`. A single variable is its own
//! context and the empty context is `unit`. A λ always extends its context
//! with a new right slot, so the body of a closed λ sees `unit × σ`.

use std::fmt;
use std::sync::Arc;

use crate::name::{Name, NameSupply};
use crate::primitives::{OpSig, Registry};
use crate::term::build::*;
use crate::term::{PrimOp, SourceTerm, TargetTerm};
use crate::typecheck::{Checker, Context, TypeError};
use crate::types::SourceType;

#[derive(Clone, Debug, PartialEq)]
pub enum Combinator {
    Id(SourceType),
    /// Diagrammatic composition: `Comp(f, g)` runs `f` then `g`.
    Comp(Arc<Combinator>, Arc<Combinator>),
    Terminal(SourceType),
    Pair(Arc<Combinator>, Arc<Combinator>),
    Fst(SourceType, SourceType),
    Snd(SourceType, SourceType),
    /// `ev : (σ → τ) × σ → τ`.
    Ev(SourceType, SourceType),
    /// `Curry(f, σ, τ, ρ) : σ → (τ → ρ)` for `f : σ × τ → ρ`.
    Curry(Arc<Combinator>, SourceType, SourceType, SourceType),
    Op { op: PrimOp, sig: OpSig },
}

impl Combinator {
    pub fn comp(f: Combinator, g: Combinator) -> Self {
        Combinator::Comp(Arc::new(f), Arc::new(g))
    }

    pub fn pair(f: Combinator, g: Combinator) -> Self {
        Combinator::Pair(Arc::new(f), Arc::new(g))
    }

    pub fn dom(&self) -> SourceType {
        match self {
            Combinator::Id(t) | Combinator::Terminal(t) => t.clone(),
            Combinator::Comp(f, _) | Combinator::Pair(f, _) => f.dom(),
            Combinator::Fst(a, b) | Combinator::Snd(a, b) => SourceType::prod(a.clone(), b.clone()),
            Combinator::Ev(a, b) => SourceType::prod(SourceType::fun(a.clone(), b.clone()), a.clone()),
            Combinator::Curry(_, s, _, _) => s.clone(),
            Combinator::Op { sig, .. } => sig.dom.clone(),
        }
    }

    pub fn cod(&self) -> SourceType {
        match self {
            Combinator::Id(t) => t.clone(),
            Combinator::Terminal(_) => SourceType::Unit,
            Combinator::Comp(_, g) => g.cod(),
            Combinator::Pair(f, g) => SourceType::prod(f.cod(), g.cod()),
            Combinator::Fst(a, _) => a.clone(),
            Combinator::Snd(_, b) => b.clone(),
            Combinator::Ev(_, b) => b.clone(),
            Combinator::Curry(_, _, t, r) => SourceType::fun(t.clone(), r.clone()),
            Combinator::Op { sig, .. } => sig.cod.clone(),
        }
    }

    /// Checks that every composition seam, pairing and currying agrees on types.
    pub fn is_well_formed(&self) -> bool {
        match self {
            Combinator::Comp(f, g) => f.is_well_formed() && g.is_well_formed() && f.cod() == g.dom(),
            Combinator::Pair(f, g) => f.is_well_formed() && g.is_well_formed() && f.dom() == g.dom(),
            Combinator::Curry(f, s, t, r) => {
                f.is_well_formed() && f.dom() == SourceType::prod(s.clone(), t.clone()) && f.cod() == *r
            }
            _ => true,
        }
    }

    pub fn size(&self) -> usize {
        1 + match self {
            Combinator::Comp(f, g) | Combinator::Pair(f, g) => f.size() + g.size(),
            Combinator::Curry(f, ..) => f.size(),
            _ => 0,
        }
    }

    /// Names of the primitive ops used.
    pub fn op_names(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.collect_ops(&mut out);
        out
    }

    fn collect_ops(&self, out: &mut Vec<Name>) {
        match self {
            Combinator::Comp(f, g) | Combinator::Pair(f, g) => {
                f.collect_ops(out);
                g.collect_ops(out);
            }
            Combinator::Curry(f, ..) => f.collect_ops(out),
            Combinator::Op { op, .. } => out.push(op.name.clone()),
            _ => {}
        }
    }
}

impl fmt::Display for Combinator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Combinator::Id(t) => write!(f, "(id {t})"),
            Combinator::Comp(a, b) => write!(f, "(comp {a} {b})"),
            Combinator::Terminal(t) => write!(f, "(terminal {t})"),
            Combinator::Pair(a, b) => write!(f, "(pair {a} {b})"),
            Combinator::Fst(a, b) => write!(f, "(fst {a} {b})"),
            Combinator::Snd(a, b) => write!(f, "(snd {a} {b})"),
            Combinator::Ev(a, b) => write!(f, "(ev {a} {b})"),
            Combinator::Curry(c, s, t, r) => write!(f, "(curry {c} {s} {t} {r})"),
            Combinator::Op { op, .. } if op.is_const() => {
                f.write_str("(op (const")?;
                for c in op.params.iter() {
                    write!(f, " {c:?}")?;
                }
                f.write_str("))")
            }
            Combinator::Op { op, .. } => write!(f, "(op {})", op.name),
        }
    }
}

/// A packed typing context.
#[derive(Clone)]
enum Packed {
    Empty,
    Single(Name, SourceType),
    Ext(Box<Packed>, Name, SourceType),
}

impl Packed {
    fn from_ctx(ctx: &[(Name, SourceType)]) -> Self {
        let mut it = ctx.iter();
        let Some((x, t)) = it.next() else { return Packed::Empty };
        let mut p = Packed::Single(x.clone(), t.clone());
        for (x, t) in it {
            p = Packed::Ext(Box::new(p), x.clone(), t.clone());
        }
        p
    }

    fn ty(&self) -> SourceType {
        match self {
            Packed::Empty => SourceType::Unit,
            Packed::Single(_, t) => t.clone(),
            Packed::Ext(p, _, t) => SourceType::prod(p.ty(), t.clone()),
        }
    }

    fn lookup(&self, x: &Name) -> Option<Combinator> {
        match self {
            Packed::Empty => None,
            Packed::Single(y, t) => (y == x).then(|| Combinator::Id(t.clone())),
            Packed::Ext(p, y, t) if y == x => Some(Combinator::Snd(p.ty(), t.clone())),
            Packed::Ext(p, _, t) => Some(Combinator::comp(Combinator::Fst(p.ty(), t.clone()), p.lookup(x)?)),
        }
    }
}

/// Elaborates a term typed in the ordered context `ctx` (oldest binding
/// first) into a combinator from the packed context to the term's type.
pub fn elaborate(ctx: &[(Name, SourceType)], term: &SourceTerm) -> Result<Combinator, TypeError> {
    elaborate_with(Registry::builtin(), ctx, term)
}

pub fn elaborate_with(reg: &Registry, ctx: &[(Name, SourceType)], term: &SourceTerm) -> Result<Combinator, TypeError> {
    let map: Context<SourceType> = ctx.iter().cloned().collect();
    Checker::new(reg).source(&map, term)?;
    Ok(elab(reg, &Packed::from_ctx(ctx), term))
}

fn elab(reg: &Registry, p: &Packed, term: &SourceTerm) -> Combinator {
    use Combinator as C;
    match term {
        SourceTerm::Var(x) => p.lookup(x).expect("typechecked terms have bound variables"),
        SourceTerm::Unit => C::Terminal(p.ty()),
        SourceTerm::Pair(a, b) => C::pair(elab(reg, p, a), elab(reg, p, b)),
        SourceTerm::Fst(a) | SourceTerm::Snd(a) => {
            let c = elab(reg, p, a);
            let SourceType::Prod(l, r) = c.cod() else { unreachable!("projection of a non-product") };
            let proj = if matches!(term, SourceTerm::Fst(_)) { C::Fst(*l, *r) } else { C::Snd(*l, *r) };
            C::comp(c, proj)
        }
        SourceTerm::Lam(x, t, body) => {
            let inner = Packed::Ext(Box::new(p.clone()), x.clone(), t.clone());
            let b = elab(reg, &inner, body);
            let cod = b.cod();
            C::Curry(Arc::new(b), p.ty(), t.clone(), cod)
        }
        SourceTerm::App(f, a) => {
            let cf = elab(reg, p, f);
            let SourceType::Fun(s, t) = cf.cod() else { unreachable!("application of a non-function") };
            C::comp(C::pair(cf, elab(reg, p, a)), C::Ev(*s, *t))
        }
        SourceTerm::Op(op, a) => {
            let ca = elab(reg, p, a);
            let spec = reg.op(op.name.as_str()).expect("typechecked ops are registered");
            let sig = spec.signature(op, &ca.cod()).expect("typechecked ops have valid shapes");
            C::comp(ca, C::Op { op: op.clone(), sig })
        }
    }
}

/// The λ-term `λx:dom(c). ⟦c⟧(x)`.
pub fn reify(c: &Combinator) -> TargetTerm {
    let mut supply = NameSupply::new();
    let x = supply.fresh("x");
    let body = reify_at(c, &x, &mut supply);
    lam(&x, c.dom().to_target(), body)
}

/// A term of type `cod(c)` with the single free variable `x : dom(c)`.
pub fn reify_at(c: &Combinator, x: &Name, supply: &mut NameSupply) -> TargetTerm {
    match c {
        Combinator::Id(_) => var(x),
        Combinator::Comp(f, g) => {
            let y = supply.fresh("y");
            let bound = reify_at(f, x, supply);
            let_in(&y, f.cod().to_target(), bound, reify_at(g, &y, supply))
        }
        Combinator::Terminal(_) => unit(),
        Combinator::Pair(f, g) => pair(reify_at(f, x, supply), reify_at(g, x, supply)),
        Combinator::Fst(..) => fst(var(x)),
        Combinator::Snd(..) => snd(var(x)),
        Combinator::Ev(..) => app(fst(var(x)), snd(var(x))),
        Combinator::Curry(f, s, t, _) => {
            let y = supply.fresh("y");
            let z = supply.fresh("z");
            let ctx = SourceType::prod(s.clone(), t.clone()).to_target();
            let body = reify_at(f, &z, supply);
            lam(&y, t.to_target(), let_in(&z, ctx, pair(var(x), var(&y)), body))
        }
        Combinator::Op { op, .. } => TargetTerm::Op(op.clone(), Arc::new(var(x))),
    }
}
