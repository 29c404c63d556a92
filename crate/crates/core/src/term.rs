//! Terms of the source language and of the applied target language.
//!
//! Both languages use named variables. Binders are renamed to globally
//! unique names when terms are parsed, and every transformation in this
//! crate draws new binders from a [`NameSupply`], so shadowing never occurs in
//! terms produced internally. Substitution is capture-avoiding regardless.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::name::{Name, NameSupply};
use crate::types::{SourceType, TargetType};

/// A reference to a registered primitive operation.
///
/// `params` carries the literal payload of parametrised operations (the
/// vector `c` of a constant `const_c`); it is empty for every other op.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimOp {
    pub name: Name,
    pub params: Arc<[f64]>,
}

impl PrimOp {
    pub fn named(name: &str) -> Self {
        PrimOp { name: Name::new(name), params: Arc::from(Vec::new()) }
    }

    pub fn constant(c: &[f64]) -> Self {
        PrimOp { name: Name::new(crate::primitives::CONST), params: Arc::from(c.to_vec()) }
    }

    pub fn is_const(&self) -> bool {
        self.name.as_str() == crate::primitives::CONST
    }
}

/// Terms of the source λ-calculus. `let x = a in b` is sugar for `(λx. b) a`.
#[derive(Clone, Debug, PartialEq)]
pub enum SourceTerm {
    Var(Name),
    Op(PrimOp, Box<SourceTerm>),
    Unit,
    Pair(Box<SourceTerm>, Box<SourceTerm>),
    Fst(Box<SourceTerm>),
    Snd(Box<SourceTerm>),
    Lam(Name, SourceType, Box<SourceTerm>),
    App(Box<SourceTerm>, Box<SourceTerm>),
}

/// Terms of the applied target language.
///
/// Linear combinators whose typing rule leaves a type undetermined carry it
/// as an annotation: `lid`, `lfst`, `lsnd`, `zero`, the result type of
/// `leval`, the value type of `lsing`, and the codomain of `lcurryinv`
/// (needed to produce the zero of an empty sum at run time).
#[derive(Clone, Debug, PartialEq)]
pub enum TargetTerm {
    Var(Name),
    Op(PrimOp, Arc<TargetTerm>),
    Unit,
    Pair(Arc<TargetTerm>, Arc<TargetTerm>),
    Fst(Arc<TargetTerm>),
    Snd(Arc<TargetTerm>),
    Lam(Name, TargetType, Arc<TargetTerm>),
    App(Arc<TargetTerm>, Arc<TargetTerm>),
    Zero(TargetType),
    Plus(Arc<TargetTerm>, Arc<TargetTerm>),
    /// A registered linear operation, parametrised by a primal argument.
    LOp(Name, Arc<TargetTerm>),
    LId(TargetType),
    /// Diagrammatic linear composition: `LComp(f, g)` applies `f` first.
    LComp(Arc<TargetTerm>, Arc<TargetTerm>),
    LApp(Arc<TargetTerm>, Arc<TargetTerm>),
    LSwap(Arc<TargetTerm>),
    LEval(Arc<TargetTerm>, TargetType),
    LSing(Arc<TargetTerm>, TargetType),
    LCurryInv(Arc<TargetTerm>, TargetType),
    LFst(TargetType, TargetType),
    LSnd(TargetType, TargetType),
    LPair(Arc<TargetTerm>, Arc<TargetTerm>),
}

impl SourceTerm {
    pub fn var(x: &Name) -> Self {
        SourceTerm::Var(x.clone())
    }

    pub fn pair(a: SourceTerm, b: SourceTerm) -> Self {
        SourceTerm::Pair(Box::new(a), Box::new(b))
    }

    pub fn fst(a: SourceTerm) -> Self {
        SourceTerm::Fst(Box::new(a))
    }

    pub fn snd(a: SourceTerm) -> Self {
        SourceTerm::Snd(Box::new(a))
    }

    pub fn lam(x: &Name, ty: SourceType, body: SourceTerm) -> Self {
        SourceTerm::Lam(x.clone(), ty, Box::new(body))
    }

    pub fn app(f: SourceTerm, a: SourceTerm) -> Self {
        SourceTerm::App(Box::new(f), Box::new(a))
    }

    pub fn op(name: &str, a: SourceTerm) -> Self {
        SourceTerm::Op(PrimOp::named(name), Box::new(a))
    }

    pub fn constant(c: &[f64]) -> Self {
        SourceTerm::Op(PrimOp::constant(c), Box::new(SourceTerm::Unit))
    }

    pub fn let_in(x: &Name, ty: SourceType, bound: SourceTerm, body: SourceTerm) -> Self {
        SourceTerm::app(SourceTerm::lam(x, ty, body), bound)
    }

    pub fn to_target(&self) -> TargetTerm {
        match self {
            SourceTerm::Var(x) => TargetTerm::Var(x.clone()),
            SourceTerm::Op(op, a) => TargetTerm::Op(op.clone(), Arc::new(a.to_target())),
            SourceTerm::Unit => TargetTerm::Unit,
            SourceTerm::Pair(a, b) => TargetTerm::Pair(Arc::new(a.to_target()), Arc::new(b.to_target())),
            SourceTerm::Fst(a) => TargetTerm::Fst(Arc::new(a.to_target())),
            SourceTerm::Snd(a) => TargetTerm::Snd(Arc::new(a.to_target())),
            SourceTerm::Lam(x, t, b) => TargetTerm::Lam(x.clone(), t.to_target(), Arc::new(b.to_target())),
            SourceTerm::App(f, a) => TargetTerm::App(Arc::new(f.to_target()), Arc::new(a.to_target())),
        }
    }

    pub fn size(&self) -> usize {
        1 + match self {
            SourceTerm::Var(_) | SourceTerm::Unit => 0,
            SourceTerm::Op(_, a) | SourceTerm::Fst(a) | SourceTerm::Snd(a) | SourceTerm::Lam(_, _, a) => a.size(),
            SourceTerm::Pair(a, b) | SourceTerm::App(a, b) => a.size() + b.size(),
        }
    }
}

impl From<&SourceTerm> for TargetTerm {
    fn from(t: &SourceTerm) -> Self {
        t.to_target()
    }
}

impl TargetTerm {
    /// The source term this target term embeds, if it uses only source constructs.
    pub fn to_source(&self) -> Option<SourceTerm> {
        use TargetTerm as T;
        Some(match self {
            T::Var(x) => SourceTerm::Var(x.clone()),
            T::Op(op, a) => SourceTerm::Op(op.clone(), Box::new(a.to_source()?)),
            T::Unit => SourceTerm::Unit,
            T::Pair(a, b) => SourceTerm::pair(a.to_source()?, b.to_source()?),
            T::Fst(a) => SourceTerm::fst(a.to_source()?),
            T::Snd(a) => SourceTerm::snd(a.to_source()?),
            T::Lam(x, t, b) => SourceTerm::Lam(x.clone(), t.to_source()?, Box::new(b.to_source()?)),
            T::App(f, a) => SourceTerm::app(f.to_source()?, a.to_source()?),
            _ => return None,
        })
    }

    /// Immediate subterms, in child-index order.
    pub fn children(&self) -> Vec<&Arc<TargetTerm>> {
        use TargetTerm as T;
        match self {
            T::Var(_) | T::Unit | T::Zero(_) | T::LId(_) | T::LFst(..) | T::LSnd(..) => vec![],
            T::Op(_, a)
            | T::Fst(a)
            | T::Snd(a)
            | T::Lam(_, _, a)
            | T::LOp(_, a)
            | T::LSwap(a)
            | T::LEval(a, _)
            | T::LSing(a, _)
            | T::LCurryInv(a, _) => vec![a],
            T::Pair(a, b) | T::App(a, b) | T::Plus(a, b) | T::LComp(a, b) | T::LApp(a, b) | T::LPair(a, b) => {
                vec![a, b]
            }
        }
    }

    /// Rebuilds this node with its children replaced by `f(child)`.
    pub fn map_children(&self, mut f: impl FnMut(&Arc<TargetTerm>) -> Arc<TargetTerm>) -> TargetTerm {
        use TargetTerm as T;
        match self {
            T::Var(_) | T::Unit | T::Zero(_) | T::LId(_) | T::LFst(..) | T::LSnd(..) => self.clone(),
            T::Op(op, a) => T::Op(op.clone(), f(a)),
            T::Fst(a) => T::Fst(f(a)),
            T::Snd(a) => T::Snd(f(a)),
            T::Lam(x, t, a) => T::Lam(x.clone(), t.clone(), f(a)),
            T::LOp(n, a) => T::LOp(n.clone(), f(a)),
            T::LSwap(a) => T::LSwap(f(a)),
            T::LEval(a, t) => T::LEval(f(a), t.clone()),
            T::LSing(a, t) => T::LSing(f(a), t.clone()),
            T::LCurryInv(a, t) => T::LCurryInv(f(a), t.clone()),
            T::Pair(a, b) => {
                let a = f(a);
                T::Pair(a, f(b))
            }
            T::App(a, b) => {
                let a = f(a);
                T::App(a, f(b))
            }
            T::Plus(a, b) => {
                let a = f(a);
                T::Plus(a, f(b))
            }
            T::LComp(a, b) => {
                let a = f(a);
                T::LComp(a, f(b))
            }
            T::LApp(a, b) => {
                let a = f(a);
                T::LApp(a, f(b))
            }
            T::LPair(a, b) => {
                let a = f(a);
                T::LPair(a, f(b))
            }
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            TargetTerm::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            TargetTerm::Lam(x, _, body) => {
                bound.push(x.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            _ => {
                for c in self.children() {
                    c.collect_free(bound, out);
                }
            }
        }
    }

    /// Every name bound by a λ anywhere in the term.
    pub fn binders(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let TargetTerm::Lam(x, _, _) = t {
                out.insert(x.clone());
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&TargetTerm)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Names of the (non-linear) primitive ops used in the term.
    pub fn op_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let TargetTerm::Op(op, _) = t {
                out.insert(op.name.clone());
            }
        });
        out
    }

    /// Names of the linear ops used in the term.
    pub fn lop_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let TargetTerm::LOp(n, _) = t {
                out.insert(n.clone());
            }
        });
        out
    }

    /// Capture-avoiding substitution `self[x := s]`.
    pub fn subst(&self, x: &Name, s: &TargetTerm, supply: &mut NameSupply) -> TargetTerm {
        let fv = s.free_vars();
        self.subst_with(x, s, &fv, supply)
    }

    fn subst_with(&self, x: &Name, s: &TargetTerm, fv: &BTreeSet<Name>, supply: &mut NameSupply) -> TargetTerm {
        match self {
            TargetTerm::Var(y) if y == x => s.clone(),
            TargetTerm::Var(_) => self.clone(),
            TargetTerm::Lam(y, _, _) if y == x => self.clone(),
            TargetTerm::Lam(y, ty, body) if fv.contains(y) => {
                let y2 = supply.fresh_like(y);
                let renamed = body.subst(y, &TargetTerm::Var(y2.clone()), supply);
                TargetTerm::Lam(y2, ty.clone(), Arc::new(renamed.subst_with(x, s, fv, supply)))
            }
            _ => self.map_children(|c| Arc::new(c.subst_with(x, s, fv, supply))),
        }
    }

    /// Renames every binder to a fresh name from `supply`.
    pub fn freshen(&self, supply: &mut NameSupply) -> TargetTerm {
        self.freshen_in(&mut HashMap::new(), supply)
    }

    fn freshen_in(&self, env: &mut HashMap<Name, Vec<Name>>, supply: &mut NameSupply) -> TargetTerm {
        match self {
            TargetTerm::Var(x) => match env.get(x).and_then(|v| v.last()) {
                Some(y) => TargetTerm::Var(y.clone()),
                None => self.clone(),
            },
            TargetTerm::Lam(x, ty, body) => {
                let y = supply.fresh_like(x);
                env.entry(x.clone()).or_default().push(y.clone());
                let body = body.freshen_in(env, supply);
                env.get_mut(x).map(|v| v.pop());
                TargetTerm::Lam(y, ty.clone(), Arc::new(body))
            }
            _ => self.map_children(|c| Arc::new(c.freshen_in(env, supply))),
        }
    }

    /// α-equivalence.
    pub fn alpha_eq(&self, other: &TargetTerm) -> bool {
        fn go(a: &TargetTerm, b: &TargetTerm, env: &mut Vec<(Name, Name)>) -> bool {
            use TargetTerm as T;
            match (a, b) {
                (T::Var(x), T::Var(y)) => {
                    for (l, r) in env.iter().rev() {
                        if l == x || r == y {
                            return l == x && r == y;
                        }
                    }
                    x == y
                }
                (T::Lam(x, tx, bx), T::Lam(y, ty, by)) => {
                    if tx != ty {
                        return false;
                    }
                    env.push((x.clone(), y.clone()));
                    let ok = go(bx, by, env);
                    env.pop();
                    ok
                }
                _ => {
                    if std::mem::discriminant(a) != std::mem::discriminant(b) || !same_node_data(a, b) {
                        return false;
                    }
                    let (ca, cb) = (a.children(), b.children());
                    ca.len() == cb.len() && ca.iter().zip(cb.iter()).all(|(p, q)| go(p, q, env))
                }
            }
        }
        go(self, other, &mut Vec::new())
    }
}

/// Compares the non-child payload of two nodes with the same constructor.
fn same_node_data(a: &TargetTerm, b: &TargetTerm) -> bool {
    use TargetTerm as T;
    match (a, b) {
        (T::Op(p, _), T::Op(q, _)) => p == q,
        (T::Zero(s), T::Zero(t)) | (T::LId(s), T::LId(t)) => s == t,
        (T::LOp(m, _), T::LOp(n, _)) => m == n,
        (T::LEval(_, s), T::LEval(_, t)) | (T::LSing(_, s), T::LSing(_, t)) | (T::LCurryInv(_, s), T::LCurryInv(_, t)) => {
            s == t
        }
        (T::LFst(s1, s2), T::LFst(t1, t2)) | (T::LSnd(s1, s2), T::LSnd(t1, t2)) => s1 == t1 && s2 == t2,
        _ => true,
    }
}

/// Smart constructors for target terms.
pub mod build {
    use super::*;

    fn rc(t: TargetTerm) -> Arc<TargetTerm> {
        Arc::new(t)
    }

    pub fn var(x: &Name) -> TargetTerm {
        TargetTerm::Var(x.clone())
    }

    pub fn unit() -> TargetTerm {
        TargetTerm::Unit
    }

    pub fn pair(a: TargetTerm, b: TargetTerm) -> TargetTerm {
        TargetTerm::Pair(rc(a), rc(b))
    }

    pub fn fst(a: TargetTerm) -> TargetTerm {
        TargetTerm::Fst(rc(a))
    }

    pub fn snd(a: TargetTerm) -> TargetTerm {
        TargetTerm::Snd(rc(a))
    }

    pub fn lam(x: &Name, ty: TargetType, body: TargetTerm) -> TargetTerm {
        TargetTerm::Lam(x.clone(), ty, rc(body))
    }

    pub fn app(f: TargetTerm, a: TargetTerm) -> TargetTerm {
        TargetTerm::App(rc(f), rc(a))
    }

    /// `let x : ty = bound in body`, i.e. `(λx. body) bound`.
    pub fn let_in(x: &Name, ty: TargetType, bound: TargetTerm, body: TargetTerm) -> TargetTerm {
        app(lam(x, ty, body), bound)
    }

    pub fn op(name: &str, a: TargetTerm) -> TargetTerm {
        TargetTerm::Op(PrimOp::named(name), rc(a))
    }

    pub fn constant(c: &[f64]) -> TargetTerm {
        TargetTerm::Op(PrimOp::constant(c), rc(TargetTerm::Unit))
    }

    pub fn zero(ty: TargetType) -> TargetTerm {
        TargetTerm::Zero(ty)
    }

    pub fn plus(a: TargetTerm, b: TargetTerm) -> TargetTerm {
        TargetTerm::Plus(rc(a), rc(b))
    }

    pub fn lop(name: &str, primal: TargetTerm) -> TargetTerm {
        TargetTerm::LOp(Name::new(name), rc(primal))
    }

    pub fn lid(ty: TargetType) -> TargetTerm {
        TargetTerm::LId(ty)
    }

    pub fn lcomp(f: TargetTerm, g: TargetTerm) -> TargetTerm {
        TargetTerm::LComp(rc(f), rc(g))
    }

    pub fn lapp(f: TargetTerm, a: TargetTerm) -> TargetTerm {
        TargetTerm::LApp(rc(f), rc(a))
    }

    pub fn lswap(t: TargetTerm) -> TargetTerm {
        TargetTerm::LSwap(rc(t))
    }

    pub fn leval(t: TargetTerm, result: TargetType) -> TargetTerm {
        TargetTerm::LEval(rc(t), result)
    }

    pub fn lsing(t: TargetTerm, value: TargetType) -> TargetTerm {
        TargetTerm::LSing(rc(t), value)
    }

    pub fn lcurryinv(t: TargetTerm, cod: TargetType) -> TargetTerm {
        TargetTerm::LCurryInv(rc(t), cod)
    }

    pub fn lfst(a: TargetType, b: TargetType) -> TargetTerm {
        TargetTerm::LFst(a, b)
    }

    pub fn lsnd(a: TargetType, b: TargetType) -> TargetTerm {
        TargetTerm::LSnd(a, b)
    }

    pub fn lpair(f: TargetTerm, g: TargetTerm) -> TargetTerm {
        TargetTerm::LPair(rc(f), rc(g))
    }
}

#[cfg(test)]
mod tests {
    use super::build::*;
    use super::*;

    fn r(n: usize) -> TargetType {
        TargetType::real(n)
    }

    #[test]
    fn free_vars_respect_binders() {
        let x = Name::new("x");
        let y = Name::new("y");
        let t = lam(&x, r(1), pair(var(&x), var(&y)));
        assert_eq!(t.free_vars().into_iter().collect::<Vec<_>>(), vec![y]);
    }

    #[test]
    fn substitution_avoids_capture() {
        let x = Name::new("x");
        let y = Name::new("y");
        // (λy. x)[x := y] must not become λy. y
        let t = lam(&y, r(1), var(&x));
        let mut supply = NameSupply::avoiding([&x, &y]);
        let s = t.subst(&x, &var(&y), &mut supply);
        match &s {
            TargetTerm::Lam(b, _, body) => {
                assert_ne!(b, &y);
                assert_eq!(**body, var(&y));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn substitution_stops_at_shadowing_binder() {
        let x = Name::new("x");
        let t = lam(&x, r(1), var(&x));
        let mut supply = NameSupply::new();
        assert_eq!(t.subst(&x, &TargetTerm::Unit, &mut supply), t);
    }

    #[test]
    fn freshen_preserves_alpha_class() {
        let x = Name::new("x");
        let f = Name::new("f");
        let t = app(lam(&x, r(1), pair(var(&x), var(&f))), lam(&x, r(1), var(&x)));
        let mut supply = NameSupply::avoiding([&f]);
        let u = t.freshen(&mut supply);
        assert!(t.alpha_eq(&u));
        assert_ne!(t, u);
        assert_eq!(u.free_vars(), t.free_vars());
    }

    #[test]
    fn alpha_eq_distinguishes_free_from_bound() {
        let x = Name::new("x");
        let y = Name::new("y");
        let a = lam(&x, r(1), var(&x));
        let b = lam(&y, r(1), var(&x));
        assert!(!a.alpha_eq(&b));
        assert!(a.alpha_eq(&lam(&y, r(1), var(&y))));
    }

    #[test]
    fn source_embedding_round_trips() {
        let x = Name::new("x");
        let s = SourceTerm::lam(&x, SourceType::real(2), SourceTerm::op("sum", SourceTerm::var(&x)));
        assert_eq!(s.to_target().to_source(), Some(s));
        assert_eq!(lid(r(1)).to_source(), None);
    }
}
