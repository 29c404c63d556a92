//! Typecheckers for the source and target languages.
//!
//! Source terms are checked through their embedding into the target
//! language, whose rules restrict to the usual simply typed rules on the
//! source fragment. Error locations are child-index paths from the root
//! (see [`TargetTerm::children`]).

use std::collections::BTreeMap;

use thiserror::Error;

use crate::name::Name;
use crate::primitives::{Registry, ShapeError};
use crate::term::{SourceTerm, TargetTerm};
use crate::types::{SourceType, TargetType};

/// Path of child indices from the root of a term to a subterm.
pub type Location = Vec<u8>;

pub type Context<T> = BTreeMap<Name, T>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TypeError {
    #[error("unbound variable `{name}`")]
    UnboundVariable { name: Name, location: Location },
    #[error("type mismatch: expected {expected}, found {found}")]
    TypeMismatch { expected: String, found: String, location: Location },
    #[error("unknown operation `{name}`")]
    UnknownOp { name: String, location: Location },
    #[error("ill-shaped {combinator}: {reason}")]
    LinearityShapeError { combinator: &'static str, reason: String, location: Location },
    #[error("bad operand shape for {0}")]
    Shape(ShapeError, Location),
}

impl TypeError {
    pub fn location(&self) -> &[u8] {
        match self {
            TypeError::UnboundVariable { location, .. }
            | TypeError::TypeMismatch { location, .. }
            | TypeError::UnknownOp { location, .. }
            | TypeError::LinearityShapeError { location, .. }
            | TypeError::Shape(_, location) => location,
        }
    }

    /// The same error for a term embedded at `prefix` in a larger term.
    pub fn under(mut self, prefix: &[u8]) -> Self {
        let loc = match &mut self {
            TypeError::UnboundVariable { location, .. }
            | TypeError::TypeMismatch { location, .. }
            | TypeError::UnknownOp { location, .. }
            | TypeError::LinearityShapeError { location, .. }
            | TypeError::Shape(_, location) => location,
        };
        loc.splice(0..0, prefix.iter().copied());
        self
    }
}

/// Typechecks a source term against the builtin registry.
pub fn typecheck_source(ctx: &Context<SourceType>, term: &SourceTerm) -> Result<SourceType, TypeError> {
    Checker::new(Registry::builtin()).source(ctx, term)
}

/// Typechecks a target term against the builtin registry.
pub fn typecheck_target(ctx: &Context<TargetType>, term: &TargetTerm) -> Result<TargetType, TypeError> {
    Checker::new(Registry::builtin()).target(ctx, term)
}

pub struct Checker<'r> {
    reg: &'r Registry,
}

struct Scope<'a> {
    base: &'a Context<TargetType>,
    locals: Vec<(Name, TargetType)>,
    path: Location,
}

impl Scope<'_> {
    fn lookup(&self, x: &Name) -> Option<&TargetType> {
        self.locals.iter().rev().find(|(y, _)| y == x).map(|(_, t)| t).or_else(|| self.base.get(x))
    }
}

impl<'r> Checker<'r> {
    pub fn new(reg: &'r Registry) -> Self {
        Checker { reg }
    }

    pub fn source(&self, ctx: &Context<SourceType>, term: &SourceTerm) -> Result<SourceType, TypeError> {
        let ctx: Context<TargetType> = ctx.iter().map(|(k, v)| (k.clone(), v.to_target())).collect();
        let ty = self.target(&ctx, &term.to_target())?;
        Ok(ty.to_source().expect("source terms have source types"))
    }

    pub fn target(&self, ctx: &Context<TargetType>, term: &TargetTerm) -> Result<TargetType, TypeError> {
        let mut scope = Scope { base: ctx, locals: Vec::new(), path: Vec::new() };
        self.check(&mut scope, term)
    }

    fn child(&self, scope: &mut Scope<'_>, i: u8, t: &TargetTerm) -> Result<TargetType, TypeError> {
        scope.path.push(i);
        let r = self.check(scope, t);
        scope.path.pop();
        r
    }

    fn mismatch(scope: &Scope<'_>, expected: impl ToString, found: &TargetType) -> TypeError {
        TypeError::TypeMismatch { expected: expected.to_string(), found: found.to_string(), location: scope.path.clone() }
    }

    fn shape(scope: &Scope<'_>, combinator: &'static str, reason: String) -> TypeError {
        TypeError::LinearityShapeError { combinator, reason, location: scope.path.clone() }
    }

    /// Checks that child `i` has a linear-function type and returns its domain and codomain.
    fn linfun_child(
        &self,
        scope: &mut Scope<'_>,
        combinator: &'static str,
        i: u8,
        t: &TargetTerm,
    ) -> Result<(TargetType, TargetType), TypeError> {
        match self.child(scope, i, t)? {
            TargetType::LinFun(a, b) => Ok((*a, *b)),
            other => {
                scope.path.push(i);
                let e = Self::shape(scope, combinator, format!("expected a linear function, found {other}"));
                scope.path.pop();
                Err(e)
            }
        }
    }

    fn check(&self, scope: &mut Scope<'_>, term: &TargetTerm) -> Result<TargetType, TypeError> {
        use TargetTerm as T;
        use TargetType as Ty;
        Ok(match term {
            T::Var(x) => match scope.lookup(x) {
                Some(t) => t.clone(),
                None => return Err(TypeError::UnboundVariable { name: x.clone(), location: scope.path.clone() }),
            },
            T::Op(op, a) => {
                let ta = self.child(scope, 0, a)?;
                let spec = self.reg.op(op.name.as_str()).ok_or_else(|| TypeError::UnknownOp {
                    name: op.name.to_string(),
                    location: scope.path.clone(),
                })?;
                let Some(src) = ta.to_source() else {
                    return Err(Self::mismatch(scope, "an argument free of linear types", &ta));
                };
                let sig = spec.signature(op, &src).map_err(|e| TypeError::Shape(e, scope.path.clone()))?;
                sig.cod.to_target()
            }
            T::Unit => Ty::Unit,
            T::Pair(a, b) => {
                let ta = self.child(scope, 0, a)?;
                Ty::prod(ta, self.child(scope, 1, b)?)
            }
            T::Fst(a) | T::Snd(a) => match self.child(scope, 0, a)? {
                Ty::Prod(l, r) => {
                    if matches!(term, T::Fst(_)) {
                        *l
                    } else {
                        *r
                    }
                }
                other => return Err(Self::mismatch(scope, "a product type", &other)),
            },
            T::Lam(x, ty, body) => {
                scope.locals.push((x.clone(), ty.clone()));
                let tb = self.child(scope, 0, body);
                scope.locals.pop();
                Ty::fun(ty.clone(), tb?)
            }
            T::App(f, a) => {
                let tf = self.child(scope, 0, f)?;
                let ta = self.child(scope, 1, a)?;
                match tf {
                    Ty::Fun(dom, cod) if *dom == ta => *cod,
                    Ty::Fun(dom, _) => {
                        scope.path.push(1);
                        let e = Self::mismatch(scope, &dom, &ta);
                        scope.path.pop();
                        return Err(e);
                    }
                    other => return Err(Self::mismatch(scope, "a function type", &other)),
                }
            }
            T::Zero(ty) => ty.clone(),
            T::Plus(a, b) => {
                let ta = self.child(scope, 0, a)?;
                let tb = self.child(scope, 1, b)?;
                if ta != tb {
                    scope.path.push(1);
                    let e = Self::mismatch(scope, &ta, &tb);
                    scope.path.pop();
                    return Err(e);
                }
                ta
            }
            T::LOp(name, p) => {
                let tp = self.child(scope, 0, p)?;
                let spec = self.reg.lop(name.as_str()).ok_or_else(|| TypeError::UnknownOp {
                    name: name.to_string(),
                    location: scope.path.clone(),
                })?;
                let sig = (spec.shape)(&tp).map_err(|e| TypeError::Shape(e, scope.path.clone()))?;
                Ty::linfun(sig.dom, sig.cod)
            }
            T::LId(ty) => Ty::linfun(ty.clone(), ty.clone()),
            T::LComp(f, g) => {
                let (a, b) = self.linfun_child(scope, "lcomp", 0, f)?;
                let (b2, c) = self.linfun_child(scope, "lcomp", 1, g)?;
                if b != b2 {
                    return Err(Self::shape(scope, "lcomp", format!("codomain {b} does not match domain {b2}")));
                }
                Ty::linfun(a, c)
            }
            T::LApp(f, a) => {
                let (dom, cod) = self.linfun_child(scope, "lapp", 0, f)?;
                let ta = self.child(scope, 1, a)?;
                if ta != dom {
                    scope.path.push(1);
                    let e = Self::mismatch(scope, &dom, &ta);
                    scope.path.pop();
                    return Err(e);
                }
                cod
            }
            T::LSwap(t) => match self.child(scope, 0, t)? {
                Ty::Fun(s, l) => match *l {
                    Ty::LinFun(a, b) => Ty::linfun(*a, Ty::Fun(s, b)),
                    other => return Err(Self::shape(scope, "lswap", format!("expected a linear family, found result {other}"))),
                },
                other => return Err(Self::shape(scope, "lswap", format!("expected a function, found {other}"))),
            },
            T::LEval(t, result) => {
                let tt = self.child(scope, 0, t)?;
                Ty::linfun(Ty::fun(tt, result.clone()), result.clone())
            }
            T::LSing(t, value) => {
                let tt = self.child(scope, 0, t)?;
                Ty::linfun(value.clone(), Ty::map(tt, value.clone()))
            }
            T::LCurryInv(t, cod) => match self.child(scope, 0, t)? {
                Ty::Fun(s, l) => match *l {
                    Ty::LinFun(a, b) if *b == *cod => Ty::linfun(Ty::Map(s, a), *b),
                    Ty::LinFun(_, b) => {
                        return Err(Self::shape(scope, "lcurryinv", format!("annotated codomain {cod} but family yields {b}")))
                    }
                    other => {
                        return Err(Self::shape(scope, "lcurryinv", format!("expected a linear family, found result {other}")))
                    }
                },
                other => return Err(Self::shape(scope, "lcurryinv", format!("expected a function, found {other}"))),
            },
            T::LFst(a, b) => Ty::linfun(Ty::prod(a.clone(), b.clone()), a.clone()),
            T::LSnd(a, b) => Ty::linfun(Ty::prod(a.clone(), b.clone()), b.clone()),
            T::LPair(f, g) => {
                let (a, b) = self.linfun_child(scope, "lpair", 0, f)?;
                let (a2, c) = self.linfun_child(scope, "lpair", 1, g)?;
                if a != a2 {
                    return Err(Self::shape(scope, "lpair", format!("domains differ ({a} vs {a2})")));
                }
                Ty::linfun(a, Ty::prod(b, c))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::build::*;

    fn r(n: usize) -> TargetType {
        TargetType::real(n)
    }

    fn ctx1(x: &Name, t: SourceType) -> Context<SourceType> {
        [(x.clone(), t)].into_iter().collect()
    }

    #[test]
    fn unary_product_has_scalar_type() {
        let x = Name::new("x");
        let t = SourceTerm::op("prod2", SourceTerm::var(&x));
        assert_eq!(typecheck_source(&ctx1(&x, SourceType::real(2)), &t), Ok(SourceType::real(1)));
    }

    #[test]
    fn variable_rule() {
        let x = Name::new("x");
        let ty = SourceType::fun(SourceType::real(3), SourceType::Unit);
        assert_eq!(typecheck_source(&ctx1(&x, ty.clone()), &SourceTerm::var(&x)), Ok(ty));
    }

    #[test]
    fn projection_of_non_product_is_a_mismatch() {
        let x = Name::new("x");
        let err = typecheck_source(&ctx1(&x, SourceType::real(1)), &SourceTerm::fst(SourceTerm::var(&x))).unwrap_err();
        assert!(matches!(err, TypeError::TypeMismatch { .. }), "{err:?}");
    }

    #[test]
    fn unbound_and_unknown_are_reported_with_locations() {
        let x = Name::new("x");
        let y = Name::new("y");
        let t = SourceTerm::pair(SourceTerm::var(&x), SourceTerm::var(&y));
        let err = typecheck_source(&ctx1(&x, SourceType::real(1)), &t).unwrap_err();
        assert_eq!(err, TypeError::UnboundVariable { name: y, location: vec![1] });
        let t = SourceTerm::op("frobnicate", SourceTerm::var(&x));
        assert!(matches!(
            typecheck_source(&ctx1(&x, SourceType::real(1)), &t),
            Err(TypeError::UnknownOp { .. })
        ));
    }

    #[test]
    fn linear_identity_and_pairing() {
        let ctx = Context::new();
        assert_eq!(typecheck_target(&ctx, &lid(r(3))), Ok(TargetType::linfun(r(3), r(3))));
        let s = r(2);
        let t = r(1);
        let term = lpair(lid(s.clone()), zero(TargetType::linfun(s.clone(), t.clone())));
        assert_eq!(typecheck_target(&ctx, &term), Ok(TargetType::linfun(s.clone(), TargetType::prod(s, t))));
    }

    #[test]
    fn curry_inverse_of_constant_identity_family() {
        let x = Name::new("x");
        let tau = r(2);
        let sigma = r(3);
        let term = lcurryinv(lam(&x, tau.clone(), lid(sigma.clone())), sigma.clone());
        assert_eq!(
            typecheck_target(&Context::new(), &term),
            Ok(TargetType::linfun(TargetType::map(tau, sigma.clone()), sigma))
        );
    }

    #[test]
    fn singleton_assigns_value_slot_from_annotation() {
        let x = Name::new("x");
        let ctx: Context<TargetType> = [(x.clone(), r(4))].into_iter().collect();
        assert_eq!(
            typecheck_target(&ctx, &lsing(var(&x), r(2))),
            Ok(TargetType::linfun(r(2), TargetType::map(r(4), r(2))))
        );
    }

    #[test]
    fn swap_and_eval_rules() {
        let x = Name::new("x");
        let fam = lam(&x, r(1), lid(r(2)));
        assert_eq!(
            typecheck_target(&Context::new(), &lswap(fam)),
            Ok(TargetType::linfun(r(2), TargetType::fun(r(1), r(2))))
        );
        assert_eq!(
            typecheck_target(&Context::new(), &leval(constant(&[1.0]), r(3))),
            Ok(TargetType::linfun(TargetType::fun(r(1), r(3)), r(3)))
        );
    }

    #[test]
    fn composition_checks_the_seam() {
        let bad = lcomp(lid(r(1)), lid(r(2)));
        let err = typecheck_target(&Context::new(), &bad).unwrap_err();
        assert!(matches!(err, TypeError::LinearityShapeError { combinator: "lcomp", .. }));
        let not_linear = lcomp(unit(), lid(r(2)));
        let err = typecheck_target(&Context::new(), &not_linear).unwrap_err();
        assert_eq!(err.location(), &[0]);
    }

    #[test]
    fn linear_op_typing_uses_its_shape_rule() {
        let x = Name::new("x");
        let ctx: Context<TargetType> = [(x.clone(), r(3))].into_iter().collect();
        assert_eq!(typecheck_target(&ctx, &lop("emul", var(&x))), Ok(TargetType::linfun(r(3), r(3))));
        assert_eq!(typecheck_target(&ctx, &lop("broadcast", var(&x))), Ok(TargetType::linfun(r(1), r(3))));
    }
}
