//! Forward- and reverse-mode AD as structural macros on combinators.
//!
//! For `c : σ → τ` the transform yields two terms open in a primal input
//! variable `x`: the primal `D[c]₁ : D[τ]₁` and the derivative
//! `D[c]₂ : LinFun(D[σ]₂, D[τ]₂)` (forward) or `LinFun(D←[τ]₂, D←[σ]₂)`
//! (reverse). Primal values needed by a later stage of a composition are
//! let-bound once and shared.

use thiserror::Error;

use crate::combinator::Combinator;
use crate::name::{Name, NameSupply};
use crate::primitives::{DerivCtx, Registry};
use crate::program::Program;
use crate::term::build::*;
use crate::term::TargetTerm;
use crate::translate::{type_translate_fwd, type_translate_rev};
use crate::typecheck::TypeError;
use crate::types::{SourceType, TargetType};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Forward,
    Reverse,
}

impl Mode {
    /// `(D[τ]₁, D[τ]₂)` for this mode.
    pub fn translate(self, ty: &SourceType) -> (TargetType, TargetType) {
        match self {
            Mode::Forward => type_translate_fwd(ty),
            Mode::Reverse => type_translate_rev(ty),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdError {
    #[error("unknown operation `{0}`")]
    UnknownOp(String),
    #[error(transparent)]
    Type(#[from] TypeError),
}

/// The two halves of a transformed program, both open in `input`.
#[derive(Clone, Debug)]
pub struct AdOutput {
    pub input: Name,
    pub primal: TargetTerm,
    pub deriv: TargetTerm,
    pub mode: Mode,
    pub source_type: SourceType,
    pub result_type: SourceType,
}

impl AdOutput {
    pub fn input_type(&self) -> TargetType {
        self.mode.translate(&self.source_type).0
    }

    pub fn primal_type(&self) -> TargetType {
        self.mode.translate(&self.result_type).0
    }

    /// The predicted type of `deriv`.
    pub fn deriv_type(&self) -> TargetType {
        let (_, s2) = self.mode.translate(&self.source_type);
        let (_, t2) = self.mode.translate(&self.result_type);
        match self.mode {
            Mode::Forward => TargetType::linfun(s2, t2),
            Mode::Reverse => TargetType::linfun(t2, s2),
        }
    }

    pub fn primal_program(&self) -> TargetTerm {
        lam(&self.input, self.input_type(), self.primal.clone())
    }

    pub fn deriv_program(&self) -> TargetTerm {
        lam(&self.input, self.input_type(), self.deriv.clone())
    }
}

pub const INPUT: &str = "arg";

pub fn forward_ad(c: &Combinator) -> Result<AdOutput, AdError> {
    transform(Registry::builtin(), c, Mode::Forward)
}

pub fn reverse_ad(c: &Combinator) -> Result<AdOutput, AdError> {
    transform(Registry::builtin(), c, Mode::Reverse)
}

/// Elaborates and transforms a whole program.
pub fn differentiate(program: &Program, mode: Mode) -> Result<AdOutput, AdError> {
    differentiate_with(Registry::builtin(), program, mode)
}

pub fn differentiate_with(reg: &Registry, program: &Program, mode: Mode) -> Result<AdOutput, AdError> {
    let c = program.combinator_with(reg)?;
    transform(reg, &c, mode)
}

pub fn transform(reg: &Registry, c: &Combinator, mode: Mode) -> Result<AdOutput, AdError> {
    let input = Name::new(INPUT);
    let mut macros = Macros { reg, mode, supply: NameSupply::avoiding([&input]) };
    let (primal, deriv) = macros.go(c, &input)?;
    // Shared subterms are reused in several places; give every binder a unique name.
    let mut supply = NameSupply::avoiding([&input]);
    Ok(AdOutput {
        primal: primal.freshen(&mut supply),
        deriv: deriv.freshen(&mut supply),
        input,
        mode,
        source_type: c.dom(),
        result_type: c.cod(),
    })
}

struct Macros<'r> {
    reg: &'r Registry,
    mode: Mode,
    supply: NameSupply,
}

impl Macros<'_> {
    fn d1(&self, t: &SourceType) -> TargetType {
        self.mode.translate(t).0
    }

    fn d2(&self, t: &SourceType) -> TargetType {
        self.mode.translate(t).1
    }

    fn go(&mut self, c: &Combinator, x: &Name) -> Result<(TargetTerm, TargetTerm), AdError> {
        use Combinator as C;
        let fwd = self.mode == Mode::Forward;
        Ok(match c {
            C::Id(t) => (var(x), lid(self.d2(t))),
            C::Comp(f, g) => {
                let (pf, df) = self.go(f, x)?;
                let y = self.supply.fresh("y");
                let (pg, dg) = self.go(g, &y)?;
                let ty = self.d1(&f.cod());
                let deriv = if fwd { lcomp(df, dg) } else { lcomp(dg, df) };
                (let_in(&y, ty.clone(), pf.clone(), pg), let_in(&y, ty, pf, deriv))
            }
            C::Terminal(t) => {
                let d = self.d2(t);
                let z = if fwd { TargetType::linfun(d, TargetType::Unit) } else { TargetType::linfun(TargetType::Unit, d) };
                (unit(), zero(z))
            }
            C::Pair(f, g) => {
                let (pf, df) = self.go(f, x)?;
                let (pg, dg) = self.go(g, x)?;
                let deriv = if fwd {
                    lpair(df, dg)
                } else {
                    let (a, b) = (self.d2(&f.cod()), self.d2(&g.cod()));
                    plus(lcomp(lfst(a.clone(), b.clone()), df), lcomp(lsnd(a, b), dg))
                };
                (pair(pf, pg), deriv)
            }
            C::Fst(s, t) => {
                let (a, b) = (self.d2(s), self.d2(t));
                let deriv = if fwd { lfst(a, b) } else { lpair(lid(a.clone()), zero(TargetType::linfun(a, b))) };
                (fst(var(x)), deriv)
            }
            C::Snd(s, t) => {
                let (a, b) = (self.d2(s), self.d2(t));
                let deriv = if fwd { lsnd(a, b) } else { lpair(zero(TargetType::linfun(b.clone(), a)), lid(b)) };
                (snd(var(x)), deriv)
            }
            C::Ev(s, t) => {
                let y = self.supply.fresh("y");
                let primal = fst(app(fst(var(x)), snd(var(x))));
                let (s1, t2) = (self.d1(s), self.d2(t));
                let inner = snd(app(fst(var(x)), var(&y)));
                let deriv = if fwd {
                    let fty = TargetType::fun(s1.clone(), t2.clone());
                    let s2 = self.d2(s);
                    plus(
                        lcomp(lfst(fty.clone(), s2.clone()), leval(var(&y), t2)),
                        lcomp(lsnd(fty, s2), inner),
                    )
                } else {
                    lpair(lsing(var(&y), t2), inner)
                };
                (primal, let_in(&y, s1, snd(var(x)), deriv))
            }
            C::Curry(body, s, t, _) => {
                let y = self.supply.fresh("y");
                let z = self.supply.fresh("z");
                let (pb, db) = self.go(body, &z)?;
                let (s1, t1) = (self.d1(s), self.d1(t));
                let (s2, t2) = (self.d2(s), self.d2(t));
                let ctx1 = TargetType::prod(s1, t1.clone());
                let bind = |body: TargetTerm| let_in(&z, ctx1.clone(), pair(var(x), var(&y)), body);
                if fwd {
                    let inj2 = lpair(zero(TargetType::linfun(t2.clone(), s2.clone())), lid(t2.clone()));
                    let primal = lam(&y, t1.clone(), bind(pair(pb, lcomp(inj2, db.clone()))));
                    let inj1 = lpair(lid(s2.clone()), zero(TargetType::linfun(s2, t2)));
                    let deriv = lswap(lam(&y, t1, bind(lcomp(inj1, db))));
                    (primal, deriv)
                } else {
                    let primal = lam(&y, t1.clone(), bind(pair(pb, lcomp(db.clone(), lsnd(s2.clone(), t2.clone())))));
                    let family = lam(&y, t1, bind(db));
                    let deriv = lcomp(lcurryinv(family, TargetType::prod(s2.clone(), t2.clone())), lfst(s2, t2));
                    (primal, deriv)
                }
            }
            C::Op { op, sig } => {
                let spec = self.reg.op(op.name.as_str()).ok_or_else(|| AdError::UnknownOp(op.name.to_string()))?;
                let mut cx = DerivCtx { op, sig, x, supply: &mut self.supply };
                let primal = spec.primal_term(fwd, &mut cx);
                let deriv = if fwd { (spec.fwd_deriv)(&mut cx) } else { (spec.rev_deriv)(&mut cx) };
                (primal, deriv)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::SourceTerm;
    use crate::typecheck::{typecheck_target, Context};

    fn r(n: usize) -> SourceType {
        SourceType::real(n)
    }

    fn check_types(out: &AdOutput) {
        let ctx: Context<TargetType> = [(out.input.clone(), out.input_type())].into_iter().collect();
        assert_eq!(typecheck_target(&ctx, &out.primal), Ok(out.primal_type()));
        assert_eq!(typecheck_target(&ctx, &out.deriv), Ok(out.deriv_type()));
    }

    #[test]
    fn identity_derivative_is_lid() {
        for mode in [Mode::Forward, Mode::Reverse] {
            let out = transform(Registry::builtin(), &Combinator::Id(r(3)), mode).unwrap();
            assert_eq!(out.deriv, lid(TargetType::real(3)));
            assert_eq!(out.primal, var(&out.input));
        }
    }

    #[test]
    fn terminal_derivative_is_zero() {
        let out = reverse_ad(&Combinator::Terminal(r(2))).unwrap();
        assert_eq!(out.deriv, zero(TargetType::linfun(TargetType::Unit, TargetType::real(2))));
    }

    #[test]
    fn reverse_projection_injects() {
        let out = reverse_ad(&Combinator::Fst(r(1), r(2))).unwrap();
        let (a, b) = (TargetType::real(1), TargetType::real(2));
        assert_eq!(out.deriv, lpair(lid(a.clone()), zero(TargetType::linfun(a, b))));
    }

    #[test]
    fn transformed_higher_order_programs_typecheck() {
        let x = Name::new("x");
        let f = Name::new("f");
        let z = Name::new("z");
        let a = Name::new("a");
        let body = SourceTerm::let_in(
            &f,
            SourceType::fun(r(1), r(1)),
            SourceTerm::lam(&z, r(1), SourceTerm::op("mul", SourceTerm::pair(SourceTerm::var(&z), SourceTerm::op("sum", SourceTerm::var(&x))))),
            SourceTerm::op(
                "map",
                SourceTerm::pair(
                    SourceTerm::lam(&a, r(1), SourceTerm::app(SourceTerm::var(&f), SourceTerm::op("sigmoid", SourceTerm::var(&a)))),
                    SourceTerm::var(&x),
                ),
            ),
        );
        let p = Program::new(&x, r(3), body);
        for mode in [Mode::Forward, Mode::Reverse] {
            let out = differentiate(&p, mode).unwrap();
            assert_eq!(out.result_type, r(3));
            check_types(&out);
        }
    }

    #[test]
    fn unknown_op_in_combinator_is_reported() {
        let c = Combinator::Op {
            op: crate::term::PrimOp::named("nope"),
            sig: crate::primitives::OpSig { dom: r(1), cod: r(1) },
        };
        assert_eq!(forward_ad(&c).unwrap_err(), AdError::UnknownOp("nope".into()));
    }

    #[test]
    fn binders_are_unique_after_transform() {
        let x = Name::new("x");
        let body = SourceTerm::op("mul", SourceTerm::pair(SourceTerm::op("square", SourceTerm::var(&x)), SourceTerm::var(&x)));
        let out = differentiate(&Program::new(&x, r(2), body), Mode::Reverse).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        let mut dup = false;
        for t in [&out.primal, &out.deriv] {
            t.visit(&mut |n| {
                if let TargetTerm::Lam(b, _, _) = n {
                    dup |= !seen.insert(b.clone());
                }
            });
        }
        assert!(!dup);
    }
}
