//! Big-step call-by-name evaluation of closed target terms to normal forms.
//!
//! Normal forms at `realⁿ` are constants `op(const c, unit)`. Pairs are
//! normal with unevaluated components, λs and the linear combinators are
//! normal as they stand, and sums that cannot be computed (at function,
//! linear and `Map` types) stay as `N₁ + N₂`. `Map` normal forms are trees
//! of `zero`, `+` and `applin(lsing t, s)`.

use thiserror::Error;

use crate::name::{Name, NameSupply};
use crate::primitives::{LinSemantics, Registry, Semantics};
use crate::term::build::*;
use crate::term::{PrimOp, TargetTerm};
use crate::types::TargetType;

use super::value::Value;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymbolicError {
    #[error("no rule applies to {0}")]
    NoRuleApplies(String),
    #[error("free variable `{0}`")]
    FreeVariable(Name),
    #[error("unknown operation `{0}`")]
    UnknownOp(String),
}

type Result<T> = std::result::Result<T, SymbolicError>;

/// The normal form of a closed term, using the builtin registry.
pub fn eval_symbolic(term: &TargetTerm) -> Result<TargetTerm> {
    Symbolic::new(Registry::builtin(), term).eval(term)
}

/// Evaluates a closed term of first-order type and reads off its reals.
pub fn eval_symbolic_flat(term: &TargetTerm) -> Result<Vec<f64>> {
    Symbolic::new(Registry::builtin(), term).force_reals(term)
}

pub struct Symbolic<'r> {
    reg: &'r Registry,
    supply: NameSupply,
}

fn no_rule<T>(t: &TargetTerm) -> Result<T> {
    let mut s = format!("{t:?}");
    if s.len() > 200 {
        s.truncate(200);
        s.push_str("...");
    }
    Err(SymbolicError::NoRuleApplies(s))
}

fn const_params(t: &TargetTerm) -> Option<&[f64]> {
    match t {
        TargetTerm::Op(op, a) if op.is_const() && **a == TargetTerm::Unit => Some(&op.params),
        _ => None,
    }
}

/// Domain annotation of a function normal form.
fn fun_domain(t: &TargetTerm) -> Option<TargetType> {
    match t {
        TargetTerm::Lam(_, ty, _) => Some(ty.clone()),
        TargetTerm::Zero(TargetType::Fun(a, _)) => Some((**a).clone()),
        TargetTerm::Plus(a, b) => fun_domain(a).or_else(|| fun_domain(b)),
        _ => None,
    }
}

impl<'r> Symbolic<'r> {
    /// An evaluator for `term`, drawing fresh names that avoid its binders.
    pub fn new(reg: &'r Registry, term: &TargetTerm) -> Self {
        let binders = term.binders();
        Symbolic { reg, supply: NameSupply::avoiding(binders.iter()) }
    }

    pub fn eval(&mut self, t: &TargetTerm) -> Result<TargetTerm> {
        use TargetTerm as T;
        match t {
            T::Var(x) => Err(SymbolicError::FreeVariable(x.clone())),
            T::Op(op, a) => self.eval_op(op, a),
            T::Fst(a) | T::Snd(a) => match self.eval(a)? {
                T::Pair(l, r) => self.eval(if matches!(t, T::Fst(_)) { &l } else { &r }),
                _ => no_rule(t),
            },
            T::App(f, a) => match self.eval(f)? {
                T::Lam(x, _, body) => {
                    let n = self.eval(a)?;
                    let b = body.subst(&x, &n, &mut self.supply);
                    self.eval(&b)
                }
                T::Zero(TargetType::Fun(_, cod)) => self.eval(&zero(*cod)),
                T::Plus(g, h) => {
                    let n1 = self.eval(&app((*g).clone(), (**a).clone()))?;
                    let n2 = self.eval(&app((*h).clone(), (**a).clone()))?;
                    self.add(n1, n2)
                }
                _ => no_rule(t),
            },
            T::Zero(ty) => Ok(match ty {
                TargetType::Real(n) => constant(&vec![0.0; *n]),
                TargetType::Unit => unit(),
                TargetType::Prod(a, b) => {
                    let za = self.eval(&zero((**a).clone()))?;
                    pair(za, self.eval(&zero((**b).clone()))?)
                }
                _ => t.clone(),
            }),
            T::Plus(a, b) => {
                let na = self.eval(a)?;
                let nb = self.eval(b)?;
                self.add(na, nb)
            }
            T::LApp(f, s) => self.applin(f, s),
            _ => Ok(t.clone()),
        }
    }

    /// `N₁ + N₂` on normal forms.
    fn add(&mut self, a: TargetTerm, b: TargetTerm) -> Result<TargetTerm> {
        use TargetTerm as T;
        if let (Some(x), Some(y)) = (const_params(&a), const_params(&b)) {
            if x.len() != y.len() {
                return no_rule(&plus(a, b));
            }
            return Ok(constant(&x.iter().zip(y).map(|(p, q)| p + q).collect::<Vec<_>>()));
        }
        match (&a, &b) {
            (T::Unit, T::Unit) => Ok(unit()),
            (T::Pair(a1, a2), T::Pair(b1, b2)) => {
                let l = self.eval(&plus((**a1).clone(), (**b1).clone()))?;
                let r = self.eval(&plus((**a2).clone(), (**b2).clone()))?;
                Ok(pair(l, r))
            }
            _ => Ok(plus(a, b)),
        }
    }

    fn applin(&mut self, f: &TargetTerm, s: &TargetTerm) -> Result<TargetTerm> {
        use TargetTerm as T;
        let nf = self.eval(f)?;
        match &nf {
            T::Zero(TargetType::LinFun(_, cod)) => self.eval(&zero((**cod).clone())),
            T::Plus(t1, t2) => {
                let n1 = self.applin(t1, s)?;
                let n2 = self.applin(t2, s)?;
                self.add(n1, n2)
            }
            T::LOp(name, p) => self.apply_lop(name.as_str(), p, s),
            T::LId(_) => self.eval(s),
            T::LComp(t1, t2) => {
                let n = self.applin(t1, s)?;
                self.applin(t2, &n)
            }
            T::LFst(..) | T::LSnd(..) => match self.eval(s)? {
                T::Pair(l, r) => self.eval(if matches!(nf, T::LFst(..)) { &l } else { &r }),
                _ => no_rule(&lapp(nf.clone(), s.clone())),
            },
            T::LPair(t1, t2) => {
                let n1 = self.applin(t1, s)?;
                Ok(pair(n1, self.applin(t2, s)?))
            }
            T::LEval(t2, _) => self.eval(&app(s.clone(), (**t2).clone())),
            T::LSwap(t2) => {
                let n2 = self.eval(t2)?;
                let Some(dom) = fun_domain(&n2) else { return no_rule(&nf) };
                let x = self.supply.fresh("x");
                Ok(lam(&x, dom, lapp(app(n2, var(&x)), s.clone())))
            }
            T::LSing(..) => Ok(lapp(nf.clone(), s.clone())),
            T::LCurryInv(t2, cod) => {
                let ns = self.eval(s)?;
                match &ns {
                    T::Zero(TargetType::Map(..)) => self.eval(&zero(cod.clone())),
                    T::Plus(s1, s2) => {
                        let n1 = self.applin(&nf, s1)?;
                        let n2 = self.applin(&nf, s2)?;
                        self.add(n1, n2)
                    }
                    T::LApp(t1, s1) => match self.eval(t1)? {
                        T::LSing(key, _) => {
                            let h = app((**t2).clone(), (*key).clone());
                            self.applin(&h, s1)
                        }
                        _ => no_rule(&ns),
                    },
                    _ => no_rule(&ns),
                }
            }
            _ => no_rule(&lapp(nf.clone(), s.clone())),
        }
    }

    /// Evaluates a first-order term all the way down to reals.
    pub fn force_reals(&mut self, t: &TargetTerm) -> Result<Vec<f64>> {
        let v = self.force_value(t)?;
        Ok(v.to_flat().expect("forced values are first-order"))
    }

    fn force_value(&mut self, t: &TargetTerm) -> Result<Value> {
        let n = self.eval(t)?;
        if let Some(c) = const_params(&n) {
            return Ok(Value::real(c));
        }
        match &n {
            TargetTerm::Unit => Ok(Value::Unit),
            TargetTerm::Pair(a, b) => {
                let a = self.force_value(a)?;
                Ok(Value::pair(a, self.force_value(b)?))
            }
            _ => no_rule(&n),
        }
    }

    /// Splits a normal form of type `(realⁿ → …) × realᵐ` into the function
    /// normal form and the reals.
    fn fun_and_reals(&mut self, t: &TargetTerm) -> Result<(TargetTerm, Vec<f64>)> {
        match self.eval(t)? {
            TargetTerm::Pair(f, v) => {
                let f = self.eval(&f)?;
                Ok((f, self.force_reals(&v)?))
            }
            other => no_rule(&other),
        }
    }

    fn eval_op(&mut self, op: &PrimOp, a: &TargetTerm) -> Result<TargetTerm> {
        let spec = self.reg.op(op.name.as_str()).ok_or_else(|| SymbolicError::UnknownOp(op.name.to_string()))?;
        match &spec.semantics {
            Semantics::FirstOrder(f) => {
                let v = self.force_value(a)?;
                let leaves = v.leaves().expect("forced values are first-order");
                Ok(constant(&f(&op.params, &leaves)))
            }
            Semantics::Map => {
                let (f, v) = self.fun_and_reals(a)?;
                let mut out = Vec::with_capacity(v.len());
                for vi in v {
                    out.push(self.force_reals(&app(f.clone(), constant(&[vi])))?[0]);
                }
                Ok(constant(&out))
            }
        }
    }

    fn apply_lop(&mut self, name: &str, p: &TargetTerm, s: &TargetTerm) -> Result<TargetTerm> {
        let spec = self.reg.lop(name).ok_or_else(|| SymbolicError::UnknownOp(name.to_string()))?;
        let r1 = TargetType::real(1);
        match &spec.semantics {
            LinSemantics::FirstOrder(f) => {
                let pv = self.force_value(p)?;
                let sv = self.force_reals(s)?;
                Ok(constant(&f(&pv.leaves().expect("forced values are first-order"), &sv)))
            }
            LinSemantics::MapJvp => {
                let (f, v) = self.fun_and_reals(p)?;
                let (g, w) = self.fun_and_reals(s)?;
                if v.len() != w.len() {
                    return no_rule(&lop(name, p.clone()));
                }
                let mut out = Vec::with_capacity(v.len());
                for (vi, wi) in v.into_iter().zip(w) {
                    let lin = lapp(snd(app(f.clone(), constant(&[vi]))), constant(&[wi]));
                    out.push(self.force_reals(&plus(lin, app(g.clone(), constant(&[vi]))))?[0]);
                }
                Ok(constant(&out))
            }
            LinSemantics::MapVjp => {
                let (f, v) = self.fun_and_reals(p)?;
                let w = self.force_reals(s)?;
                if v.len() != w.len() {
                    return no_rule(&lop(name, p.clone()));
                }
                let mut entries = zero(TargetType::map(r1.clone(), r1.clone()));
                let mut adj = Vec::with_capacity(v.len());
                for (vi, wi) in v.into_iter().zip(w) {
                    let lin = lapp(snd(app(f.clone(), constant(&[vi]))), constant(&[wi]));
                    adj.push(self.force_reals(&lin)?[0]);
                    entries = plus(entries, lapp(lsing(constant(&[vi]), r1.clone()), constant(&[wi])));
                }
                Ok(pair(entries, constant(&adj)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: usize) -> TargetType {
        TargetType::real(n)
    }

    #[test]
    fn doubling_by_beta() {
        let x = Name::new("x");
        let t = app(lam(&x, r(1), plus(var(&x), var(&x))), constant(&[2.0]));
        assert_eq!(eval_symbolic(&t), Ok(constant(&[4.0])));
    }

    #[test]
    fn curry_inverse_of_zero_map_is_zero() {
        let k = Name::new("k");
        let fam = lam(&k, r(1), lop("emul", var(&k)));
        let t = lapp(lcurryinv(fam, r(1)), zero(TargetType::map(r(1), r(1))));
        assert_eq!(eval_symbolic(&t), Ok(constant(&[0.0])));
    }

    #[test]
    fn curry_inverse_distributes_over_map_sums() {
        let k = Name::new("k");
        let fam = lam(&k, r(1), lop("emul", var(&k)));
        let m = plus(
            lapp(lsing(constant(&[2.0]), r(1)), constant(&[3.0])),
            lapp(lsing(constant(&[5.0]), r(1)), constant(&[7.0])),
        );
        assert_eq!(eval_symbolic(&lapp(lcurryinv(fam, r(1)), m)), Ok(constant(&[41.0])));
    }

    #[test]
    fn pairs_stay_lazy() {
        let t = pair(op("sum", constant(&[1.0, 2.0])), unit());
        assert_eq!(eval_symbolic(&t), Ok(t.clone()));
        assert_eq!(eval_symbolic_flat(&t), Ok(vec![3.0]));
    }

    #[test]
    fn singleton_application_is_a_map_normal_form() {
        let t = lapp(lsing(constant(&[1.0]), r(1)), op("sum", constant(&[1.0, 1.0])));
        assert_eq!(eval_symbolic(&t), Ok(t.clone()));
    }

    #[test]
    fn swap_produces_a_lambda() {
        let x = Name::new("x");
        let t = lapp(lswap(lam(&x, r(2), lop("emul", var(&x)))), constant(&[3.0, 4.0]));
        let n = eval_symbolic(&t).unwrap();
        assert!(matches!(n, TargetTerm::Lam(..)));
        assert_eq!(eval_symbolic_flat(&app(n, constant(&[2.0, 0.5]))), Ok(vec![6.0, 2.0]));
    }

    #[test]
    fn free_variables_are_rejected() {
        let x = Name::new("x");
        assert_eq!(eval_symbolic(&var(&x)), Err(SymbolicError::FreeVariable(x)));
    }

    #[test]
    fn ill_typed_projection_has_no_rule() {
        assert!(matches!(eval_symbolic(&fst(constant(&[1.0]))), Err(SymbolicError::NoRuleApplies(_))));
    }
}
