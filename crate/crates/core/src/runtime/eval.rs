//! The definitional evaluator: environment-based call-by-value.

use std::sync::Arc;

use crate::combinator::Combinator;
use crate::primitives::{LinSemantics, Registry, Semantics};
use crate::term::{PrimOp, TargetTerm};

use super::value::{plus_values, zero_of, Env, FunValue, LinValue, Value};
use super::RuntimeError;

type Result<T> = std::result::Result<T, RuntimeError>;

/// Evaluates `term` in `env` with the builtin registry.
pub fn eval_definitional(env: &Env, term: &TargetTerm) -> Result<Value> {
    Interp::new(Registry::builtin()).eval(env, term)
}

/// Runs a combinator on a value using the cartesian closed structure directly.
pub fn eval_combinator(c: &Combinator, v: &Value) -> Result<Value> {
    Interp::new(Registry::builtin()).run(c, v)
}

pub struct Interp<'r> {
    reg: &'r Registry,
}

fn stuck<T>(what: impl Into<String>) -> Result<T> {
    Err(RuntimeError::Stuck(what.into()))
}

fn lin_of(v: &Value) -> Result<&LinValue> {
    match v {
        Value::Lin(l) => Ok(l),
        other => stuck(format!("expected a linear function, found {other:?}")),
    }
}

fn split(v: &Value) -> Result<(&Value, &Value)> {
    v.as_pair().ok_or_else(|| RuntimeError::Stuck(format!("expected a pair, found {v:?}")))
}

fn real_of(v: &Value) -> Result<&[f64]> {
    v.as_real().ok_or_else(|| RuntimeError::Stuck(format!("expected reals, found {v:?}")))
}

impl<'r> Interp<'r> {
    pub fn new(reg: &'r Registry) -> Self {
        Interp { reg }
    }

    pub fn eval(&self, env: &Env, term: &TargetTerm) -> Result<Value> {
        use TargetTerm as T;
        let lin = |l: LinValue| Ok(Value::lin(l));
        match term {
            T::Var(x) => env.lookup(x).cloned().ok_or_else(|| RuntimeError::UnboundVariable(x.clone())),
            T::Op(op, a) => {
                let a = self.eval(env, a)?;
                self.apply_op(op, &a)
            }
            T::Unit => Ok(Value::Unit),
            T::Pair(a, b) => Ok(Value::pair(self.eval(env, a)?, self.eval(env, b)?)),
            T::Fst(a) => Ok(split(&self.eval(env, a)?)?.0.clone()),
            T::Snd(a) => Ok(split(&self.eval(env, a)?)?.1.clone()),
            T::Lam(x, _, body) => Ok(Value::fun(FunValue::Closure { binder: x.clone(), body: body.clone(), env: env.clone() })),
            T::App(f, a) => {
                let f = self.eval(env, f)?;
                let a = self.eval(env, a)?;
                self.apply(&f, &a)
            }
            T::Zero(ty) => Ok(zero_of(ty)),
            T::Plus(a, b) => plus_values(&self.eval(env, a)?, &self.eval(env, b)?),
            T::LOp(name, p) => lin(LinValue::Op { name: name.clone(), primal: self.eval(env, p)? }),
            T::LId(_) => lin(LinValue::Id),
            T::LComp(f, g) => {
                let f = self.eval(env, f)?;
                lin(LinValue::Comp(f, self.eval(env, g)?))
            }
            T::LApp(f, a) => {
                let f = self.eval(env, f)?;
                let a = self.eval(env, a)?;
                self.apply_lin(&f, &a)
            }
            T::LSwap(t) => lin(LinValue::Swap(self.eval(env, t)?)),
            T::LEval(t, _) => lin(LinValue::Eval(self.eval(env, t)?)),
            T::LSing(t, _) => lin(LinValue::Sing(self.eval(env, t)?)),
            T::LCurryInv(t, cod) => lin(LinValue::CurryInv { family: self.eval(env, t)?, cod: cod.clone() }),
            T::LFst(..) => lin(LinValue::Fst),
            T::LSnd(..) => lin(LinValue::Snd),
            T::LPair(f, g) => {
                let f = self.eval(env, f)?;
                lin(LinValue::Pair(f, self.eval(env, g)?))
            }
        }
    }

    pub fn apply(&self, f: &Value, a: &Value) -> Result<Value> {
        let Value::Fun(f) = f else { return stuck(format!("applying a non-function {f:?}")) };
        match &**f {
            FunValue::Closure { binder, body, env } => self.eval(&env.bind(binder, a.clone()), body),
            FunValue::Zero(cod) => Ok(zero_of(cod)),
            FunValue::Sum(g, h) => plus_values(&self.apply(g, a)?, &self.apply(h, a)?),
            FunValue::Swapped { family, input } => {
                let l = self.apply(family, a)?;
                self.apply_lin(&l, input)
            }
            FunValue::Curried { body, captured } => self.run(body, &Value::pair(captured.clone(), a.clone())),
        }
    }

    pub fn apply_lin(&self, l: &Value, a: &Value) -> Result<Value> {
        match lin_of(l)? {
            LinValue::Id => Ok(a.clone()),
            LinValue::Comp(f, g) => {
                let b = self.apply_lin(f, a)?;
                self.apply_lin(g, &b)
            }
            LinValue::Fst => Ok(split(a)?.0.clone()),
            LinValue::Snd => Ok(split(a)?.1.clone()),
            LinValue::Pair(f, g) => Ok(Value::pair(self.apply_lin(f, a)?, self.apply_lin(g, a)?)),
            LinValue::Op { name, primal } => self.apply_lop(name.as_str(), primal, a),
            LinValue::Swap(t) => Ok(Value::fun(FunValue::Swapped { family: t.clone(), input: a.clone() })),
            LinValue::Eval(x) => self.apply(a, x),
            LinValue::Sing(x) => Ok(Value::map(vec![(x.clone(), a.clone())])),
            LinValue::CurryInv { family, cod } => {
                let Value::Map(entries) = a else { return stuck(format!("lcurryinv applied to {a:?}")) };
                let mut acc = zero_of(cod);
                for (k, v) in entries.iter() {
                    let h = self.apply(family, k)?;
                    acc = plus_values(&acc, &self.apply_lin(&h, v)?)?;
                }
                Ok(acc)
            }
            LinValue::Zero(cod) => Ok(zero_of(cod)),
            LinValue::Plus(f, g) => plus_values(&self.apply_lin(f, a)?, &self.apply_lin(g, a)?),
        }
    }

    pub fn apply_op(&self, op: &PrimOp, arg: &Value) -> Result<Value> {
        let spec = self.reg.op(op.name.as_str()).ok_or_else(|| RuntimeError::UnknownOp(op.name.to_string()))?;
        match &spec.semantics {
            Semantics::FirstOrder(f) => {
                let leaves = arg.leaves().ok_or_else(|| RuntimeError::Stuck(format!("{} applied to {arg:?}", op.name)))?;
                Ok(Value::real(f(&op.params, &leaves)))
            }
            Semantics::Map => {
                let (f, v) = split(arg)?;
                let out = real_of(v)?
                    .iter()
                    .map(|&vi| Ok(real_of(&self.apply(f, &Value::real(vec![vi]))?)?[0]))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Value::real(out))
            }
        }
    }

    fn apply_lop(&self, name: &str, primal: &Value, a: &Value) -> Result<Value> {
        let spec = self.reg.lop(name).ok_or_else(|| RuntimeError::UnknownOp(name.to_string()))?;
        match &spec.semantics {
            LinSemantics::FirstOrder(f) => {
                let leaves = primal.leaves().ok_or_else(|| RuntimeError::Stuck(format!("{name} primal {primal:?}")))?;
                Ok(Value::real(f(&leaves, real_of(a)?)))
            }
            LinSemantics::MapJvp => {
                // zipWith (f;snd) v w + map g v
                let (f, v) = split(primal)?;
                let (g, w) = split(a)?;
                let (v, w) = (real_of(v)?, real_of(w)?);
                if v.len() != w.len() {
                    return Err(RuntimeError::WidthMismatch { left: v.len(), right: w.len() });
                }
                let mut out = Vec::with_capacity(v.len());
                for (&vi, &wi) in v.iter().zip(w) {
                    let x = Value::real(vec![vi]);
                    let fx = self.apply(f, &x)?;
                    let (_, d) = split(&fx)?;
                    let dw = real_of(&self.apply_lin(d, &Value::real(vec![wi]))?)?[0];
                    let gv = real_of(&self.apply(g, &x)?)?[0];
                    out.push(dw + gv);
                }
                Ok(Value::real(out))
            }
            LinSemantics::MapVjp => {
                // ⟨zip v w, zipWith (f;snd) v w⟩
                let (f, v) = split(primal)?;
                let (v, w) = (real_of(v)?, real_of(a)?);
                if v.len() != w.len() {
                    return Err(RuntimeError::WidthMismatch { left: v.len(), right: w.len() });
                }
                let mut entries = Vec::with_capacity(v.len());
                let mut adj = Vec::with_capacity(v.len());
                for (&vi, &wi) in v.iter().zip(w) {
                    let (x, y) = (Value::real(vec![vi]), Value::real(vec![wi]));
                    let fx = self.apply(f, &x)?;
                    let (_, d) = split(&fx)?;
                    adj.push(real_of(&self.apply_lin(d, &y)?)?[0]);
                    entries.push((x, y));
                }
                Ok(Value::pair(Value::map(entries), Value::real(adj)))
            }
        }
    }

    /// Runs a combinator as a morphism of the cartesian closed category of values.
    pub fn run(&self, c: &Combinator, v: &Value) -> Result<Value> {
        match c {
            Combinator::Id(_) => Ok(v.clone()),
            Combinator::Comp(f, g) => {
                let w = self.run(f, v)?;
                self.run(g, &w)
            }
            Combinator::Terminal(_) => Ok(Value::Unit),
            Combinator::Pair(f, g) => Ok(Value::pair(self.run(f, v)?, self.run(g, v)?)),
            Combinator::Fst(..) => Ok(split(v)?.0.clone()),
            Combinator::Snd(..) => Ok(split(v)?.1.clone()),
            Combinator::Ev(..) => {
                let (f, a) = split(v)?;
                self.apply(f, a)
            }
            Combinator::Curry(body, ..) => {
                Ok(Value::fun(FunValue::Curried { body: Arc::new((**body).clone()), captured: v.clone() }))
            }
            Combinator::Op { op, .. } => self.apply_op(op, v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::name::Name;
    use crate::term::build::*;
    use crate::types::TargetType;

    fn r(n: usize) -> TargetType {
        TargetType::real(n)
    }

    fn eval0(t: &TargetTerm) -> Value {
        eval_definitional(&Env::new(), t).unwrap()
    }

    fn flat(v: &Value) -> Vec<f64> {
        v.to_flat().unwrap()
    }

    #[test]
    fn sigmoid_at_zero() {
        assert_eq!(flat(&eval0(&op("sigmoid", constant(&[0.0])))), vec![0.5]);
    }

    #[test]
    fn singleton_builds_one_entry() {
        let m = eval0(&lapp(lsing(constant(&[7.0]), r(1)), constant(&[2.0])));
        let Value::Map(e) = m else { panic!() };
        assert_eq!(e.len(), 1);
        assert_eq!((flat(&e[0].0), flat(&e[0].1)), (vec![7.0], vec![2.0]));
    }

    #[test]
    fn curry_inverse_sums_over_entries() {
        // family k ↦ (v ↦ k * v); map [(2, 3), (5, 7)] ↦ 2*3 + 5*7
        let k = Name::new("k");
        let fam = lam(&k, r(1), lop("emul", var(&k)));
        let m = plus(
            lapp(lsing(constant(&[2.0]), r(1)), constant(&[3.0])),
            lapp(lsing(constant(&[5.0]), r(1)), constant(&[7.0])),
        );
        assert_eq!(flat(&eval0(&lapp(lcurryinv(fam.clone(), r(1)), m))), vec![41.0]);
        let empty = zero(TargetType::map(r(1), r(1)));
        assert_eq!(flat(&eval0(&lapp(lcurryinv(fam, r(1)), empty))), vec![0.0]);
    }

    #[test]
    fn beta_and_doubling() {
        let x = Name::new("x");
        let t = app(lam(&x, r(1), plus(var(&x), var(&x))), constant(&[2.0]));
        assert_eq!(flat(&eval0(&t)), vec![4.0]);
    }

    #[test]
    fn swap_then_apply_is_argument_flip() {
        // lswap (λx. emul x) applied to v gives λx. x * v
        let x = Name::new("x");
        let t = lapp(lswap(lam(&x, r(2), lop("emul", var(&x)))), constant(&[3.0, 4.0]));
        let g = eval0(&t);
        let interp = Interp::new(Registry::builtin());
        let out = interp.apply(&g, &Value::real(vec![2.0, 0.5])).unwrap();
        assert_eq!(flat(&out), vec![6.0, 2.0]);
    }

    #[test]
    fn function_plus_zero_is_pointwise() {
        let x = Name::new("x");
        let f = lam(&x, r(1), op("square", var(&x)));
        let sum = eval0(&plus(f.clone(), zero(TargetType::fun(r(1), r(1)))));
        let f = eval0(&f);
        let interp = Interp::new(Registry::builtin());
        for s in [-1.5, 0.0, 2.25] {
            let a = Value::real(vec![s]);
            assert_eq!(flat(&interp.apply(&sum, &a).unwrap()), flat(&interp.apply(&f, &a).unwrap()));
        }
    }

    #[test]
    fn linear_pair_and_projections() {
        let t = lapp(lpair(lsnd(r(1), r(1)), lfst(r(1), r(1))), pair(constant(&[1.0]), constant(&[2.0])));
        assert_eq!(flat(&eval0(&t)), vec![2.0, 1.0]);
    }

    #[test]
    fn combinator_semantics_matches_reified_term() {
        use crate::combinator::{elaborate, reify};
        use crate::term::SourceTerm;
        use crate::types::SourceType;
        let x = Name::new("x");
        let y = Name::new("y");
        let body = SourceTerm::app(
            SourceTerm::lam(&y, SourceType::real(2), SourceTerm::op("mul", SourceTerm::pair(SourceTerm::var(&y), SourceTerm::var(&x)))),
            SourceTerm::op("sigmoid", SourceTerm::var(&x)),
        );
        let c = elaborate(&[(x, SourceType::real(2))], &body).unwrap();
        let f = eval0(&reify(&c));
        let interp = Interp::new(Registry::builtin());
        let v = Value::real(vec![0.3, -1.2]);
        let a = interp.apply(&f, &v).unwrap();
        let b = interp.run(&c, &v).unwrap();
        assert_eq!(flat(&a), flat(&b));
    }
}
