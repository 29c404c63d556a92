//! Runtime values and the monoid structure (`zero`, `+`) at every type.
//!
//! Linear functions are ordinary functions hidden behind [`LinValue`];
//! `Map` values are finite sequences of key/value pairs whose order and
//! grouping are never observed except through `lcurryinv`.

use std::fmt;
use std::sync::Arc;

use crate::combinator::Combinator;
use crate::name::Name;
use crate::term::TargetTerm;
use crate::types::TargetType;

use super::RuntimeError;

#[derive(Clone)]
pub enum Value {
    Real(Arc<[f64]>),
    Unit,
    Pair(Arc<(Value, Value)>),
    Fun(Arc<FunValue>),
    Lin(Arc<LinValue>),
    Map(Arc<Vec<(Value, Value)>>),
}

pub enum FunValue {
    Closure { binder: Name, body: Arc<TargetTerm>, env: Env },
    /// `λ_. zero_τ`.
    Zero(TargetType),
    /// Pointwise sum of two functions.
    Sum(Value, Value),
    /// `λx. applin(t x, input)`, the result of applying `lswap t`.
    Swapped { family: Value, input: Value },
    /// A curried combinator with its captured left argument.
    Curried { body: Arc<Combinator>, captured: Value },
}

pub enum LinValue {
    Id,
    /// Diagrammatic composition: the first component runs first.
    Comp(Value, Value),
    Fst,
    Snd,
    Pair(Value, Value),
    Op { name: Name, primal: Value },
    Swap(Value),
    Eval(Value),
    Sing(Value),
    CurryInv { family: Value, cod: TargetType },
    Zero(TargetType),
    Plus(Value, Value),
}

/// A persistent variable environment.
#[derive(Clone, Default)]
pub struct Env(Option<Arc<EnvNode>>);

struct EnvNode {
    name: Name,
    value: Value,
    next: Env,
}

impl Env {
    pub fn new() -> Self {
        Env(None)
    }

    pub fn bind(&self, name: &Name, value: Value) -> Env {
        Env(Some(Arc::new(EnvNode { name: name.clone(), value, next: self.clone() })))
    }

    pub fn lookup(&self, name: &Name) -> Option<&Value> {
        let mut cur = self;
        while let Some(node) = &cur.0 {
            if &node.name == name {
                return Some(&node.value);
            }
            cur = &node.next;
        }
        None
    }
}

impl FromIterator<(Name, Value)> for Env {
    fn from_iter<I: IntoIterator<Item = (Name, Value)>>(iter: I) -> Self {
        iter.into_iter().fold(Env::new(), |env, (n, v)| env.bind(&n, v))
    }
}

impl Value {
    pub fn real(data: impl Into<Arc<[f64]>>) -> Self {
        Value::Real(data.into())
    }

    pub fn pair(a: Value, b: Value) -> Self {
        Value::Pair(Arc::new((a, b)))
    }

    pub fn lin(l: LinValue) -> Self {
        Value::Lin(Arc::new(l))
    }

    pub fn fun(f: FunValue) -> Self {
        Value::Fun(Arc::new(f))
    }

    pub fn map(entries: Vec<(Value, Value)>) -> Self {
        Value::Map(Arc::new(entries))
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match self {
            Value::Real(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&Value, &Value)> {
        match self {
            Value::Pair(p) => Some((&p.0, &p.1)),
            _ => None,
        }
    }

    /// Builds a value of first-order type `ty` from its flattened reals.
    pub fn from_flat(ty: &TargetType, data: &[f64]) -> Option<Value> {
        fn go(ty: &TargetType, data: &[f64], pos: &mut usize) -> Option<Value> {
            Some(match ty {
                TargetType::Real(n) => {
                    let v = data.get(*pos..*pos + n)?;
                    *pos += n;
                    Value::real(v)
                }
                TargetType::Unit => Value::Unit,
                TargetType::Prod(a, b) => {
                    let a = go(a, data, pos)?;
                    Value::pair(a, go(b, data, pos)?)
                }
                _ => return None,
            })
        }
        let mut pos = 0;
        let v = go(ty, data, &mut pos)?;
        (pos == data.len()).then_some(v)
    }

    /// The reals of a first-order value, left to right.
    pub fn to_flat(&self) -> Option<Vec<f64>> {
        let mut out = Vec::new();
        self.flatten_into(&mut out).then_some(out)
    }

    fn flatten_into(&self, out: &mut Vec<f64>) -> bool {
        match self {
            Value::Real(v) => {
                out.extend_from_slice(v);
                true
            }
            Value::Unit => true,
            Value::Pair(p) => p.0.flatten_into(out) && p.1.flatten_into(out),
            _ => false,
        }
    }

    /// The real-vector leaves of a first-order value.
    pub fn leaves(&self) -> Option<Vec<&[f64]>> {
        fn go<'a>(v: &'a Value, out: &mut Vec<&'a [f64]>) -> bool {
            match v {
                Value::Real(r) => {
                    out.push(r);
                    true
                }
                Value::Unit => true,
                Value::Pair(p) => go(&p.0, out) && go(&p.1, out),
                _ => false,
            }
        }
        let mut out = Vec::new();
        go(self, &mut out).then_some(out)
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Real(v) => write!(f, "{:?}", &v[..]),
            Value::Unit => f.write_str("()"),
            Value::Pair(p) => write!(f, "({:?}, {:?})", p.0, p.1),
            Value::Fun(_) => f.write_str("<fun>"),
            Value::Lin(_) => f.write_str("<linear>"),
            Value::Map(m) => f.debug_list().entries(m.iter().map(|(k, v)| (k, v))).finish(),
        }
    }
}

/// The additive unit at `ty`.
pub fn zero_of(ty: &TargetType) -> Value {
    match ty {
        TargetType::Real(n) => Value::real(vec![0.0; *n]),
        TargetType::Unit => Value::Unit,
        TargetType::Prod(a, b) => Value::pair(zero_of(a), zero_of(b)),
        TargetType::Fun(_, b) => Value::fun(FunValue::Zero((**b).clone())),
        TargetType::LinFun(_, b) => Value::lin(LinValue::Zero((**b).clone())),
        TargetType::Map(..) => Value::map(Vec::new()),
    }
}

/// Monoid addition, dispatched on the shape of the operands: vector sum,
/// componentwise on pairs, pointwise on (linear) functions, concatenation
/// on maps.
pub fn plus_values(a: &Value, b: &Value) -> Result<Value, RuntimeError> {
    Ok(match (a, b) {
        (Value::Real(x), Value::Real(y)) => {
            if x.len() != y.len() {
                return Err(RuntimeError::WidthMismatch { left: x.len(), right: y.len() });
            }
            Value::real(x.iter().zip(y.iter()).map(|(p, q)| p + q).collect::<Vec<_>>())
        }
        (Value::Unit, Value::Unit) => Value::Unit,
        (Value::Pair(p), Value::Pair(q)) => Value::pair(plus_values(&p.0, &q.0)?, plus_values(&p.1, &q.1)?),
        (Value::Fun(_), Value::Fun(_)) => Value::fun(FunValue::Sum(a.clone(), b.clone())),
        (Value::Lin(_), Value::Lin(_)) => Value::lin(LinValue::Plus(a.clone(), b.clone())),
        (Value::Map(m), Value::Map(n)) => Value::map(m.iter().chain(n.iter()).cloned().collect()),
        _ => return Err(RuntimeError::Stuck(format!("cannot add {a:?} and {b:?}"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros() {
        assert_eq!(zero_of(&TargetType::real(3)).to_flat(), Some(vec![0.0; 3]));
        let m = TargetType::map(TargetType::real(1), TargetType::real(1));
        assert!(matches!(zero_of(&m), Value::Map(e) if e.is_empty()));
        let p = TargetType::prod(TargetType::real(1), TargetType::Unit);
        assert_eq!(zero_of(&p).to_flat(), Some(vec![0.0]));
    }

    #[test]
    fn vector_and_map_addition() {
        let s = plus_values(&Value::real(vec![1.0, 2.0]), &Value::real(vec![3.0, 4.0])).unwrap();
        assert_eq!(s.to_flat(), Some(vec![4.0, 6.0]));
        let one = |k: f64, v: f64| Value::map(vec![(Value::real(vec![k]), Value::real(vec![v]))]);
        let m = plus_values(&one(1.0, 2.0), &one(3.0, 4.0)).unwrap();
        let Value::Map(entries) = m else { panic!() };
        let flat: Vec<_> = entries.iter().map(|(k, v)| (k.to_flat().unwrap()[0], v.to_flat().unwrap()[0])).collect();
        assert_eq!(flat, vec![(1.0, 2.0), (3.0, 4.0)]);
    }

    #[test]
    fn width_mismatch() {
        assert_eq!(
            plus_values(&Value::real(vec![1.0]), &Value::real(vec![1.0, 2.0])).unwrap_err(),
            RuntimeError::WidthMismatch { left: 1, right: 2 }
        );
    }

    #[test]
    fn flat_round_trip() {
        let ty = TargetType::prod(TargetType::real(2), TargetType::prod(TargetType::Unit, TargetType::real(1)));
        let v = Value::from_flat(&ty, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(v.to_flat(), Some(vec![1.0, 2.0, 3.0]));
        assert!(Value::from_flat(&ty, &[1.0]).is_none());
        assert!(Value::from_flat(&ty, &[1.0, 2.0, 3.0, 4.0]).is_none());
    }

    #[test]
    fn environment_shadows_and_persists() {
        let x = Name::new("x");
        let e1 = Env::new().bind(&x, Value::real(vec![1.0]));
        let e2 = e1.bind(&x, Value::real(vec![2.0]));
        assert_eq!(e1.lookup(&x).unwrap().to_flat(), Some(vec![1.0]));
        assert_eq!(e2.lookup(&x).unwrap().to_flat(), Some(vec![2.0]));
    }
}
