//! Pairs of βη-equal programs, and a comparison of their derivatives.
//!
//! Derivatives of equal programs must agree as functions. Higher-order
//! results are compared through [`Observer`]: primals are applied to
//! sampled arguments, forward derivatives to sampled tangents and reverse
//! derivatives to sampled cotangents (which may be `Map`s).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ad::{differentiate, AdOutput, Mode};
use crate::name::Name;
use crate::program::Program;
use crate::runtime::value::{Env, Value};
use crate::runtime::RuntimeError;
use crate::term::SourceTerm;
use crate::types::SourceType;

use super::observe::Observer;
use super::{max_rel_err, CheckError, Result};

/// Tolerance for derivatives of βη-equal programs.
pub const BETA_ETA_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct EquationPair {
    pub name: &'static str,
    pub lhs: Program,
    pub rhs: Program,
}

fn r(n: usize) -> SourceType {
    SourceType::Real(n)
}

fn v(x: &str) -> SourceTerm {
    SourceTerm::var(&Name::new(x))
}

fn n(x: &str) -> Name {
    Name::new(x)
}

fn op(name: &str, a: SourceTerm) -> SourceTerm {
    SourceTerm::op(name, a)
}

fn op2(name: &str, a: SourceTerm, b: SourceTerm) -> SourceTerm {
    SourceTerm::op(name, SourceTerm::pair(a, b))
}

fn lam(x: &str, ty: SourceType, body: SourceTerm) -> SourceTerm {
    SourceTerm::lam(&n(x), ty, body)
}

fn let_in(x: &str, ty: SourceType, bound: SourceTerm, body: SourceTerm) -> SourceTerm {
    SourceTerm::let_in(&n(x), ty, bound, body)
}

fn pair(name: &'static str, ty: SourceType, lhs: SourceTerm, rhs: SourceTerm) -> EquationPair {
    let x = n("x");
    EquationPair { name, lhs: Program::new(&x, ty.clone(), lhs), rhs: Program::new(&x, ty, rhs) }
}

/// The catalogue. Every pair has the input variable `x`.
pub fn catalogue() -> Vec<EquationPair> {
    let x = || v("x");
    let sx = || op("sigmoid", x());
    let scalar = || SourceType::fun(r(1), r(1));
    let f_def = || lam("z", r(1), op2("scale", v("z"), op("square", x())));
    let split = || SourceType::prod(r(3), r(1));
    vec![
        pair(
            "unit-eta",
            SourceType::prod(r(2), SourceType::Unit),
            SourceTerm::pair(op("square", SourceTerm::fst(x())), SourceTerm::snd(x())),
            SourceTerm::pair(op("square", SourceTerm::fst(x())), SourceTerm::Unit),
        ),
        pair("fst-beta", r(2), SourceTerm::fst(SourceTerm::pair(sx(), op("square", x()))), sx()),
        pair("snd-beta", r(2), SourceTerm::snd(SourceTerm::pair(sx(), op2("mul", x(), sx()))), op2("mul", x(), sx())),
        pair(
            "pair-eta",
            SourceType::prod(r(2), r(1)),
            let_in(
                "t",
                SourceType::prod(r(2), r(1)),
                SourceTerm::pair(op("square", SourceTerm::fst(x())), op("sigmoid", SourceTerm::snd(x()))),
                SourceTerm::pair(SourceTerm::fst(v("t")), SourceTerm::snd(v("t"))),
            ),
            SourceTerm::pair(op("square", SourceTerm::fst(x())), op("sigmoid", SourceTerm::snd(x()))),
        ),
        pair(
            "fun-beta",
            r(2),
            SourceTerm::app(
                lam("p", SourceType::prod(r(2), r(2)), op2("mul", SourceTerm::fst(v("p")), SourceTerm::snd(v("p")))),
                SourceTerm::pair(sx(), x()),
            ),
            op2("mul", sx(), x()),
        ),
        pair(
            "fun-eta",
            r(2),
            let_in("f", SourceType::fun(r(1), r(2)), f_def(), lam("w", r(1), SourceTerm::app(v("f"), v("w")))),
            let_in("f", SourceType::fun(r(1), r(2)), f_def(), v("f")),
        ),
        pair(
            "let-sharing",
            r(3),
            let_in("y", r(3), sx(), op2("add", op2("mul", v("y"), v("y")), v("y"))),
            op2("add", op2("mul", sx(), sx()), sx()),
        ),
        pair(
            "nested-projections",
            r(2),
            SourceTerm::fst(SourceTerm::snd(SourceTerm::pair(x(), SourceTerm::pair(op("square", x()), SourceTerm::Unit)))),
            op("square", x()),
        ),
        pair(
            "higher-order-beta",
            r(3),
            SourceTerm::app(
                lam("g", scalar(), op2("map", v("g"), x())),
                lam("a", r(1), op("sigmoid", op2("mul", v("a"), v("a")))),
            ),
            op2("map", lam("a", r(1), op("sigmoid", op2("mul", v("a"), v("a")))), x()),
        ),
        pair(
            "pair-eta-function",
            SourceType::prod(r(2), r(1)),
            let_in(
                "q",
                SourceType::prod(SourceType::fun(r(1), r(2)), r(1)),
                SourceTerm::pair(lam("z", r(1), op2("scale", v("z"), SourceTerm::fst(x()))), op("square", SourceTerm::snd(x()))),
                SourceTerm::pair(SourceTerm::fst(v("q")), SourceTerm::snd(v("q"))),
            ),
            SourceTerm::pair(lam("z", r(1), op2("scale", v("z"), SourceTerm::fst(x()))), op("square", SourceTerm::snd(x()))),
        ),
        pair(
            "map-beta",
            r(3),
            op2(
                "map",
                SourceTerm::app(
                    lam("g", scalar(), lam("a", r(1), SourceTerm::app(v("g"), SourceTerm::app(v("g"), v("a"))))),
                    lam("b", r(1), op("sigmoid", v("b"))),
                ),
                x(),
            ),
            op2("map", lam("a", r(1), op("sigmoid", op("sigmoid", v("a")))), x()),
        ),
        pair(
            "map-eta-captured",
            split(),
            let_in(
                "c",
                r(1),
                op("square", SourceTerm::snd(x())),
                op2("map", lam("a", r(1), SourceTerm::app(lam("b", r(1), op2("mul", v("b"), v("c"))), v("a"))), SourceTerm::fst(x())),
            ),
            let_in(
                "c",
                r(1),
                op("square", SourceTerm::snd(x())),
                op2("map", lam("b", r(1), op2("mul", v("b"), v("c"))), SourceTerm::fst(x())),
            ),
        ),
    ]
}

/// Everything observable about one transformed program at one input.
fn observe_transform(obs: &Observer, out: &AdOutput, x: &[f64], seed: u64) -> Result<Vec<f64>> {
    let input = Value::from_flat(&out.input_type(), x)
        .ok_or(CheckError::ShapeMismatch { expected: out.source_type.flat_width().unwrap_or(0), found: x.len() })?;
    let env = Env::new().bind(&out.input, input);
    let primal = obs.interp().eval(&env, &out.primal)?;
    let deriv = obs.interp().eval(&env, &out.deriv)?;
    let mut o = obs.observation(&primal, &out.primal_type(), seed)?;
    o.extend(obs.observation(&deriv, &out.deriv_type(), seed ^ 0xd)?);
    Ok(o)
}

/// The largest relative discrepancy between the two sides of `pair`, over
/// both modes at `points` random inputs.
pub fn discrepancy(pair: &EquationPair, points: usize, seed: u64) -> Result<f64> {
    let obs = Observer::default();
    let width = pair.lhs.arg_type.flat_width().ok_or_else(|| CheckError::NonFirstOrderType(pair.lhs.arg_type.clone()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for mode in [Mode::Forward, Mode::Reverse] {
        let l = differentiate(&pair.lhs, mode)?;
        let r = differentiate(&pair.rhs, mode)?;
        for _ in 0..points {
            let x: Vec<f64> = (0..width).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let s = rng.gen();
            let (a, b) = (observe_transform(&obs, &l, &x, s)?, observe_transform(&obs, &r, &x, s)?);
            if a.len() != b.len() {
                return Err(RuntimeError::Stuck(format!("{}: observations of different shape", pair.name)).into());
            }
            worst = worst.max(max_rel_err(&a, &b));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_sides_have_the_same_type() {
        for p in catalogue() {
            let (l, r) = (p.lhs.result_type(), p.rhs.result_type());
            assert!(l.is_ok(), "{}: {l:?}", p.name);
            assert_eq!(l, r, "{}", p.name);
        }
    }

    #[test]
    fn catalogue_covers_higher_order_results() {
        let cat = catalogue();
        assert_eq!(cat.len(), 12);
        assert!(cat.iter().any(|p| !p.lhs.result_type().unwrap().is_first_order()));
    }

    #[test]
    fn catalogue_pairs_agree() {
        for p in catalogue() {
            let d = discrepancy(&p, 3, 11).unwrap();
            assert!(d <= BETA_ETA_TOL, "{}: {d:e}", p.name);
        }
    }

    #[test]
    fn unequal_programs_are_told_apart() {
        let ne = pair("wrong", r(2), op("square", v("x")), op("sigmoid", v("x")));
        assert!(discrepancy(&ne, 2, 0).unwrap() > 1e-3);
        let f1 = lam("z", r(1), op2("scale", v("z"), v("x")));
        let f2 = lam("z", r(1), op2("scale", v("z"), op("square", v("x"))));
        assert!(discrepancy(&pair("wrong-fun", r(2), f1, f2), 2, 0).unwrap() > 1e-3);
    }
}
