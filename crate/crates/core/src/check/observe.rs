//! Observing values of arbitrary type as real vectors.
//!
//! First-order values are flattened. Functions and linear functions are
//! observed by applying them to sampled arguments. `Map` values are
//! observed through a fixed linear family `k ↦ (v ↦ φ(k)·v)` summed over the
//! entries, which is the only way the quotient structure allows them to be
//! inspected.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::name::Name;
use crate::primitives::Registry;
use crate::runtime::value::{Env, Value};
use crate::runtime::{Interp, RuntimeError};
use crate::term::build::*;
use crate::term::TargetTerm;
use crate::types::TargetType;

/// Number of sample arguments per function observation.
const SAMPLES: usize = 2;
/// Seed of the generator used to observe `Map` keys and values, so that
/// observation does not depend on how many entries a map has.
const MAP_SEED: u64 = 0x006d_6170_5f6f_6273;

pub struct Observer<'r> {
    interp: Interp<'r>,
}

impl Default for Observer<'static> {
    fn default() -> Self {
        Observer { interp: Interp::new(Registry::builtin()) }
    }
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(-2.0..2.0)
}

/// A term of type `ty` depending linearly on the first real leaf reachable
/// from `z : dom` (or constant when there is none).
fn sample_body(dom: &TargetType, z: &TargetTerm, ty: &TargetType, rng: &mut ChaCha8Rng) -> TargetTerm {
    fn first_leaf(t: &TargetType, at: TargetTerm) -> Option<(TargetTerm, usize)> {
        match t {
            TargetType::Real(n) => Some((at, *n)),
            TargetType::Prod(a, b) => first_leaf(a, fst(at.clone())).or_else(|| first_leaf(b, snd(at))),
            _ => None,
        }
    }
    match ty {
        TargetType::Real(n) => {
            let c: Vec<f64> = (0..*n).map(|_| uniform(rng)).collect();
            match first_leaf(dom, z.clone()) {
                Some((leaf, k)) => {
                    let a: Vec<f64> = (0..n * k).map(|_| uniform(rng)).collect();
                    op("add", pair(constant(&c), op("matvec", pair(constant(&a), leaf))))
                }
                None => constant(&c),
            }
        }
        TargetType::Unit => unit(),
        TargetType::Prod(a, b) => pair(sample_body(dom, z, a, rng), sample_body(dom, z, b, rng)),
        TargetType::Fun(a, b) => {
            let w = Name::new("w_sample");
            lam(&w, (**a).clone(), sample_body(dom, z, b, rng))
        }
        TargetType::LinFun(..) | TargetType::Map(..) => zero(ty.clone()),
    }
}

impl<'r> Observer<'r> {
    pub fn new(reg: &'r Registry) -> Self {
        Observer { interp: Interp::new(reg) }
    }

    pub fn interp(&self) -> &Interp<'r> {
        &self.interp
    }

    /// A random value of type `ty`.
    pub fn sample(&self, ty: &TargetType, rng: &mut ChaCha8Rng) -> Result<Value, RuntimeError> {
        Ok(match ty {
            TargetType::Real(n) => Value::real((0..*n).map(|_| uniform(rng)).collect::<Vec<_>>()),
            TargetType::Unit => Value::Unit,
            TargetType::Prod(a, b) => {
                let a = self.sample(a, rng)?;
                Value::pair(a, self.sample(b, rng)?)
            }
            TargetType::Fun(a, b) => {
                let z = Name::new("z_sample");
                let f = lam(&z, (**a).clone(), sample_body(a, &var(&z), b, rng));
                self.interp.eval(&Env::new(), &f)?
            }
            TargetType::LinFun(a, b) => match (&**a, &**b) {
                (TargetType::Real(n), TargetType::Real(k)) if n == k => {
                    let c: Vec<f64> = (0..*n).map(|_| uniform(rng)).collect();
                    self.interp.eval(&Env::new(), &lop("emul", constant(&c)))?
                }
                _ => self.interp.eval(&Env::new(), &zero(ty.clone()))?,
            },
            TargetType::Map(k, v) => {
                let mut entries = Vec::with_capacity(SAMPLES);
                for _ in 0..SAMPLES {
                    let key = self.sample(k, rng)?;
                    entries.push((key, self.sample(v, rng)?));
                }
                Value::map(entries)
            }
        })
    }

    /// Appends the observation of `v : ty` to `out`.
    pub fn observe(&self, v: &Value, ty: &TargetType, rng: &mut ChaCha8Rng, out: &mut Vec<f64>) -> Result<(), RuntimeError> {
        match ty {
            TargetType::Real(_) | TargetType::Unit => {
                out.extend(v.to_flat().ok_or_else(|| RuntimeError::Stuck(format!("expected {ty}, found {v:?}")))?)
            }
            TargetType::Prod(a, b) => {
                let (l, r) = v.as_pair().ok_or_else(|| RuntimeError::Stuck(format!("expected a pair, found {v:?}")))?;
                self.observe(l, a, rng, out)?;
                self.observe(r, b, rng, out)?;
            }
            TargetType::Fun(a, b) => {
                for _ in 0..SAMPLES {
                    let x = self.sample(a, rng)?;
                    self.observe(&self.interp.apply(v, &x)?, b, rng, out)?;
                }
            }
            TargetType::LinFun(a, b) => {
                for _ in 0..SAMPLES {
                    let x = self.sample(a, rng)?;
                    self.observe(&self.interp.apply_lin(v, &x)?, b, rng, out)?;
                }
            }
            TargetType::Map(k, val) => {
                let Value::Map(entries) = v else { return Err(RuntimeError::Stuck(format!("expected a map, found {v:?}"))) };
                let mut acc: Option<Vec<f64>> = None;
                for (key, value) in entries.iter() {
                    let mut krng = ChaCha8Rng::seed_from_u64(MAP_SEED);
                    let mut kobs = Vec::new();
                    self.observe(key, k, &mut krng, &mut kobs)?;
                    let phi = kobs.iter().enumerate().map(|(i, x)| (x + 0.37 * i as f64).sin()).sum::<f64>() + 1.0;
                    let mut vrng = ChaCha8Rng::seed_from_u64(MAP_SEED ^ 1);
                    let mut vobs = Vec::new();
                    self.observe(value, val, &mut vrng, &mut vobs)?;
                    match &mut acc {
                        None => acc = Some(vobs.iter().map(|x| phi * x).collect()),
                        Some(a) => a.iter_mut().zip(&vobs).for_each(|(s, x)| *s += phi * x),
                    }
                }
                match acc {
                    Some(a) => out.extend(a),
                    None => {
                        // The empty map observes as the zero of the value observation.
                        let z = self.interp.eval(&Env::new(), &zero((**val).clone()))?;
                        let mut vrng = ChaCha8Rng::seed_from_u64(MAP_SEED ^ 1);
                        let mut vobs = Vec::new();
                        self.observe(&z, val, &mut vrng, &mut vobs)?;
                        out.extend(vobs.iter().map(|x| 0.0 * x));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn observation(&self, v: &Value, ty: &TargetType, seed: u64) -> Result<Vec<f64>, RuntimeError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        self.observe(v, ty, &mut rng, &mut out)?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: usize) -> TargetType {
        TargetType::real(n)
    }

    #[test]
    fn map_observation_ignores_order_and_grouping() {
        let obs = Observer::default();
        let k1 = Value::real(vec![0.5]);
        let k2 = Value::real(vec![-1.0]);
        let ty = TargetType::map(r(1), r(2));
        let v = |a: f64, b: f64| Value::real(vec![a, b]);
        let m1 = Value::map(vec![(k1.clone(), v(1.0, 2.0)), (k2.clone(), v(3.0, 4.0)), (k1.clone(), v(0.5, 0.25))]);
        let m2 = Value::map(vec![(k2, v(3.0, 4.0)), (k1, v(1.5, 2.25))]);
        let a = obs.observation(&m1, &ty, 1).unwrap();
        let b = obs.observation(&m2, &ty, 1).unwrap();
        assert_eq!(a.len(), 2);
        assert!(super::super::max_rel_err(&a, &b) < 1e-14);
        let empty = obs.observation(&Value::map(vec![]), &ty, 1).unwrap();
        assert_eq!(empty, vec![0.0, 0.0]);
    }

    #[test]
    fn function_observations_are_reproducible() {
        let obs = Observer::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ty = TargetType::fun(r(2), TargetType::prod(r(1), r(3)));
        let f = obs.sample(&ty, &mut rng).unwrap();
        let a = obs.observation(&f, &ty, 9).unwrap();
        let b = obs.observation(&f, &ty, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), SAMPLES * 4);
    }
}
