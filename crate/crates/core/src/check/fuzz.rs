//! Type-directed generation of well-typed programs.
//!
//! Generated programs have first-order input and output types but may use
//! λ-abstractions, applications, shared (let-bound) functions, curried
//! functions and `map` internally. A budget on multiplicative operations
//! bounds the polynomial degree of generated programs so that their
//! derivatives stay within reach of finite differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::name::{Name, NameSupply};
use crate::program::Program;
use crate::term::SourceTerm;
use crate::types::SourceType;

use super::{CheckError, Result};

#[derive(Clone, Debug)]
pub struct FuzzConfig {
    pub max_depth: usize,
    /// Maximum width of real arrays in program and binder types.
    pub max_width: usize,
    /// Programs larger than this many nodes are discarded.
    pub max_size: usize,
    /// Multiplicative operations allowed per program.
    pub mul_budget: usize,
    pub max_attempts: usize,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig { max_depth: 6, max_width: 4, max_size: 200, mul_budget: 3, max_attempts: 50 }
    }
}

impl FuzzConfig {
    pub fn with_depth(max_depth: usize) -> Self {
        FuzzConfig { max_depth, ..Self::default() }
    }
}

/// A closed term `λarg:src. body` of type `src → dst`.
pub fn gen_random_program(seed: u64, max_depth: usize, src: &SourceType, dst: &SourceType) -> Result<SourceTerm> {
    gen_program_with(&FuzzConfig::with_depth(max_depth), seed, src, dst).map(|p| p.closed())
}

pub fn gen_program_with(cfg: &FuzzConfig, seed: u64, src: &SourceType, dst: &SourceType) -> Result<Program> {
    let arg = Name::new("arg");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cfg.max_attempts {
        let mut g = Gen {
            rng: &mut rng,
            supply: NameSupply::avoiding([&arg]),
            env: vec![(arg.clone(), src.clone())],
            budget: cfg.mul_budget,
            width: cfg.max_width,
        };
        let body = g.gen(dst, cfg.max_depth);
        if body.size() <= cfg.max_size {
            let p = Program::new(&arg, src.clone(), body);
            debug_assert_eq!(p.result_type().as_ref(), Ok(dst));
            return Ok(p);
        }
    }
    Err(CheckError::GenerationExhausted { seed, attempts: cfg.max_attempts })
}

/// Random first-order input and output types for a corpus entry.
pub fn random_signature(rng: &mut ChaCha8Rng, max_width: usize) -> (SourceType, SourceType) {
    let ty = |rng: &mut ChaCha8Rng| match rng.gen_range(0..10) {
        0..=5 => SourceType::Real(rng.gen_range(1..=max_width)),
        6..=8 => SourceType::prod(SourceType::Real(rng.gen_range(1..=max_width)), SourceType::Real(rng.gen_range(1..=max_width))),
        _ => SourceType::prod(SourceType::Real(rng.gen_range(1..=max_width)), SourceType::Unit),
    };
    let src = ty(rng);
    (src, ty(rng))
}

/// The corpus program for `seed`: random signature, then a random body.
pub fn corpus_program(cfg: &FuzzConfig, seed: u64) -> Result<Program> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_7e55);
    let (src, dst) = random_signature(&mut rng, cfg.max_width);
    gen_program_with(cfg, seed, &src, &dst)
}

struct Gen<'a> {
    rng: &'a mut ChaCha8Rng,
    supply: NameSupply,
    env: Vec<(Name, SourceType)>,
    budget: usize,
    width: usize,
}

fn r(n: usize) -> SourceType {
    SourceType::Real(n)
}

fn scalar_fun() -> SourceType {
    SourceType::fun(r(1), r(1))
}

impl Gen<'_> {
    fn small_type(&mut self) -> SourceType {
        match self.rng.gen_range(0..6) {
            0..=3 => r(self.rng.gen_range(1..=self.width)),
            4 => SourceType::prod(r(self.rng.gen_range(1..=self.width)), r(self.rng.gen_range(1..=self.width))),
            _ => SourceType::Unit,
        }
    }

    fn constant(&mut self, n: usize) -> SourceTerm {
        let c: Vec<f64> = (0..n).map(|_| (self.rng.gen_range(-1.5f64..1.5) * 100.0).round() / 100.0).collect();
        SourceTerm::constant(&c)
    }

    /// Variables and projection paths out of variables that have type `ty`,
    /// newest bindings first.
    fn paths_to(&self, ty: &SourceType) -> Vec<SourceTerm> {
        fn go(t: &SourceType, at: SourceTerm, ty: &SourceType, out: &mut Vec<SourceTerm>) {
            if t == ty {
                out.push(at.clone());
            }
            if let SourceType::Prod(a, b) = t {
                go(a, SourceTerm::fst(at.clone()), ty, out);
                go(b, SourceTerm::snd(at), ty, out);
            }
        }
        let mut out = Vec::new();
        for (x, t) in self.env.iter().rev() {
            go(t, SourceTerm::var(x), ty, &mut out);
        }
        out
    }

    fn pick_path(&mut self, ty: &SourceType) -> Option<SourceTerm> {
        let paths = self.paths_to(ty);
        if paths.is_empty() {
            return None;
        }
        // Favour recent bindings so that let-bound values get shared.
        let i = if self.rng.gen_bool(0.6) { self.rng.gen_range(0..paths.len().min(2)) } else { self.rng.gen_range(0..paths.len()) };
        Some(paths[i].clone())
    }

    /// Functions in scope returning `ty`.
    fn functions_to(&self, ty: &SourceType) -> Vec<(Name, SourceType)> {
        self.env
            .iter()
            .filter_map(|(x, t)| match t {
                SourceType::Fun(a, b) if **b == *ty => Some((x.clone(), (**a).clone())),
                _ => None,
            })
            .collect()
    }

    fn leaf(&mut self, ty: &SourceType) -> SourceTerm {
        if self.rng.gen_bool(0.8) {
            if let Some(p) = self.pick_path(ty) {
                return p;
            }
        }
        match ty {
            SourceType::Real(n) => self.constant(*n),
            SourceType::Unit => SourceTerm::Unit,
            SourceType::Prod(a, b) => SourceTerm::pair(self.leaf(a), self.leaf(b)),
            SourceType::Fun(a, b) => {
                let z = self.supply.fresh("z");
                let body = self.with_binding(&z, a, |g| g.leaf(b));
                SourceTerm::lam(&z, (**a).clone(), body)
            }
        }
    }

    fn with_binding<T>(&mut self, x: &Name, ty: &SourceType, f: impl FnOnce(&mut Self) -> T) -> T {
        self.env.push((x.clone(), ty.clone()));
        let out = f(self);
        self.env.pop();
        out
    }

    fn gen(&mut self, ty: &SourceType, depth: usize) -> SourceTerm {
        if depth == 0 {
            return self.leaf(ty);
        }
        let d = depth - 1;
        let roll = self.rng.gen_range(0..100);
        match roll {
            0..=34 => self.structural(ty, d),
            35..=59 => self.operation(ty, d),
            60..=79 => self.abstraction(ty, d),
            80..=89 => self.mapping(ty, d),
            _ => self.sharing(ty, d),
        }
    }

    fn structural(&mut self, ty: &SourceType, d: usize) -> SourceTerm {
        match ty {
            SourceType::Prod(a, b) => SourceTerm::pair(self.gen(a, d), self.gen(b, d)),
            SourceType::Unit => SourceTerm::Unit,
            _ => {
                if self.rng.gen_bool(0.5) {
                    if let Some(p) = self.pick_path(ty) {
                        return p;
                    }
                }
                let other = self.small_type();
                if self.rng.gen_bool(0.5) {
                    SourceTerm::fst(self.gen(&SourceType::prod(ty.clone(), other), d))
                } else {
                    SourceTerm::snd(self.gen(&SourceType::prod(other, ty.clone()), d))
                }
            }
        }
    }

    fn spend(&mut self) -> bool {
        if self.budget > 0 {
            self.budget -= 1;
            true
        } else {
            false
        }
    }

    fn operation(&mut self, ty: &SourceType, d: usize) -> SourceTerm {
        let SourceType::Real(n) = *ty else { return self.structural(ty, d) };
        let op = |name: &str, a: SourceTerm| SourceTerm::op(name, a);
        loop {
            match self.rng.gen_range(0..11) {
                0 => return op("add", SourceTerm::pair(self.gen(ty, d), self.gen(ty, d))),
                1 if self.spend() => return op("mul", SourceTerm::pair(self.gen(ty, d), self.gen(ty, d))),
                2 if self.spend() => return op("square", self.gen(ty, d)),
                3 => return op("sigmoid", self.gen(ty, d)),
                4 if n == 1 => {
                    let k = self.rng.gen_range(1..=self.width);
                    return op("sum", self.gen(&r(k), d));
                }
                5 if n == 1 && self.spend() => {
                    let k = self.rng.gen_range(1..=self.width);
                    return op("inner", SourceTerm::pair(self.gen(&r(k), d), self.gen(&r(k), d)));
                }
                6 if n == 1 && self.spend() => return op("prod2", self.gen(&r(2), d)),
                7 if self.spend() => return op("scale", SourceTerm::pair(self.gen(&r(1), d), self.gen(ty, d))),
                8 if n == 2 => return op("swap", self.gen(ty, d)),
                9 if self.spend() => {
                    let m = self.rng.gen_range(1..=self.width);
                    // Constant matrices keep the degree unchanged in the vector.
                    let a = if self.rng.gen_bool(0.5) { self.constant(n * m) } else { self.gen(&r(n * m), d) };
                    return op("matvec", SourceTerm::pair(a, self.gen(&r(m), d)));
                }
                10 => return op("add", SourceTerm::pair(self.constant(n), self.gen(ty, d))),
                _ => {}
            }
        }
    }

    fn abstraction(&mut self, ty: &SourceType, d: usize) -> SourceTerm {
        let fns = self.functions_to(ty);
        if !fns.is_empty() && self.rng.gen_bool(0.3) {
            let (f, a) = fns[self.rng.gen_range(0..fns.len())].clone();
            return SourceTerm::app(SourceTerm::var(&f), self.gen(&a, d));
        }
        match self.rng.gen_range(0..3) {
            0 => {
                // β-redex
                let s = self.small_type();
                let y = self.supply.fresh("y");
                let body = self.with_binding(&y, &s, |g| g.gen(ty, d));
                let arg = self.gen(&s, d);
                SourceTerm::app(SourceTerm::lam(&y, s, body), arg)
            }
            1 => {
                // a let-bound function applied twice
                let a = if self.rng.gen_bool(0.5) { r(1) } else { self.small_type() };
                let fty = SourceType::fun(a.clone(), ty.clone());
                let (f, z) = (self.supply.fresh("f"), self.supply.fresh("z"));
                let fbody = self.with_binding(&z, &a, |g| g.gen(ty, d.saturating_sub(1)));
                let body = self.with_binding(&f, &fty, |g| {
                    let first = SourceTerm::app(SourceTerm::var(&f), g.gen(&a, d.saturating_sub(1)));
                    match ty {
                        SourceType::Real(_) => {
                            let second = SourceTerm::app(SourceTerm::var(&f), g.gen(&a, d.saturating_sub(1)));
                            SourceTerm::op("add", SourceTerm::pair(first, second))
                        }
                        _ => first,
                    }
                });
                SourceTerm::let_in(&f, fty, SourceTerm::lam(&z, a, fbody), body)
            }
            _ => {
                // a curried two-argument function
                let (a, b) = (self.small_type(), self.small_type());
                let (g, z1, z2) = (self.supply.fresh("g"), self.supply.fresh("z"), self.supply.fresh("z"));
                let inner = self.with_binding(&z1, &a, |s| s.with_binding(&z2, &b, |s| s.gen(ty, d.saturating_sub(1))));
                let fun = SourceTerm::lam(&z1, a.clone(), SourceTerm::lam(&z2, b.clone(), inner));
                let gty = SourceType::fun(a.clone(), SourceType::fun(b.clone(), ty.clone()));
                let e1 = self.gen(&a, d.saturating_sub(1));
                let e2 = self.gen(&b, d.saturating_sub(1));
                SourceTerm::let_in(&g, gty, fun, SourceTerm::app(SourceTerm::app(SourceTerm::var(&g), e1), e2))
            }
        }
    }

    fn mapping(&mut self, ty: &SourceType, d: usize) -> SourceTerm {
        let SourceType::Real(n) = *ty else { return self.structural(ty, d) };
        let scalar_fns = self.paths_to(&scalar_fun());
        let f = if !scalar_fns.is_empty() && self.rng.gen_bool(0.4) {
            scalar_fns[0].clone()
        } else {
            let a = self.supply.fresh("a");
            let body = self.with_binding(&a, &r(1), |g| g.gen(&r(1), d.saturating_sub(1)));
            SourceTerm::lam(&a, r(1), body)
        };
        SourceTerm::op("map", SourceTerm::pair(f, self.gen(&r(n), d)))
    }

    fn sharing(&mut self, ty: &SourceType, d: usize) -> SourceTerm {
        let s = if self.rng.gen_bool(0.15) { scalar_fun() } else { self.small_type() };
        let y = self.supply.fresh("y");
        let bound = self.gen(&s, d);
        let body = self.with_binding(&y, &s, |g| g.gen(ty, d));
        SourceTerm::let_in(&y, s, bound, body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_zero_is_a_leaf() {
        let t = gen_random_program(1, 0, &r(2), &r(2)).unwrap();
        let SourceTerm::Lam(_, _, body) = &t else { panic!() };
        assert!(matches!(**body, SourceTerm::Var(_) | SourceTerm::Op(..)), "{body:?}");
        assert!(body.size() <= 2);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = gen_random_program(42, 5, &SourceType::prod(r(2), r(3)), &r(1)).unwrap();
        let b = gen_random_program(42, 5, &SourceType::prod(r(2), r(3)), &r(1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn generated_programs_typecheck_at_the_requested_type() {
        let cfg = FuzzConfig::default();
        for seed in 0..200 {
            let p = corpus_program(&cfg, seed).unwrap();
            let (src, dst) = random_signature(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_7e55), cfg.max_width);
            assert_eq!(p.arg_type, src);
            assert_eq!(p.result_type(), Ok(dst), "seed {seed}");
        }
    }

    #[test]
    fn corpus_exercises_higher_order_constructs() {
        let cfg = FuzzConfig::default();
        let (mut lams, mut maps) = (0, 0);
        for seed in 0..100 {
            let p = corpus_program(&cfg, seed).unwrap();
            let t = p.body.to_target();
            t.visit(&mut |n| match n {
                crate::term::TargetTerm::Lam(..) => lams += 1,
                crate::term::TargetTerm::Op(op, _) if op.name.as_str() == "map" => maps += 1,
                _ => {}
            });
        }
        assert!(lams > 50 && maps > 10, "lams {lams}, maps {maps}");
    }
}
