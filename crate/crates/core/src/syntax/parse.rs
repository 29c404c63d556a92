//! Parsing types, terms and program files.
//!
//! Binders that would shadow a name already in use are renamed apart, so
//! parsed terms never shadow. The type of a `let`-bound variable is
//! inferred from its definition unless written as `(let (x t e1) e2)`.

use std::collections::HashSet;
use std::sync::Arc;

use crate::name::{Name, NameSupply};
use crate::primitives::Registry;
use crate::program::{Program, TargetProgram};
use crate::term::{PrimOp, TargetTerm};
use crate::typecheck::{Checker, Context};
use crate::types::TargetType;

use super::sexpr::{read_all, Sexp, SexpKind};
use super::{ParseError, Spans, SyntaxError};

/// Words with a fixed meaning that cannot name variables.
const KEYWORDS: &[&str] = &[
    "unit", "lam", "app", "let", "pair", "fst", "snd", "op", "const", "zero", "plus", "lop", "lid", "lcomp", "lapp",
    "lswap", "leval", "lsing", "lcurryinv", "lfst", "lsnd", "lpair", "program", "arg-type", "body",
];

fn arity(s: &Sexp, args: &[Sexp], n: usize, head: &str) -> Result<(), SyntaxError> {
    if args.len() == n {
        Ok(())
    } else {
        Err(s.error(format!("`{head}` takes {n} argument(s), found {}", args.len())))
    }
}

pub fn parse_type(s: &Sexp) -> Result<TargetType, SyntaxError> {
    if s.atom() == Some("unit") {
        return Ok(TargetType::Unit);
    }
    let Some((head, args)) = s.form() else { return Err(s.error(format!("expected a type, found `{s}`"))) };
    let two = |k: fn(TargetType, TargetType) -> TargetType| -> Result<TargetType, SyntaxError> {
        arity(s, args, 2, head)?;
        Ok(k(parse_type(&args[0])?, parse_type(&args[1])?))
    };
    match head {
        "real" => {
            arity(s, args, 1, head)?;
            match args[0].atom().and_then(|a| a.parse::<usize>().ok()) {
                Some(n) if n >= 1 => Ok(TargetType::Real(n)),
                _ => Err(args[0].error("array width must be a positive integer")),
            }
        }
        "prod" => two(TargetType::prod),
        "fun" => two(TargetType::fun),
        "linfun" => two(TargetType::linfun),
        "map" => two(TargetType::map),
        _ => Err(s.error(format!("unknown type constructor `{head}`"))),
    }
}

fn symbol<'s>(s: &'s Sexp, what: &str) -> Result<&'s str, SyntaxError> {
    match s.atom() {
        Some(a) if is_symbol(a) => Ok(a),
        _ => Err(s.error(format!("expected {what}, found `{s}`"))),
    }
}

fn is_symbol(a: &str) -> bool {
    !a.is_empty() && a.parse::<f64>().is_err() && !KEYWORDS.contains(&a)
}

fn number(s: &Sexp) -> Result<f64, SyntaxError> {
    s.atom().and_then(|a| a.parse::<f64>().ok()).ok_or_else(|| s.error(format!("expected a number, found `{s}`")))
}

fn atoms<'a>(s: &'a Sexp, out: &mut Vec<&'a str>) {
    match &s.kind {
        SexpKind::Atom(a) => out.push(a),
        SexpKind::List(l) => l.iter().for_each(|c| atoms(c, out)),
    }
}

struct Converter<'r> {
    checker: Checker<'r>,
    supply: NameSupply,
    used: HashSet<Name>,
    /// Surface name, internal name and type of every enclosing binder.
    scope: Vec<(String, Name, TargetType)>,
    spans: Spans,
}

impl<'r> Converter<'r> {
    fn new(reg: &'r Registry, root: &Sexp, ctx: &Context<TargetType>) -> Self {
        let mut all = Vec::new();
        atoms(root, &mut all);
        let names: Vec<Name> = all.iter().map(|a| Name::new(a)).chain(ctx.keys().cloned()).collect();
        Converter {
            checker: Checker::new(reg),
            supply: NameSupply::avoiding(&names),
            used: ctx.keys().cloned().collect(),
            scope: ctx.iter().map(|(x, t)| (x.as_str().to_string(), x.clone(), t.clone())).collect(),
            spans: Spans::default(),
        }
    }

    fn context(&self) -> Context<TargetType> {
        self.scope.iter().map(|(_, x, t)| (x.clone(), t.clone())).collect()
    }

    fn bind<T>(
        &mut self,
        surface: &str,
        ty: TargetType,
        f: impl FnOnce(&mut Self, Name) -> Result<T, ParseError>,
    ) -> Result<T, ParseError> {
        let x = if self.used.contains(&Name::new(surface)) { self.supply.fresh(surface) } else { Name::new(surface) };
        self.used.insert(x.clone());
        self.scope.push((surface.to_string(), x.clone(), ty));
        let out = f(self, x);
        self.scope.pop();
        out
    }

    fn child(&mut self, s: &Sexp, path: &mut Vec<u8>, i: u8) -> Result<Arc<TargetTerm>, ParseError> {
        path.push(i);
        let t = self.term(s, path);
        path.pop();
        t.map(Arc::new)
    }

    fn term(&mut self, s: &Sexp, path: &mut Vec<u8>) -> Result<TargetTerm, ParseError> {
        use TargetTerm as T;
        self.spans.insert(path, s.line, s.col);
        if let Some(a) = s.atom() {
            if a == "unit" {
                return Ok(T::Unit);
            }
            let a = symbol(s, "a term")?;
            let x = self.scope.iter().rev().find(|(n, ..)| n == a).map(|(_, x, _)| x.clone()).unwrap_or_else(|| Name::new(a));
            return Ok(T::Var(x));
        }
        let Some((head, args)) = s.form() else { return Err(s.error(format!("expected a term, found `{s}`")).into()) };
        let n = |k: usize| arity(s, args, k, head);
        Ok(match head {
            "lam" => {
                n(2)?;
                let (x, ty) = self.binder(&args[0])?;
                let ty = parse_type(ty)?;
                self.bind(x, ty.clone(), |c, x| Ok(T::Lam(x, ty, c.child(&args[1], path, 0)?)))?
            }
            "let" => {
                n(2)?;
                let b = args[0].list().filter(|b| b.len() == 2 || b.len() == 3).ok_or_else(|| {
                    args[0].error("expected a binding `(x e)` or `(x t e)`")
                })?;
                let x = symbol(&b[0], "a variable")?;
                let bound = self.child(&b[b.len() - 1], path, 1)?;
                let ty = if b.len() == 3 {
                    parse_type(&b[1])?
                } else {
                    let mut at = path.clone();
                    at.push(1);
                    self.checker.target(&self.context(), &bound).map_err(|e| self.spans.locate_error(e.under(&at)))?
                };
                path.push(0);
                self.spans.insert(path, s.line, s.col);
                let lam = self.bind(x, ty.clone(), |c, x| Ok(T::Lam(x, ty, c.child(&args[1], path, 0)?)));
                path.pop();
                T::App(Arc::new(lam?), bound)
            }
            "app" | "pair" | "plus" | "lcomp" | "lapp" | "lpair" => {
                n(2)?;
                let a = self.child(&args[0], path, 0)?;
                let b = self.child(&args[1], path, 1)?;
                match head {
                    "app" => T::App(a, b),
                    "pair" => T::Pair(a, b),
                    "plus" => T::Plus(a, b),
                    "lcomp" => T::LComp(a, b),
                    "lapp" => T::LApp(a, b),
                    _ => T::LPair(a, b),
                }
            }
            "fst" | "snd" | "lswap" => {
                n(1)?;
                let a = self.child(&args[0], path, 0)?;
                match head {
                    "fst" => T::Fst(a),
                    "snd" => T::Snd(a),
                    _ => T::LSwap(a),
                }
            }
            "op" if args.len() == 2 && args[0].form().is_some_and(|(h, _)| h == "const") => {
                let (_, cs) = args[0].form().unwrap_or_default();
                let c = cs.iter().map(number).collect::<Result<Vec<_>, _>>()?;
                T::Op(PrimOp::constant(&c), self.child(&args[1], path, 0)?)
            }
            "op" | "lop" => {
                n(2)?;
                let name = symbol(&args[0], "an operation name")?;
                let a = self.child(&args[1], path, 0)?;
                if head == "op" {
                    T::Op(PrimOp::named(name), a)
                } else {
                    T::LOp(Name::new(name), a)
                }
            }
            "const" => {
                if args.is_empty() {
                    return Err(s.error("a constant needs at least one component").into());
                }
                let c = args.iter().map(number).collect::<Result<Vec<_>, _>>()?;
                path.push(0);
                self.spans.insert(path, s.line, s.col);
                path.pop();
                T::Op(PrimOp::constant(&c), Arc::new(T::Unit))
            }
            "zero" | "lid" => {
                n(1)?;
                let t = parse_type(&args[0])?;
                if head == "zero" {
                    T::Zero(t)
                } else {
                    T::LId(t)
                }
            }
            "lfst" | "lsnd" => {
                n(2)?;
                let (a, b) = (parse_type(&args[0])?, parse_type(&args[1])?);
                if head == "lfst" {
                    T::LFst(a, b)
                } else {
                    T::LSnd(a, b)
                }
            }
            "leval" | "lsing" | "lcurryinv" => {
                n(2)?;
                let a = self.child(&args[0], path, 0)?;
                let t = parse_type(&args[1])?;
                match head {
                    "leval" => T::LEval(a, t),
                    "lsing" => T::LSing(a, t),
                    _ => T::LCurryInv(a, t),
                }
            }
            _ => return Err(s.error(format!("unknown form `{head}`")).into()),
        })
    }

    fn binder<'s>(&self, s: &'s Sexp) -> Result<(&'s str, &'s Sexp), SyntaxError> {
        match s.list() {
            Some([x, t]) => Ok((symbol(x, "a variable")?, t)),
            _ => Err(s.error("expected a binder `(x t)`")),
        }
    }
}

/// Parses one term whose free variables are typed by `ctx`.
pub fn parse_term(text: &str, ctx: &Context<TargetType>) -> Result<(TargetTerm, Spans), ParseError> {
    let sexps = read_all(text)?;
    let [s] = sexps.as_slice() else {
        return Err(SyntaxError { message: format!("expected one term, found {}", sexps.len()), line: 1, col: 1 }.into());
    };
    let mut c = Converter::new(Registry::builtin(), s, ctx);
    let t = c.term(s, &mut Vec::new())?;
    Ok((t, c.spans))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedProgram {
    pub program: TargetProgram,
    pub spans: Spans,
    pub line: usize,
    pub col: usize,
}

impl ParsedProgram {
    /// Typechecks the body, reporting errors at their source position.
    pub fn check(&self) -> Result<TargetType, ParseError> {
        self.program.body_type().map_err(|e| self.spans.locate_error(e))
    }

    /// The program as a source-language program, if it is one.
    pub fn source(&self) -> Result<Program, ParseError> {
        self.program.to_source().ok_or_else(|| {
            SyntaxError { message: "not a source-language program".into(), line: self.line, col: self.col }.into()
        })
    }
}

fn parse_program(s: &Sexp) -> Result<ParsedProgram, ParseError> {
    let Some(("program", rest)) = s.form() else { return Err(s.error("expected `(program ...)`").into()) };
    let (name, rest) = match rest.split_first() {
        Some((n, rest)) if n.atom().is_some() => (Some(symbol(n, "a program name")?.to_string()), rest),
        _ => (None, rest),
    };
    let [ty, body] = rest else { return Err(s.error("expected `(arg-type t)` and `(body e)`").into()) };
    let ty = match ty.form() {
        Some(("arg-type", [t])) => parse_type(t)?,
        _ => return Err(ty.error("expected `(arg-type t)`").into()),
    };
    let body = match body.form() {
        Some(("body", [e])) => e,
        _ => return Err(body.error("expected `(body e)`").into()),
    };
    let arg = Name::new(crate::ad::INPUT);
    let ctx: Context<TargetType> = [(arg.clone(), ty.clone())].into_iter().collect();
    let mut c = Converter::new(Registry::builtin(), body, &ctx);
    let body = c.term(body, &mut Vec::new())?;
    Ok(ParsedProgram { program: TargetProgram { name, arg, arg_type: ty, body }, spans: c.spans, line: s.line, col: s.col })
}

/// Parses a program file holding one or more `(program ...)` forms.
pub fn parse_programs(text: &str) -> Result<Vec<ParsedProgram>, ParseError> {
    let sexps = read_all(text)?;
    if sexps.is_empty() {
        return Err(SyntaxError { message: "no program found".into(), line: 1, col: 1 }.into());
    }
    sexps.iter().map(parse_program).collect()
}

/// Parses a file holding exactly one source-language program.
pub fn parse_source_program(text: &str) -> Result<Program, ParseError> {
    let ps = parse_programs(text)?;
    if ps.len() != 1 {
        return Err(SyntaxError { message: format!("expected one program, found {}", ps.len()), line: 1, col: 1 }.into());
    }
    ps[0].source()
}
