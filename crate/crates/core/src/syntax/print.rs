//! Pretty-printing in the concrete syntax.
//!
//! A form is printed on one line when it fits in [`WIDTH`] columns;
//! otherwise its first argument stays beside the head and the remaining
//! arguments go on separate lines, indented by two. `(app (lam (x t) b) e)`
//! prints as `(let (x e) b)`.

use crate::program::TargetProgram;
use crate::term::TargetTerm;
use crate::types::TargetType;

pub const WIDTH: usize = 80;

enum Doc {
    Atom(String),
    /// The head stays on the first line together with the first `keep`
    /// arguments.
    List { items: Vec<Doc>, keep: usize },
}

fn atom(s: impl Into<String>) -> Doc {
    Doc::Atom(s.into())
}

fn list(items: Vec<Doc>) -> Doc {
    Doc::List { items, keep: 1 }
}

/// Shortest decimal that reads back as the same `f64`, always with a `.`
/// or exponent.
pub fn format_number(x: f64) -> String {
    format!("{x:?}")
}

fn ty(t: &TargetType) -> Doc {
    atom(t.to_string())
}

fn doc(t: &TargetTerm) -> Doc {
    use TargetTerm as T;
    let tagged = |h: &str, rest: Vec<Doc>| list(std::iter::once(atom(h)).chain(rest).collect());
    match t {
        T::Var(x) => atom(x.as_str()),
        T::Unit => atom("unit"),
        T::Op(op, a) if op.is_const() => {
            let c = tagged("const", op.params.iter().map(|&c| atom(format_number(c))).collect());
            match &**a {
                T::Unit => c,
                _ => tagged("op", vec![c, doc(a)]),
            }
        }
        T::Op(op, a) => tagged("op", vec![atom(op.name.as_str()), doc(a)]),
        T::Pair(a, b) => tagged("pair", vec![doc(a), doc(b)]),
        T::Fst(a) => tagged("fst", vec![doc(a)]),
        T::Snd(a) => tagged("snd", vec![doc(a)]),
        T::Lam(x, t, b) => list(vec![atom("lam"), list(vec![atom(x.as_str()), ty(t)]), doc(b)]),
        T::App(f, e) => match &**f {
            T::Lam(x, _, b) => list(vec![atom("let"), list(vec![atom(x.as_str()), doc(e)]), doc(b)]),
            _ => tagged("app", vec![doc(f), doc(e)]),
        },
        T::Zero(t) => tagged("zero", vec![ty(t)]),
        T::Plus(a, b) => tagged("plus", vec![doc(a), doc(b)]),
        T::LOp(n, a) => tagged("lop", vec![atom(n.as_str()), doc(a)]),
        T::LId(t) => tagged("lid", vec![ty(t)]),
        T::LComp(f, g) => tagged("lcomp", vec![doc(f), doc(g)]),
        T::LApp(f, a) => tagged("lapp", vec![doc(f), doc(a)]),
        T::LSwap(a) => tagged("lswap", vec![doc(a)]),
        T::LEval(a, t) => tagged("leval", vec![doc(a), ty(t)]),
        T::LSing(a, t) => tagged("lsing", vec![doc(a), ty(t)]),
        T::LCurryInv(a, t) => tagged("lcurryinv", vec![doc(a), ty(t)]),
        T::LFst(a, b) => tagged("lfst", vec![ty(a), ty(b)]),
        T::LSnd(a, b) => tagged("lsnd", vec![ty(a), ty(b)]),
        T::LPair(f, g) => tagged("lpair", vec![doc(f), doc(g)]),
    }
}

fn flat(d: &Doc, out: &mut String) {
    match d {
        Doc::Atom(s) => out.push_str(s),
        Doc::List { items, .. } => {
            out.push('(');
            for (i, it) in items.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                flat(it, out);
            }
            out.push(')');
        }
    }
}

fn render(d: &Doc, indent: usize, out: &mut String) {
    let mut one = String::new();
    flat(d, &mut one);
    let Doc::List { items, keep } = d else { return out.push_str(&one) };
    if indent + one.len() <= WIDTH || items.len() <= 1 {
        return out.push_str(&one);
    }
    out.push('(');
    let first_line = (1 + keep).min(items.len());
    let mut col = indent + 1;
    for (i, it) in items[..first_line].iter().enumerate() {
        if i > 0 {
            out.push(' ');
            col += 1;
        }
        let start = out.len();
        render(it, col, out);
        col += out.len() - start;
    }
    for it in &items[first_line..] {
        out.push('\n');
        out.push_str(&" ".repeat(indent + 2));
        render(it, indent + 2, out);
    }
    out.push(')');
}

pub fn print_type(t: &TargetType) -> String {
    t.to_string()
}

pub fn print_term(t: &TargetTerm) -> String {
    let mut out = String::new();
    render(&doc(t), 0, &mut out);
    out
}

pub fn print_program(p: &TargetProgram) -> String {
    let mut items = vec![atom("program")];
    if let Some(n) = &p.name {
        items.push(atom(n.as_str()));
    }
    let keep = items.len() - 1;
    items.push(list(vec![atom("arg-type"), ty(&p.arg_type)]));
    items.push(list(vec![atom("body"), doc(&p.body)]));
    let mut out = String::new();
    render(&Doc::List { items, keep }, 0, &mut out);
    out.push('\n');
    out
}

pub fn print_programs(ps: &[TargetProgram]) -> String {
    ps.iter().map(print_program).collect::<Vec<_>>().join("\n")
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse_programs;
    use super::*;
    use crate::name::Name;
    use crate::term::build::*;

    fn r(n: usize) -> TargetType {
        TargetType::real(n)
    }

    #[test]
    fn short_terms_print_flat() {
        let x = Name::new("x");
        let t = lam(&x, r(1), op("add", pair(var(&x), constant(&[1.0, -0.5]))));
        assert_eq!(print_term(&t), "(lam (x (real 1)) (op add (pair x (const 1.0 -0.5))))");
        let l = app(lam(&x, r(1), var(&x)), constant(&[2.0]));
        assert_eq!(print_term(&l), "(let (x (const 2.0)) x)");
    }

    #[test]
    fn long_terms_break_and_reparse() {
        let arg = Name::new("arg");
        let mut t = var(&arg);
        for _ in 0..6 {
            t = op("sigmoid", op("add", pair(t.clone(), constant(&[0.1, 1e-20]))));
        }
        let p = TargetProgram { name: Some("deep".into()), arg: arg.clone(), arg_type: r(2), body: t };
        let text = print_program(&p);
        assert!(text.lines().count() > 3);
        assert!(text.lines().all(|l| l.len() <= WIDTH), "{text}");
        let back = parse_programs(&text).unwrap();
        assert_eq!(back[0].program, p);
        assert_eq!(print_program(&back[0].program), text);
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, -0.0, 1e300, 5e-324, 1.0 / 3.0, 12345678.9] {
            assert_eq!(format_number(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
