//! S-expressions with source positions.

use std::fmt;

use super::SyntaxError;

#[derive(Clone, Debug, PartialEq)]
pub enum SexpKind {
    Atom(String),
    List(Vec<Sexp>),
}

/// An s-expression and the 1-based line and column where it starts.
#[derive(Clone, Debug, PartialEq)]
pub struct Sexp {
    pub kind: SexpKind,
    pub line: usize,
    pub col: usize,
}

impl Sexp {
    pub fn atom(&self) -> Option<&str> {
        match &self.kind {
            SexpKind::Atom(a) => Some(a),
            SexpKind::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match &self.kind {
            SexpKind::List(l) => Some(l),
            SexpKind::Atom(_) => None,
        }
    }

    /// The head symbol and arguments of a list `(head args...)`.
    pub fn form(&self) -> Option<(&str, &[Sexp])> {
        let l = self.list()?;
        let (h, rest) = l.split_first()?;
        Some((h.atom()?, rest))
    }

    pub fn error(&self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError { message: msg.into(), line: self.line, col: self.col }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SexpKind::Atom(a) => f.write_str(a),
            SexpKind::List(l) => {
                f.write_str("(")?;
                for (i, s) in l.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{s}")?;
                }
                f.write_str(")")
            }
        }
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Reader<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while self.chars.peek().is_some_and(|&c| c != '\n') {
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn error(&self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError { message: msg.into(), line: self.line, col: self.col }
    }

    fn read(&mut self) -> Result<Sexp, SyntaxError> {
        self.skip_trivia();
        let (line, col) = (self.line, self.col);
        match self.chars.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(')') => Err(self.error("unexpected `)`")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => return Err(SyntaxError { message: "unclosed `(`".into(), line, col }),
                        Some(')') => {
                            self.bump();
                            return Ok(Sexp { kind: SexpKind::List(items), line, col });
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            Some(_) => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
                Ok(Sexp { kind: SexpKind::Atom(s), line, col })
            }
        }
    }
}

/// Reads every top-level s-expression in `text`. `;` starts a comment.
pub fn read_all(text: &str) -> Result<Vec<Sexp>, SyntaxError> {
    let mut r = Reader { chars: text.chars().peekable(), line: 1, col: 1 };
    let mut out = Vec::new();
    loop {
        r.skip_trivia();
        if r.chars.peek().is_none() {
            return Ok(out);
        }
        out.push(r.read()?);
    }
}
