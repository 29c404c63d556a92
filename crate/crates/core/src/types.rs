//! Types of the source language and of the applied target language.

use std::fmt;

/// Types of the source λ-calculus.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SourceType {
    /// A one-dimensional array of `n ≥ 1` reals.
    Real(usize),
    Unit,
    Prod(Box<SourceType>, Box<SourceType>),
    Fun(Box<SourceType>, Box<SourceType>),
}

impl SourceType {
    pub fn real(n: usize) -> Self {
        SourceType::Real(n)
    }

    pub fn prod(a: SourceType, b: SourceType) -> Self {
        SourceType::Prod(Box::new(a), Box::new(b))
    }

    pub fn fun(a: SourceType, b: SourceType) -> Self {
        SourceType::Fun(Box::new(a), Box::new(b))
    }

    /// True iff the type contains no function arrow.
    pub fn is_first_order(&self) -> bool {
        match self {
            SourceType::Real(_) | SourceType::Unit => true,
            SourceType::Prod(a, b) => a.is_first_order() && b.is_first_order(),
            SourceType::Fun(..) => false,
        }
    }

    /// Number of reals in a flattened value of this first-order type.
    pub fn flat_width(&self) -> Option<usize> {
        match self {
            SourceType::Real(n) => Some(*n),
            SourceType::Unit => Some(0),
            SourceType::Prod(a, b) => Some(a.flat_width()? + b.flat_width()?),
            SourceType::Fun(..) => None,
        }
    }

    /// Checks the `Real` width invariant everywhere in the type.
    pub fn is_well_formed(&self) -> bool {
        match self {
            SourceType::Real(n) => *n >= 1,
            SourceType::Unit => true,
            SourceType::Prod(a, b) | SourceType::Fun(a, b) => a.is_well_formed() && b.is_well_formed(),
        }
    }

    pub fn to_target(&self) -> TargetType {
        TargetType::from(self)
    }
}

/// Types of the applied target language: the source types plus the
/// abstract types of linear functions and formal sums of pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TargetType {
    Real(usize),
    Unit,
    Prod(Box<TargetType>, Box<TargetType>),
    Fun(Box<TargetType>, Box<TargetType>),
    LinFun(Box<TargetType>, Box<TargetType>),
    Map(Box<TargetType>, Box<TargetType>),
}

impl TargetType {
    pub fn real(n: usize) -> Self {
        TargetType::Real(n)
    }

    pub fn prod(a: TargetType, b: TargetType) -> Self {
        TargetType::Prod(Box::new(a), Box::new(b))
    }

    pub fn fun(a: TargetType, b: TargetType) -> Self {
        TargetType::Fun(Box::new(a), Box::new(b))
    }

    pub fn linfun(a: TargetType, b: TargetType) -> Self {
        TargetType::LinFun(Box::new(a), Box::new(b))
    }

    pub fn map(a: TargetType, b: TargetType) -> Self {
        TargetType::Map(Box::new(a), Box::new(b))
    }

    pub fn is_first_order(&self) -> bool {
        match self {
            TargetType::Real(_) | TargetType::Unit => true,
            TargetType::Prod(a, b) => a.is_first_order() && b.is_first_order(),
            _ => false,
        }
    }

    pub fn flat_width(&self) -> Option<usize> {
        match self {
            TargetType::Real(n) => Some(*n),
            TargetType::Unit => Some(0),
            TargetType::Prod(a, b) => Some(a.flat_width()? + b.flat_width()?),
            _ => None,
        }
    }

    /// The source type this target type embeds, if it uses no linear formers.
    pub fn to_source(&self) -> Option<SourceType> {
        Some(match self {
            TargetType::Real(n) => SourceType::Real(*n),
            TargetType::Unit => SourceType::Unit,
            TargetType::Prod(a, b) => SourceType::prod(a.to_source()?, b.to_source()?),
            TargetType::Fun(a, b) => SourceType::fun(a.to_source()?, b.to_source()?),
            TargetType::LinFun(..) | TargetType::Map(..) => return None,
        })
    }
}

impl From<&SourceType> for TargetType {
    fn from(t: &SourceType) -> Self {
        match t {
            SourceType::Real(n) => TargetType::Real(*n),
            SourceType::Unit => TargetType::Unit,
            SourceType::Prod(a, b) => TargetType::prod(a.as_ref().into(), b.as_ref().into()),
            SourceType::Fun(a, b) => TargetType::fun(a.as_ref().into(), b.as_ref().into()),
        }
    }
}

impl From<SourceType> for TargetType {
    fn from(t: SourceType) -> Self {
        TargetType::from(&t)
    }
}

impl fmt::Display for SourceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_target(), f)
    }
}

impl fmt::Display for TargetType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetType::Real(n) => write!(f, "(real {n})"),
            TargetType::Unit => f.write_str("unit"),
            TargetType::Prod(a, b) => write!(f, "(prod {a} {b})"),
            TargetType::Fun(a, b) => write!(f, "(fun {a} {b})"),
            TargetType::LinFun(a, b) => write!(f, "(linfun {a} {b})"),
            TargetType::Map(a, b) => write!(f, "(map {a} {b})"),
        }
    }
}
