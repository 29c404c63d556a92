//! Variable names and deterministic fresh-name generation.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

/// An interned-by-refcount variable name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The name with any `_<digits>` suffix added by [`NameSupply`] removed.
    pub fn base(&self) -> &str {
        let s = self.as_str();
        match s.rfind('_') {
            Some(i) if i > 0 && i + 1 < s.len() && s[i + 1..].bytes().all(|b| b.is_ascii_digit()) => {
                &s[..i]
            }
            _ => s,
        }
    }

    fn suffix(&self) -> Option<u64> {
        let s = self.as_str();
        let i = s.rfind('_')?;
        if i == 0 {
            return None;
        }
        s[i + 1..].parse().ok()
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

/// Generates `base_N` names from a monotone counter.
///
/// Output is reproducible: the same sequence of requests yields the same
/// names. Names listed as reserved are never produced.
#[derive(Debug, Clone, Default)]
pub struct NameSupply {
    next: u64,
    reserved: HashSet<Name>,
}

impl NameSupply {
    pub fn new() -> Self {
        Self::default()
    }

    /// A supply that never returns any of `names`.
    pub fn avoiding<'a>(names: impl IntoIterator<Item = &'a Name>) -> Self {
        let mut supply = Self::new();
        for n in names {
            supply.reserve(n);
        }
        supply
    }

    /// Reserve `name`, and skip the counter past its suffix so that later
    /// fresh names cannot coincide with it.
    pub fn reserve(&mut self, name: &Name) {
        if let Some(k) = name.suffix() {
            self.next = self.next.max(k + 1);
        }
        self.reserved.insert(name.clone());
    }

    pub fn fresh(&mut self, base: &str) -> Name {
        let base = Name::new(base);
        let base = base.base();
        let base = if base.is_empty() { "v" } else { base };
        loop {
            let candidate = Name::new(&format!("{base}_{}", self.next));
            self.next += 1;
            if !self.reserved.contains(&candidate) {
                return candidate;
            }
        }
    }

    /// A fresh name with the same base as `like`.
    pub fn fresh_like(&mut self, like: &Name) -> Name {
        let base = like.base().to_string();
        self.fresh(&base)
    }
}
