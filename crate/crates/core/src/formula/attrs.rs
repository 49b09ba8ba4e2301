use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

/// An ordered list of distinct attribute names. Positions are dense `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttributeUniverse {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl AttributeUniverse {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out = AttributeUniverse {
            names: Vec::new(),
            index: HashMap::new(),
        };
        for name in names {
            let name = name.into();
            if !is_identifier(&name) {
                return Err(Error::Malformed(format!("`{name}` is not a valid attribute name")));
            }
            if out.index.contains_key(&name) {
                return Err(Error::DuplicateAttribute(name));
            }
            out.index.insert(name.clone(), out.names.len());
            out.names.push(name);
        }
        Ok(out)
    }

    /// Parses a comma-separated declaration such as `a, b, c`.
    pub fn parse_decl(text: &str) -> Result<Self> {
        let names: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        AttributeUniverse::new(names)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn empty_set(&self) -> AttrSet {
        AttrSet::empty(self.len())
    }

    pub fn full_set(&self) -> AttrSet {
        AttrSet::full(self.len())
    }

    /// Builds a set from attribute names.
    pub fn set<I, S>(&self, names: I) -> Result<AttrSet>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut s = self.empty_set();
        for n in names {
            let n = n.as_ref();
            let i = self.position(n).ok_or_else(|| Error::UnknownAttribute(n.to_string()))?;
            s.insert(i);
        }
        Ok(s)
    }

    /// Parses `{a,b}` (braces required) into a set.
    pub fn parse_set(&self, text: &str) -> Result<AttrSet> {
        let t = text.trim();
        let inner = t
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| Error::syntax(0, format!("expected `{{...}}`, found `{t}`")))?;
        self.set(inner.split(',').map(str::trim).filter(|s| !s.is_empty()))
    }

    pub fn format_set(&self, s: &AttrSet) -> String {
        let names: Vec<&str> = s.iter().map(|i| self.name(i)).collect();
        format!("{{{}}}", names.join(","))
    }
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | ':' | '.')
}

pub(crate) fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.chars().all(is_ident_char)
}

/// A set of attribute positions, stored as a bitset over a fixed universe size.
///
/// Ordered lexicographically by the ascending member list, so `{}` < `{a}` <
/// `{a,b}` < `{b}` for a universe `a, b`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AttrSet(FixedBitSet);

impl AttrSet {
    pub fn empty(universe_len: usize) -> Self {
        AttrSet(FixedBitSet::with_capacity(universe_len))
    }

    pub fn full(universe_len: usize) -> Self {
        let mut b = FixedBitSet::with_capacity(universe_len);
        b.insert_range(..);
        AttrSet(b)
    }

    pub fn singleton(universe_len: usize, i: usize) -> Self {
        let mut s = AttrSet::empty(universe_len);
        s.insert(i);
        s
    }

    pub fn from_indices(universe_len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = AttrSet::empty(universe_len);
        for i in indices {
            s.insert(i);
        }
        s
    }

    /// Size of the universe this set lives in.
    pub fn universe_len(&self) -> usize {
        self.0.len()
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(i)
    }

    /// Panics if `i` is outside the universe.
    pub fn insert(&mut self, i: usize) {
        assert!(
            i < self.0.len(),
            "attribute {i} outside universe of size {}",
            self.0.len()
        );
        self.0.insert(i);
    }

    pub fn remove(&mut self, i: usize) {
        self.0.set(i, false);
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn union(&self, other: &AttrSet) -> AttrSet {
        let mut b = self.0.clone();
        b.union_with(&other.0);
        AttrSet(b)
    }

    pub fn union_with(&mut self, other: &AttrSet) {
        self.0.union_with(&other.0);
    }

    pub fn intersection(&self, other: &AttrSet) -> AttrSet {
        let mut b = self.0.clone();
        b.intersect_with(&other.0);
        AttrSet(b)
    }

    pub fn difference(&self, other: &AttrSet) -> AttrSet {
        let mut b = self.0.clone();
        b.difference_with(&other.0);
        AttrSet(b)
    }

    pub fn complement(&self) -> AttrSet {
        let mut b = self.0.clone();
        b.toggle_range(..);
        AttrSet(b)
    }

    pub fn is_subset(&self, other: &AttrSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &AttrSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn intersects(&self, other: &AttrSet) -> bool {
        !self.is_disjoint(other)
    }

    /// Re-indexes into a larger universe, keeping positions.
    pub fn widen(&self, universe_len: usize) -> AttrSet {
        assert!(universe_len >= self.universe_len());
        let mut b = self.0.clone();
        b.grow(universe_len);
        AttrSet(b)
    }
}

impl Ord for AttrSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter()
            .cmp(other.iter())
            .then_with(|| self.universe_len().cmp(&other.universe_len()))
    }
}

impl PartialOrd for AttrSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for AttrSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
