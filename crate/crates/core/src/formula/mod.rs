//! Attribute universes, budgeted dependency atoms and boolean formulas over them.
//!
//! The abstract syntax has exactly three node kinds: atoms `A |p B`, negation
//! and implication. Conjunction, disjunction and equivalence are provided as
//! constructors that desugar into those three.

mod attrs;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use attrs::{AttrSet, AttributeUniverse};
pub use parse::parse_formula;

use crate::budget::Budget;
use crate::error::{Error, Result};

/// A budget-constrained dependency `lhs |budget rhs`.
///
/// Ordered by `(lhs, rhs, budget)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Atom {
    pub lhs: AttrSet,
    pub rhs: AttrSet,
    pub budget: Budget,
}

impl Atom {
    pub fn new(lhs: AttrSet, rhs: AttrSet, budget: Budget) -> Self {
        assert_eq!(
            lhs.universe_len(),
            rhs.universe_len(),
            "atom sides must share a universe"
        );
        Atom { lhs, rhs, budget }
    }

    pub fn universe_len(&self) -> usize {
        self.lhs.universe_len()
    }

    /// Parses a single atom such as `{a,c} |0 {b}`.
    pub fn parse(text: &str, universe: &AttributeUniverse) -> Result<Atom> {
        match parse_formula(text, universe)? {
            Formula::Atom(a) => Ok(a),
            _ => Err(Error::syntax(0, "expected a single atom")),
        }
    }

    pub fn display<'a>(&'a self, universe: &'a AttributeUniverse) -> AtomDisplay<'a> {
        AtomDisplay { atom: self, universe }
    }
}

pub struct AtomDisplay<'a> {
    atom: &'a Atom,
    universe: &'a AttributeUniverse,
}

impl fmt::Display for AtomDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} |{} {}",
            self.universe.format_set(&self.atom.lhs),
            self.atom.budget,
            self.universe.format_set(&self.atom.rhs)
        )
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl From<Atom> for Formula {
    fn from(a: Atom) -> Self {
        Formula::Atom(a)
    }
}

impl Formula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    /// `a & b` as `!(a => !b)`.
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::implies(a, Formula::not(b)))
    }

    /// `a | b` as `!a => b`.
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::implies(Formula::not(a), b)
    }

    /// `a <=> b` as `(a => b) & (b => a)`.
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(Formula::implies(a.clone(), b.clone()), Formula::implies(b, a))
    }

    /// Distinct atoms in ascending `(lhs, rhs, budget)` order.
    pub fn atoms(&self) -> Vec<Atom> {
        let mut seen = BTreeSet::new();
        self.visit_atoms(&mut |a| {
            seen.insert(a.clone());
        });
        seen.into_iter().collect()
    }

    fn visit_atoms(&self, f: &mut impl FnMut(&Atom)) {
        match self {
            Formula::Atom(a) => f(a),
            Formula::Not(x) => x.visit_atoms(f),
            Formula::Implies(x, y) => {
                x.visit_atoms(f);
                y.visit_atoms(f);
            }
        }
    }

    /// Largest budget subscript occurring in the formula.
    pub fn rank(&self) -> Budget {
        match self {
            Formula::Atom(a) => a.budget.clone(),
            Formula::Not(x) => x.rank(),
            Formula::Implies(x, y) => std::cmp::max(x.rank(), y.rank()),
        }
    }

    /// Universe size shared by the atoms (every formula has at least one).
    pub fn universe_len(&self) -> usize {
        match self {
            Formula::Atom(a) => a.universe_len(),
            Formula::Not(x) => x.universe_len(),
            Formula::Implies(x, _) => x.universe_len(),
        }
    }

    /// Classical evaluation under a truth assignment to the atoms.
    pub fn evaluate(&self, assignment: &Assignment) -> Result<bool> {
        self.eval_with(&mut |a: &Atom| assignment.get(a).ok_or_else(|| Error::MissingAtom(format!("{a:?}"))))
    }

    /// Evaluates with a caller-supplied atom semantics. Implication does not
    /// consult the consequent when the antecedent is false.
    pub fn eval_with<E>(
        &self,
        atom_truth: &mut impl FnMut(&Atom) -> std::result::Result<bool, E>,
    ) -> std::result::Result<bool, E> {
        match self {
            Formula::Atom(a) => atom_truth(a),
            Formula::Not(x) => Ok(!x.eval_with(atom_truth)?),
            Formula::Implies(x, y) => {
                if x.eval_with(atom_truth)? {
                    y.eval_with(atom_truth)
                } else {
                    Ok(true)
                }
            }
        }
    }

    /// Rewrites every attribute set through `f`, e.g. to embed into a larger universe.
    pub fn map_sets(&self, f: &impl Fn(&AttrSet) -> AttrSet) -> Formula {
        match self {
            Formula::Atom(a) => Formula::Atom(Atom::new(f(&a.lhs), f(&a.rhs), a.budget.clone())),
            Formula::Not(x) => Formula::not(x.map_sets(f)),
            Formula::Implies(x, y) => Formula::implies(x.map_sets(f), y.map_sets(f)),
        }
    }

    /// Pretty-prints in the concrete syntax accepted by [`parse_formula`].
    pub fn display<'a>(&'a self, universe: &'a AttributeUniverse) -> FormulaDisplay<'a> {
        FormulaDisplay {
            formula: self,
            universe,
        }
    }
}

pub struct FormulaDisplay<'a> {
    formula: &'a Formula,
    universe: &'a AttributeUniverse,
}

impl FormulaDisplay<'_> {
    // `nested_lhs` is set for the left operand of `=>`, which must be
    // parenthesized when it is itself an implication.
    fn write(&self, f: &mut fmt::Formatter<'_>, node: &Formula, nested_lhs: bool) -> fmt::Result {
        match node {
            Formula::Atom(a) => write!(f, "{}", a.display(self.universe)),
            Formula::Not(x) => {
                f.write_str("!")?;
                match **x {
                    Formula::Implies(..) => {
                        f.write_str("(")?;
                        self.write(f, x, false)?;
                        f.write_str(")")
                    }
                    _ => self.write(f, x, false),
                }
            }
            Formula::Implies(x, y) => {
                if nested_lhs {
                    f.write_str("(")?;
                }
                self.write(f, x, true)?;
                f.write_str(" => ")?;
                self.write(f, y, false)?;
                if nested_lhs {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, self.formula, false)
    }
}

/// A truth value for each atom of a formula.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<Atom, bool>);

impl Assignment {
    pub fn new() -> Self {
        Assignment::default()
    }

    /// The assignment encoded by the low bits of `mask`, atom `i` taking bit `i`.
    pub fn from_mask(atoms: &[Atom], mask: u64) -> Self {
        Assignment(
            atoms
                .iter()
                .enumerate()
                .map(|(i, a)| (a.clone(), mask >> i & 1 == 1))
                .collect(),
        )
    }

    pub fn set(&mut self, atom: Atom, value: bool) {
        self.0.insert(atom, value);
    }

    pub fn get(&self, atom: &Atom) -> Option<bool> {
        self.0.get(atom).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Atom, bool)> {
        self.0.iter().map(|(a, v)| (a, *v))
    }

    pub fn true_atoms(&self) -> Vec<Atom> {
        self.iter().filter(|(_, v)| *v).map(|(a, _)| a.clone()).collect()
    }

    pub fn false_atoms(&self) -> Vec<Atom> {
        self.iter().filter(|(_, v)| !*v).map(|(a, _)| a.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(Atom, bool)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (Atom, bool)>>(iter: I) -> Self {
        Assignment(iter.into_iter().collect())
    }
}
