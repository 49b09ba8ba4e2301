//! Proof objects over Reflexivity, Augmentation and Transitivity, a checker,
//! and constructors for derived rules.
//!
//! Construction and checking are deliberately separate: the constructors in
//! this module compute conclusions without validating side conditions, and
//! [`check_proof`] re-derives and validates every node from scratch.

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::entailment::PremiseSet;
use crate::error::{Error, Result};
use crate::formula::{Atom, AttrSet, AttributeUniverse};
use crate::hypergraph::{ClosureTrace, EdgeSet};

/// A derivation tree. Every node carries the atom it claims to conclude.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Proof {
    Premise {
        concludes: Atom,
    },
    /// `A |p B` for `B ⊆ A`.
    Reflexivity {
        concludes: Atom,
    },
    /// From `A |p B` infer `A∪C |p B∪C`.
    Augmentation {
        sub: Box<Proof>,
        with: AttrSet,
        concludes: Atom,
    },
    /// From `A |p B` and `B |q C` infer `A |p+q C`.
    Transitivity {
        left: Box<Proof>,
        right: Box<Proof>,
        concludes: Atom,
    },
}

impl Proof {
    pub fn premise(atom: Atom) -> Proof {
        Proof::Premise { concludes: atom }
    }

    pub fn reflexivity(lhs: AttrSet, rhs: AttrSet, budget: Budget) -> Proof {
        Proof::Reflexivity {
            concludes: Atom::new(lhs, rhs, budget),
        }
    }

    pub fn augment(sub: Proof, with: AttrSet) -> Proof {
        let c = sub.conclusion();
        let concludes = Atom::new(c.lhs.union(&with), c.rhs.union(&with), c.budget.clone());
        Proof::Augmentation {
            sub: Box::new(sub),
            with,
            concludes,
        }
    }

    /// Chains `left: A |p B` with `right: B' |q C`, concluding `A |p+q C`.
    /// Fails when the middle sets differ.
    pub fn chain(left: Proof, right: Proof) -> Result<Proof> {
        let (l, r) = (left.conclusion(), right.conclusion());
        if l.rhs != r.lhs {
            return Err(Error::Precondition(
                "transitivity needs the left conclusion's right side to equal the right conclusion's left side".into(),
            ));
        }
        let concludes = Atom::new(l.lhs.clone(), r.rhs.clone(), &l.budget + &r.budget);
        Ok(Proof::Transitivity {
            left: Box::new(left),
            right: Box::new(right),
            concludes,
        })
    }

    pub fn conclusion(&self) -> &Atom {
        match self {
            Proof::Premise { concludes }
            | Proof::Reflexivity { concludes }
            | Proof::Augmentation { concludes, .. }
            | Proof::Transitivity { concludes, .. } => concludes,
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Proof::Premise { .. } | Proof::Reflexivity { .. } => 1,
            Proof::Augmentation { sub, .. } => 1 + sub.size(),
            Proof::Transitivity { left, right, .. } => 1 + left.size() + right.size(),
        }
    }

    pub fn count_rule(&self, rule: Rule) -> usize {
        let here = usize::from(self.rule() == rule);
        here + match self {
            Proof::Premise { .. } | Proof::Reflexivity { .. } => 0,
            Proof::Augmentation { sub, .. } => sub.count_rule(rule),
            Proof::Transitivity { left, right, .. } => left.count_rule(rule) + right.count_rule(rule),
        }
    }

    pub fn rule(&self) -> Rule {
        match self {
            Proof::Premise { .. } => Rule::Premise,
            Proof::Reflexivity { .. } => Rule::Refl,
            Proof::Augmentation { .. } => Rule::Aug,
            Proof::Transitivity { .. } => Rule::Trans,
        }
    }

    pub fn to_json(&self, universe: &AttributeUniverse) -> ProofJson {
        let concludes = self.conclusion().display(universe).to_string();
        match self {
            Proof::Premise { .. } => ProofJson::Premise { concludes },
            Proof::Reflexivity { .. } => ProofJson::Refl { concludes },
            Proof::Augmentation { sub, with, .. } => ProofJson::Aug {
                sub: Box::new(sub.to_json(universe)),
                with: universe.format_set(with),
                concludes,
            },
            Proof::Transitivity { left, right, .. } => ProofJson::Trans {
                left: Box::new(left.to_json(universe)),
                right: Box::new(right.to_json(universe)),
                concludes,
            },
        }
    }

    /// Reads a serialized proof. Conclusions are taken as written; nothing is
    /// validated until [`check_proof`].
    pub fn from_json(json: &ProofJson, universe: &AttributeUniverse) -> Result<Proof> {
        Ok(match json {
            ProofJson::Premise { concludes } => Proof::Premise {
                concludes: Atom::parse(concludes, universe)?,
            },
            ProofJson::Refl { concludes } => Proof::Reflexivity {
                concludes: Atom::parse(concludes, universe)?,
            },
            ProofJson::Aug { sub, with, concludes } => Proof::Augmentation {
                sub: Box::new(Proof::from_json(sub, universe)?),
                with: universe.parse_set(with)?,
                concludes: Atom::parse(concludes, universe)?,
            },
            ProofJson::Trans { left, right, concludes } => Proof::Transitivity {
                left: Box::new(Proof::from_json(left, universe)?),
                right: Box::new(Proof::from_json(right, universe)?),
                concludes: Atom::parse(concludes, universe)?,
            },
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    Premise,
    Refl,
    Aug,
    Trans,
}

/// Serialized proof tree, e.g.
/// `{"rule":"Trans","left":{..},"right":{..},"concludes":"{a} |3 {c}"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule")]
pub enum ProofJson {
    Premise {
        concludes: String,
    },
    Refl {
        concludes: String,
    },
    Aug {
        sub: Box<ProofJson>,
        with: String,
        concludes: String,
    },
    Trans {
        left: Box<ProofJson>,
        right: Box<ProofJson>,
        concludes: String,
    },
}

/// Where and why a proof was rejected. `path` lists the child links taken
/// from the root, e.g. `["left", "sub"]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckFailure {
    pub path: Vec<&'static str>,
    pub reason: String,
}

impl std::fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.path.is_empty() {
            write!(f, "at root: {}", self.reason)
        } else {
            write!(f, "at root.{}: {}", self.path.join("."), self.reason)
        }
    }
}

/// Validates every node's side condition and that every premise leaf is in
/// `premises`.
pub fn check_proof(proof: &Proof, premises: &PremiseSet) -> std::result::Result<(), CheckFailure> {
    let mut path = Vec::new();
    check_node(proof, premises, &mut path)
}

fn fail(path: &[&'static str], reason: impl Into<String>) -> std::result::Result<(), CheckFailure> {
    Err(CheckFailure {
        path: path.to_vec(),
        reason: reason.into(),
    })
}

fn check_node(
    node: &Proof,
    premises: &PremiseSet,
    path: &mut Vec<&'static str>,
) -> std::result::Result<(), CheckFailure> {
    let n = premises.universe().len();
    let claim = node.conclusion();
    if claim.lhs.universe_len() != n || claim.rhs.universe_len() != n {
        return fail(path, "conclusion is over a different universe");
    }
    match node {
        Proof::Premise { concludes } => {
            if !premises.atoms().contains(concludes) {
                return fail(path, "premise leaf is not in the premise set");
            }
        }
        Proof::Reflexivity { concludes } => {
            if !concludes.rhs.is_subset(&concludes.lhs) {
                return fail(path, "reflexivity requires the right side to be a subset of the left");
            }
        }
        Proof::Augmentation { sub, with, concludes } => {
            path.push("sub");
            check_node(sub, premises, path)?;
            path.pop();
            let s = sub.conclusion();
            let lhs_ok = concludes.lhs == s.lhs.union(with);
            let rhs_ok = concludes.rhs == s.rhs.union(with);
            if !lhs_ok || !rhs_ok || concludes.budget != s.budget {
                return fail(path, "augmentation conclusion does not match premise ∪ augmenting set");
            }
        }
        Proof::Transitivity { left, right, concludes } => {
            path.push("left");
            check_node(left, premises, path)?;
            path.pop();
            path.push("right");
            check_node(right, premises, path)?;
            path.pop();
            let (l, r) = (left.conclusion(), right.conclusion());
            if l.rhs != r.lhs {
                return fail(path, "transitivity middle sets differ");
            }
            if concludes.lhs != l.lhs || concludes.rhs != r.rhs {
                return fail(path, "transitivity conclusion has the wrong sides");
            }
            if concludes.budget != &l.budget + &r.budget {
                return fail(path, "transitivity budget is not the sum of its parts");
            }
        }
    }
    Ok(())
}

/// Turns a closure trace over the canonical hypergraph of `premises` into a
/// proof of `goal`.
///
/// Step `m` of the trace contributes the premise `in(f_m) |w out(f_m)`
/// augmented by `A_m`, which reads `A_m |w A_{m+1}` because `in(f_m) ⊆ A_m`;
/// these are chained left to right. Unused budget is absorbed by a
/// reflexive `A |slack A` in front, and a final reflexive step projects
/// `A_n` onto `goal.rhs`.
pub fn build_proof(premises: &PremiseSet, goal: &Atom, trace: &ClosureTrace, purchase: &EdgeSet) -> Result<Proof> {
    let atoms = premises.atoms();
    if purchase.capacity() != atoms.len() {
        return Err(Error::Precondition("purchase set is not over the premise edges".into()));
    }
    if trace.start() != &goal.lhs {
        return Err(Error::Precondition(
            "trace does not start at the goal's left side".into(),
        ));
    }
    if !goal.rhs.is_subset(trace.end()) {
        return Err(Error::Precondition("trace does not reach the goal's right side".into()));
    }
    let spent: Budget = purchase.iter().map(|e| &atoms[e].budget).sum();
    if spent > goal.budget {
        return Err(Error::Precondition(format!(
            "purchase costs {spent}, more than the goal budget {}",
            goal.budget
        )));
    }
    if trace.edges.iter().any(|&e| !purchase.contains(e)) {
        return Err(Error::Precondition(
            "trace uses an edge outside the purchase set".into(),
        ));
    }

    if trace.edges.is_empty() {
        return Ok(Proof::reflexivity(
            goal.lhs.clone(),
            goal.rhs.clone(),
            goal.budget.clone(),
        ));
    }

    let mut acc: Option<Proof> = None;
    let mut used = Budget::zero();
    for (m, &e) in trace.edges.iter().enumerate() {
        let step = Proof::augment(Proof::premise(atoms[e].clone()), trace.sets[m].clone());
        used = used + &atoms[e].budget;
        acc = Some(match acc {
            None => step,
            Some(prev) => Proof::chain(prev, step)?,
        });
    }
    let mut proof = acc.expect("non-empty trace");
    let slack = goal
        .budget
        .checked_sub(&used)
        .expect("trace edges are a subset of an affordable purchase");
    if !slack.is_zero() {
        let pad = Proof::reflexivity(goal.lhs.clone(), goal.lhs.clone(), slack);
        proof = Proof::chain(pad, proof)?;
    }
    if &goal.rhs != trace.end() {
        let project = Proof::reflexivity(trace.end().clone(), goal.rhs.clone(), Budget::zero());
        proof = Proof::chain(proof, project)?;
    }
    Ok(proof)
}

/// `A |p C∪D ⊢ A∪B |p C`: augment by `B`, then drop `B∪D` reflexively.
pub fn derive_weakening(p: Budget, a: &AttrSet, b: &AttrSet, c: &AttrSet, d: &AttrSet) -> Result<Proof> {
    let premise = Proof::premise(Atom::new(a.clone(), c.union(d), p));
    let augmented = Proof::augment(premise, b.clone());
    let project = Proof::reflexivity(b.union(c).union(d), c.clone(), Budget::zero());
    Proof::chain(augmented, project)
}

/// `A |p B ⊢ A |q B` for `p <= q`, via `B |q-p B`.
pub fn derive_monotonicity(a: &AttrSet, b: &AttrSet, p: Budget, q: Budget) -> Result<Proof> {
    let diff = q
        .checked_sub(&p)
        .ok_or_else(|| Error::Precondition(format!("monotonicity needs p <= q, got p = {p}, q = {q}")))?;
    let premise = Proof::premise(Atom::new(a.clone(), b.clone(), p));
    let pad = Proof::reflexivity(b.clone(), b.clone(), diff);
    Proof::chain(premise, pad)
}

/// `A |p B, C |q D ⊢ A∪C |p+q B∪D`.
pub fn derive_general_augmentation(
    a: &AttrSet,
    b: &AttrSet,
    c: &AttrSet,
    d: &AttrSet,
    p: Budget,
    q: Budget,
) -> Result<Proof> {
    let first = Proof::augment(Proof::premise(Atom::new(a.clone(), b.clone(), p)), c.clone());
    let second = Proof::augment(Proof::premise(Atom::new(c.clone(), d.clone(), q)), b.clone());
    Proof::chain(first, second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entailment::{canonical_hypergraph, min_budget, PremiseSet};

    fn uni() -> AttributeUniverse {
        AttributeUniverse::new(["a", "b", "c", "d"]).unwrap()
    }

    fn atom(u: &AttributeUniverse, t: &str) -> Atom {
        Atom::parse(t, u).unwrap()
    }

    fn set(u: &AttributeUniverse, t: &str) -> AttrSet {
        u.parse_set(t).unwrap()
    }

    fn premises(u: &AttributeUniverse, ts: &[&str]) -> PremiseSet {
        PremiseSet::new(u.clone(), ts.iter().map(|t| atom(u, t)).collect()).unwrap()
    }

    /// Sum of all leaf budgets, computed without looking at inner conclusions.
    fn leaf_budget_total(p: &Proof) -> Budget {
        match p {
            Proof::Premise { concludes } | Proof::Reflexivity { concludes } => concludes.budget.clone(),
            Proof::Augmentation { sub, .. } => leaf_budget_total(sub),
            Proof::Transitivity { left, right, .. } => leaf_budget_total(left) + leaf_budget_total(right),
        }
    }

    fn prove(p: &PremiseSet, goal: &Atom) -> Proof {
        let h = canonical_hypergraph(p);
        let sol = min_budget(&h, &goal.lhs, &goal.rhs);
        let f = sol.edges().unwrap().clone();
        let trace = h.closure_trace(&goal.lhs, &f);
        build_proof(p, goal, &trace, &f).unwrap()
    }

    #[test]
    fn reflexivity_side_condition() {
        let u = uni();
        let empty = premises(&u, &[]);
        let ok = Proof::reflexivity(set(&u, "{a,b}"), set(&u, "{a}"), Budget::zero());
        assert!(check_proof(&ok, &empty).is_ok());
        let bad = Proof::reflexivity(set(&u, "{a}"), set(&u, "{b}"), Budget::zero());
        assert!(check_proof(&bad, &empty).is_err());
    }

    #[test]
    fn transitivity_axiom_instance() {
        let u = uni();
        let p = premises(&u, &["{a} |1 {b}", "{b} |2 {c}"]);
        let pr = Proof::chain(
            Proof::premise(atom(&u, "{a} |1 {b}")),
            Proof::premise(atom(&u, "{b} |2 {c}")),
        )
        .unwrap();
        assert_eq!(pr.conclusion(), &atom(&u, "{a} |3 {c}"));
        assert!(check_proof(&pr, &p).is_ok());
    }

    #[test]
    fn checker_reports_the_failing_node() {
        let u = uni();
        let p = premises(&u, &["{a} |1 {b}"]);
        let pr = Proof::chain(
            Proof::premise(atom(&u, "{a} |1 {b}")),
            Proof::premise(atom(&u, "{b} |2 {c}")),
        )
        .unwrap();
        let err = check_proof(&pr, &p).unwrap_err();
        assert_eq!(err.path, vec!["right"]);

        // a tampered budget at the root
        let mut forged = Proof::chain(
            Proof::premise(atom(&u, "{a} |1 {b}")),
            Proof::reflexivity(set(&u, "{b}"), set(&u, "{b}"), Budget::zero()),
        )
        .unwrap();
        if let Proof::Transitivity { concludes, .. } = &mut forged {
            concludes.budget = Budget::zero();
        }
        let err = check_proof(&forged, &p).unwrap_err();
        assert!(err.path.is_empty());
        assert!(err.reason.contains("budget"));

        // a tampered augmentation
        let aug = Proof::Augmentation {
            sub: Box::new(Proof::premise(atom(&u, "{a} |1 {b}"))),
            with: set(&u, "{c}"),
            concludes: atom(&u, "{a,c} |1 {b}"),
        };
        assert!(check_proof(&aug, &p).is_err());
    }

    #[test]
    fn builds_single_premise_wrapper() {
        let u = uni();
        let p = premises(&u, &["{a} |1 {b}"]);
        let goal = atom(&u, "{a} |1 {b}");
        let pr = prove(&p, &goal);
        assert_eq!(pr.conclusion(), &goal);
        assert_eq!(pr.count_rule(Rule::Premise), 1);
        assert!(pr.count_rule(Rule::Trans) >= 1);
        assert!(check_proof(&pr, &p).is_ok());
    }

    #[test]
    fn builds_two_step_chain() {
        let u = uni();
        let p = premises(&u, &["{a} |1 {b}", "{b} |2 {c}"]);
        let goal = atom(&u, "{a} |3 {c}");
        let pr = prove(&p, &goal);
        assert_eq!(pr.conclusion(), &goal);
        assert_eq!(pr.count_rule(Rule::Trans), 2);
        assert!(check_proof(&pr, &p).is_ok());
    }

    #[test]
    fn builds_with_budget_padding() {
        let u = uni();
        let p = premises(&u, &["{a} |1 {b}"]);
        let goal = atom(&u, "{a} |7/2 {b}");
        let pr = prove(&p, &goal);
        assert_eq!(pr.conclusion(), &goal);
        assert!(check_proof(&pr, &p).is_ok());
        assert_eq!(leaf_budget_total(&pr), goal.budget);
    }

    #[test]
    fn builds_weakening_shape() {
        let u = uni();
        let p = premises(&u, &["{a} |2 {c,d}"]);
        let goal = atom(&u, "{a,b} |2 {c}");
        let pr = prove(&p, &goal);
        assert!(check_proof(&pr, &p).is_ok());
        match &pr {
            Proof::Transitivity { left, right, .. } => {
                assert_eq!(left.rule(), Rule::Aug);
                assert_eq!(right.rule(), Rule::Refl);
            }
            other => panic!("unexpected shape {other:?}"),
        }
    }

    #[test]
    fn reflexive_goal_needs_no_premises() {
        let u = uni();
        let p = premises(&u, &[]);
        let goal = atom(&u, "{a,b} |2 {a}");
        let pr = prove(&p, &goal);
        assert_eq!(pr.rule(), Rule::Refl);
        assert!(check_proof(&pr, &p).is_ok());
    }

    #[test]
    fn build_rejects_bad_preconditions() {
        let u = uni();
        let p = premises(&u, &["{a} |5 {b}"]);
        let h = canonical_hypergraph(&p);
        let goal = atom(&u, "{a} |4 {b}");
        let f = h.all_edges();
        let trace = h.closure_trace(&goal.lhs, &f);
        assert!(matches!(
            build_proof(&p, &goal, &trace, &f),
            Err(Error::Precondition(_))
        ));
        let unreachable = atom(&u, "{a} |9 {c}");
        let trace = h.closure_trace(&unreachable.lhs, &f);
        assert!(build_proof(&p, &unreachable, &trace, &f).is_err());
    }

    #[test]
    fn derived_rules_check() {
        let u = uni();
        let (a, b, c, d) = (set(&u, "{a}"), set(&u, "{b}"), set(&u, "{c}"), set(&u, "{d}"));
        let two = Budget::from_integer(2);

        let w = derive_weakening(two.clone(), &a, &b, &c, &d).unwrap();
        assert_eq!(w.conclusion(), &atom(&u, "{a,b} |2 {c}"));
        assert!(check_proof(&w, &premises(&u, &["{a} |2 {c,d}"])).is_ok());

        let m = derive_monotonicity(&a, &b, Budget::from_integer(1), Budget::from_integer(3)).unwrap();
        assert_eq!(m.conclusion(), &atom(&u, "{a} |3 {b}"));
        match &m {
            Proof::Transitivity { right, .. } => {
                assert_eq!(right.conclusion(), &atom(&u, "{b} |2 {b}"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(check_proof(&m, &premises(&u, &["{a} |1 {b}"])).is_ok());
        assert!(derive_monotonicity(&a, &b, Budget::from_integer(3), Budget::from_integer(1)).is_err());

        let g = derive_general_augmentation(&a, &b, &c, &d, Budget::zero(), Budget::zero()).unwrap();
        assert_eq!(g.conclusion(), &atom(&u, "{a,c} |0 {b,d}"));
        assert_eq!(g.count_rule(Rule::Aug), 2);
        assert_eq!(g.count_rule(Rule::Trans), 1);
        assert!(check_proof(&g, &premises(&u, &["{a} |0 {b}", "{c} |0 {d}"])).is_ok());
    }

    #[test]
    fn json_round_trip_and_shape() {
        let u = uni();
        let p = premises(&u, &["{a} |1 {b}", "{b} |2 {c}"]);
        let pr = prove(&p, &atom(&u, "{a} |3 {c}"));
        let json = serde_json::to_value(pr.to_json(&u)).unwrap();
        assert_eq!(json["rule"], "Trans");
        assert_eq!(json["concludes"], "{a} |3 {c}");
        let back: ProofJson = serde_json::from_value(json).unwrap();
        let parsed = Proof::from_json(&back, &u).unwrap();
        assert_eq!(parsed, pr);
        assert!(check_proof(&parsed, &p).is_ok());
    }
}
