//! Decision procedures: premise sets, minimum purchase budgets, atomic
//! entailment with proof or refutation, and satisfiability/validity of
//! formulas by assignment enumeration.

use std::fmt;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::formula::{Assignment, Atom, AttrSet, AttributeUniverse, Formula};
use crate::hypergraph::{Cut, EdgeSet, Hypergraph};
use crate::proofs::{build_proof, Proof};

pub const DEFAULT_ATOM_CAP: usize = 20;
pub const DEFAULT_EDGE_CAP: usize = 20;

/// An ordered, duplicate-free list of atoms over one universe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PremiseSet {
    universe: AttributeUniverse,
    atoms: Vec<Atom>,
}

impl PremiseSet {
    /// Keeps the first occurrence of repeated atoms.
    pub fn new(universe: AttributeUniverse, atoms: Vec<Atom>) -> Result<Self> {
        let mut out = PremiseSet {
            universe,
            atoms: Vec::with_capacity(atoms.len()),
        };
        for a in atoms {
            out.push(a)?;
        }
        Ok(out)
    }

    pub fn empty(universe: AttributeUniverse) -> Self {
        PremiseSet {
            universe,
            atoms: Vec::new(),
        }
    }

    /// Appends an atom unless already present. Returns whether it was added.
    pub fn push(&mut self, atom: Atom) -> Result<bool> {
        if atom.universe_len() != self.universe.len() {
            return Err(Error::UniverseMismatch(format!(
                "atom over {} attributes, premise set over {}",
                atom.universe_len(),
                self.universe.len()
            )));
        }
        if self.atoms.contains(&atom) {
            return Ok(false);
        }
        self.atoms.push(atom);
        Ok(true)
    }

    /// One atom per non-blank line; `#` starts a comment.
    pub fn parse(text: &str, universe: &AttributeUniverse) -> Result<Self> {
        let mut out = PremiseSet::empty(universe.clone());
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if !line.is_empty() {
                out.push(Atom::parse(line, universe)?)?;
            }
        }
        Ok(out)
    }

    pub fn universe(&self) -> &AttributeUniverse {
        &self.universe
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// One edge `⟨lhs, budget, rhs⟩` per premise; edge `i` is premise `i`.
pub fn canonical_hypergraph(premises: &PremiseSet) -> Hypergraph {
    let mut h = Hypergraph::new(premises.universe.clone());
    for a in &premises.atoms {
        h.add_edge(a.lhs.clone(), a.rhs.clone(), a.budget.clone());
    }
    h
}

/// Outcome of a minimum-budget query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MinBudget {
    Reachable { cost: Budget, edges: EdgeSet },
    Unreachable,
}

impl MinBudget {
    pub fn cost(&self) -> Option<&Budget> {
        match self {
            MinBudget::Reachable { cost, .. } => Some(cost),
            MinBudget::Unreachable => None,
        }
    }

    pub fn edges(&self) -> Option<&EdgeSet> {
        match self {
            MinBudget::Reachable { edges, .. } => Some(edges),
            MinBudget::Unreachable => None,
        }
    }

    /// True when the minimum exists and is at most `budget`.
    pub fn fits(&self, budget: &Budget) -> bool {
        self.cost().is_some_and(|c| c <= budget)
    }
}

impl fmt::Display for MinBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinBudget::Reachable { cost, .. } => write!(f, "{cost}"),
            MinBudget::Unreachable => f.write_str("unreachable"),
        }
    }
}

/// Exact `min { w(F) : B ⊆ closure(A, F) }` by branch and bound.
///
/// Zero-weight edges are always bought. Positive edges are branched on in
/// ascending `(weight, id)` order; the incumbent starts from a greedy run.
/// Exponential in the worst case.
pub fn min_budget(h: &Hypergraph, a: &AttrSet, b: &AttrSet) -> MinBudget {
    let m = h.edge_count();
    if b.is_subset(a) {
        return MinBudget::Reachable {
            cost: Budget::zero(),
            edges: EdgeSet::empty(m),
        };
    }
    if !b.is_subset(&h.closure(a, &h.all_edges())) {
        return MinBudget::Unreachable;
    }

    let mut free = EdgeSet::empty(m);
    let mut order: Vec<usize> = Vec::new();
    for e in h.edges() {
        if e.weight.is_zero() {
            free.insert(e.id);
        } else {
            order.push(e.id);
        }
    }
    order.sort_by(|&x, &y| h.edge(x).weight.cmp(&h.edge(y).weight).then(x.cmp(&y)));

    // suffix[i] = free ∪ order[i..]
    let mut suffix = vec![free.clone(); order.len() + 1];
    for i in (0..order.len()).rev() {
        suffix[i] = suffix[i + 1].clone();
        suffix[i].insert(order[i]);
    }

    let mut search = Search {
        h,
        a,
        b,
        order: &order,
        suffix: &suffix,
        best: greedy(h, a, b, &free, &order),
    };
    search.run(0, free, Budget::zero());
    let (cost, edges) = search.best.expect("reachable goal always has a solution");
    MinBudget::Reachable { cost, edges }
}

fn greedy(h: &Hypergraph, a: &AttrSet, b: &AttrSet, free: &EdgeSet, order: &[usize]) -> Option<(Budget, EdgeSet)> {
    let mut chosen = free.clone();
    let mut cost = Budget::zero();
    loop {
        let reached = h.closure(a, &chosen);
        if b.is_subset(&reached) {
            return Some((cost, chosen));
        }
        // order is sorted by weight, so the first hit is the cheapest
        let next = order.iter().copied().find(|&e| {
            let edge = h.edge(e);
            !chosen.contains(e) && edge.tails.is_subset(&reached) && !edge.heads.is_subset(&reached)
        })?;
        cost = cost + &h.edge(next).weight;
        chosen.insert(next);
    }
}

struct Search<'a> {
    h: &'a Hypergraph,
    a: &'a AttrSet,
    b: &'a AttrSet,
    order: &'a [usize],
    suffix: &'a [EdgeSet],
    best: Option<(Budget, EdgeSet)>,
}

impl Search<'_> {
    fn run(&mut self, i: usize, chosen: EdgeSet, spent: Budget) {
        let reached = self.h.closure(self.a, &chosen);
        if self.b.is_subset(&reached) {
            if self.best.as_ref().is_none_or(|(c, _)| &spent < c) {
                self.best = Some((spent, chosen));
            }
            return;
        }
        if i == self.order.len() {
            return;
        }
        // every completion buys at least one more edge, each weighing >= order[i]
        let e = self.order[i];
        let w = &self.h.edge(e).weight;
        if let Some((c, _)) = &self.best {
            if &(&spent + w) >= c {
                return;
            }
        }
        if !self
            .b
            .is_subset(&self.h.closure(self.a, &chosen.union(&self.suffix[i])))
        {
            return;
        }
        // an edge whose heads are already reached can never help
        if !self.h.edge(e).heads.is_subset(&reached) {
            let mut with = chosen.clone();
            with.insert(e);
            self.run(i + 1, with, &spent + w);
        }
        self.run(i + 1, chosen, spent);
    }
}

/// Exhaustive minimum over all `2^|E|` edge subsets. Test oracle.
pub fn min_budget_bruteforce(h: &Hypergraph, a: &AttrSet, b: &AttrSet, cap: usize) -> Result<MinBudget> {
    let m = h.edge_count();
    if m > cap {
        return Err(Error::cap("edges", cap, m));
    }
    let mut best: Option<(Budget, EdgeSet)> = None;
    let mut current = EdgeSet::empty(m);
    brute(h, a, b, 0, &mut current, Budget::zero(), &mut best);
    Ok(match best {
        Some((cost, edges)) => MinBudget::Reachable { cost, edges },
        None => MinBudget::Unreachable,
    })
}

fn brute(
    h: &Hypergraph,
    a: &AttrSet,
    b: &AttrSet,
    i: usize,
    current: &mut EdgeSet,
    spent: Budget,
    best: &mut Option<(Budget, EdgeSet)>,
) {
    if i == h.edge_count() {
        // the round-based fixpoint, independent of the counter algorithm
        let reached = h.partial_closures(a, current).pop().expect("at least A");
        if b.is_subset(&reached) && best.as_ref().is_none_or(|(c, _)| &spent < c) {
            *best = Some((spent, current.clone()));
        }
        return;
    }
    brute(h, a, b, i + 1, current, spent.clone(), best);
    current.insert(i);
    let w = &h.edge(i).weight;
    brute(h, a, b, i + 1, current, spent + w, best);
    current.remove(i);
}

/// All inclusion-maximal `F ⊆ E` with `w(F) <= budget`, in lexicographic
/// order of edge ids. Fails when more than `limit` sets would be produced.
pub fn maximal_affordable_sets(h: &Hypergraph, budget: &Budget, limit: usize) -> Result<Vec<EdgeSet>> {
    let m = h.edge_count();
    let mut out = Vec::new();
    let mut current = EdgeSet::empty(m);
    affordable(h, budget, 0, &mut current, Budget::zero(), &mut out, limit)?;
    Ok(out)
}

fn affordable(
    h: &Hypergraph,
    budget: &Budget,
    i: usize,
    current: &mut EdgeSet,
    spent: Budget,
    out: &mut Vec<EdgeSet>,
    limit: usize,
) -> Result<()> {
    if i == h.edge_count() {
        let maximal = h
            .edges()
            .iter()
            .all(|e| current.contains(e.id) || &spent + &e.weight > *budget);
        if maximal {
            if out.len() == limit {
                return Err(Error::cap("maximal affordable edge sets", limit, limit + 1));
            }
            out.push(current.clone());
        }
        return Ok(());
    }
    let w = &h.edge(i).weight;
    let with = &spent + w;
    if with <= *budget {
        current.insert(i);
        affordable(h, budget, i + 1, current, with, out, limit)?;
        current.remove(i);
    }
    affordable(h, budget, i + 1, current, spent, out, limit)
}

/// An affordable purchase and the reachability cut it induces. The goal's
/// right side meets `cut.right`, and no purchased edge crosses the cut.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockingCut {
    pub purchase: EdgeSet,
    pub cut: Cut,
}

/// Evidence that a goal is not entailed.
///
/// `blocking` has one entry per distinct closure among the maximal
/// affordable purchases, so every affordable purchase is covered. It is
/// left empty when that enumeration exceeds its limit; `min_budget` alone
/// then carries the refutation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refutation {
    pub min_budget: MinBudget,
    pub blocking: Vec<BlockingCut>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EntailmentAnswer {
    Proved {
        proof: Proof,
        witness: EdgeSet,
        cost: Budget,
    },
    Refuted(Refutation),
}

impl EntailmentAnswer {
    pub fn is_yes(&self) -> bool {
        matches!(self, EntailmentAnswer::Proved { .. })
    }
}

const BLOCKING_LIMIT: usize = 4096;

/// Decides `premises ⊢ goal` and attaches a proof or a refutation.
pub fn entails(premises: &PremiseSet, goal: &Atom) -> Result<EntailmentAnswer> {
    if goal.universe_len() != premises.universe.len() {
        return Err(Error::UniverseMismatch(
            "goal and premises use different universes".into(),
        ));
    }
    let h = canonical_hypergraph(premises);
    let best = min_budget(&h, &goal.lhs, &goal.rhs);
    match best {
        MinBudget::Reachable { cost, edges } if cost <= goal.budget => {
            let trace = h.closure_trace(&goal.lhs, &edges);
            let proof = build_proof(premises, goal, &trace, &edges)?;
            Ok(EntailmentAnswer::Proved {
                proof,
                witness: edges,
                cost,
            })
        }
        other => Ok(EntailmentAnswer::Refuted(Refutation {
            blocking: blocking_cuts(&h, goal),
            min_budget: other,
        })),
    }
}

fn blocking_cuts(h: &Hypergraph, goal: &Atom) -> Vec<BlockingCut> {
    let Ok(sets) = maximal_affordable_sets(h, &goal.budget, BLOCKING_LIMIT) else {
        return Vec::new();
    };
    let mut out: Vec<BlockingCut> = Vec::new();
    for f in sets {
        let cut = h.reachability_cut(&goal.lhs, &f);
        if !out.iter().any(|bc| bc.cut == cut) {
            out.push(BlockingCut { purchase: f, cut });
        }
    }
    out
}

/// Independent recheck of a refutation: every listed purchase is
/// affordable and blocked, and every maximal affordable purchase (found by
/// exhaustive enumeration) has the closure of a listed one.
pub fn verify_refutation(h: &Hypergraph, goal: &Atom, r: &Refutation, cap: usize) -> std::result::Result<(), String> {
    if r.min_budget.fits(&goal.budget) {
        return Err(format!("minimum budget {} fits the goal budget", r.min_budget));
    }
    for (i, bc) in r.blocking.iter().enumerate() {
        if h.weight(&bc.purchase) > goal.budget {
            return Err(format!("purchase {i} exceeds the budget"));
        }
        if !bc.cut.is_partition() {
            return Err(format!("cut {i} is not a partition"));
        }
        let reached = h.partial_closures(&goal.lhs, &bc.purchase).pop().expect("at least A");
        if reached != bc.cut.left {
            return Err(format!("cut {i} is not the reachability cut of its purchase"));
        }
        if goal.rhs.is_subset(&bc.cut.left) {
            return Err(format!("cut {i} does not separate the goal"));
        }
        if !bc.purchase.is_disjoint(&h.crossing_edges(&bc.cut)) {
            return Err(format!("purchase {i} buys a crossing edge"));
        }
    }
    let m = h.edge_count();
    if m > cap || r.blocking.is_empty() {
        return Ok(());
    }
    for mask in 0u64..(1u64 << m) {
        let f = EdgeSet::from_ids(m, (0..m).filter(|i| mask >> i & 1 == 1));
        if h.weight(&f) > goal.budget {
            continue;
        }
        let reached = h.partial_closures(&goal.lhs, &f).pop().expect("at least A");
        if goal.rhs.is_subset(&reached) {
            return Err(format!("purchase {} reaches the goal", h.format_edges(&f)));
        }
        if !r.blocking.iter().any(|bc| reached.is_subset(&bc.cut.left)) {
            return Err(format!("purchase {} is not covered by any cut", h.format_edges(&f)));
        }
    }
    Ok(())
}

/// Truth of `f` in `h`: an atom holds iff its minimum budget fits.
pub fn hyper_satisfies(h: &Hypergraph, f: &Formula) -> bool {
    let mut eval = |a: &Atom| -> std::result::Result<bool, std::convert::Infallible> {
        Ok(min_budget(h, &a.lhs, &a.rhs).fits(&a.budget))
    };
    match f.eval_with(&mut eval) {
        Ok(v) => v,
        Err(never) => match never {},
    }
}

/// A realizable assignment together with its canonical hypergraph.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub assignment: Assignment,
    pub premises: PremiseSet,
    pub hypergraph: Hypergraph,
}

#[derive(Clone, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum SatAnswer {
    Satisfiable(Witness),
    Unsatisfiable,
}

impl SatAnswer {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatAnswer::Satisfiable(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum ValidityAnswer {
    Valid,
    /// A falsifying witness.
    Invalid(Witness),
}

impl ValidityAnswer {
    pub fn is_valid(&self) -> bool {
        matches!(self, ValidityAnswer::Valid)
    }
}

/// Searches for a realizable assignment making `f` true.
///
/// `σ` is realizable when no false atom follows from the true ones. The
/// enumeration runs over masks in increasing order, atom `i` taking bit `i`
/// of the sorted atom list.
pub fn decide_satisfiable(f: &Formula, universe: &AttributeUniverse, atom_cap: usize) -> Result<SatAnswer> {
    if f.universe_len() != universe.len() {
        return Err(Error::UniverseMismatch("formula and universe differ in size".into()));
    }
    let atoms = f.atoms();
    if atoms.len() > atom_cap {
        return Err(Error::cap("atoms", atom_cap, atoms.len()));
    }
    for mask in 0u64..(1u64 << atoms.len()) {
        let sigma = Assignment::from_mask(&atoms, mask);
        if !f.evaluate(&sigma)? {
            continue;
        }
        let premises = PremiseSet::new(universe.clone(), sigma.true_atoms())?;
        let h = canonical_hypergraph(&premises);
        let realizable = sigma
            .false_atoms()
            .iter()
            .all(|t| !min_budget(&h, &t.lhs, &t.rhs).fits(&t.budget));
        if realizable {
            return Ok(SatAnswer::Satisfiable(Witness {
                assignment: sigma,
                premises,
                hypergraph: h,
            }));
        }
    }
    Ok(SatAnswer::Unsatisfiable)
}

/// `f` is valid iff `¬f` is unsatisfiable.
pub fn decide_valid(f: &Formula, universe: &AttributeUniverse, atom_cap: usize) -> Result<ValidityAnswer> {
    Ok(
        match decide_satisfiable(&Formula::not(f.clone()), universe, atom_cap)? {
            SatAnswer::Satisfiable(w) => ValidityAnswer::Invalid(w),
            SatAnswer::Unsatisfiable => ValidityAnswer::Valid,
        },
    )
}
