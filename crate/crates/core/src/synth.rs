//! The path-encoded informational model of a hypergraph.
//!
//! Attributes are the vertices and edges of `H`. Vertices cost `+inf`,
//! edges cost their weight. Each attribute's value is a bit per path
//! starting at it, and the legitimate vectors are those satisfying, for
//! every edge-initiated path `π = ⟨e1, v1, rest⟩`,
//!
//! ```text
//! f_e1(π) + Σ_{u ∈ in(e1)} f_u(⟨u, e1, v1, rest⟩) = f_v1(⟨v1, rest⟩)  (mod 2)
//! ```
//!
//! Cyclic hypergraphs have infinitely many paths, so vectors are handled
//! symbolically (a coordinate oracle checked up to a depth). Acyclic ones
//! are materialized exactly as a GF(2) subspace.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use crate::budget::{Budget, ExtendedBudget};
use crate::entailment::{entails, hyper_satisfies, maximal_affordable_sets, min_budget, EntailmentAnswer, PremiseSet};
use crate::error::{Error, Result};
use crate::formula::{Atom, AttrSet, AttributeUniverse, Formula};
use crate::gf2;
use crate::hypergraph::{Cut, EdgeSet, Hypergraph};
use crate::infomodel::{self, InfoModel, InformationalModel};
use crate::proofs::Proof;

/// Where a path starts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    Vertex(usize),
    Edge(usize),
}

/// `⟨v0, e1, v1, ..., en, vn⟩` when `head` is set, `⟨e1, v1, ..., en, vn⟩`
/// otherwise. Edge-initiated paths have at least one link.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    pub head: Option<usize>,
    /// `(e_k, v_k)` pairs.
    pub links: Vec<(usize, usize)>,
}

impl Path {
    pub fn vertex(v: usize) -> Path {
        Path {
            head: Some(v),
            links: Vec::new(),
        }
    }

    pub fn origin(&self) -> Origin {
        match self.head {
            Some(v) => Origin::Vertex(v),
            None => Origin::Edge(self.links[0].0),
        }
    }

    /// Final vertex.
    pub fn end(&self) -> usize {
        match self.links.last() {
            Some(&(_, v)) => v,
            None => self.head.expect("a path ends at a vertex"),
        }
    }

    pub fn edge_count(&self) -> usize {
        self.links.len()
    }

    /// `⟨u, e1, v1, ...⟩` from an edge-initiated `⟨e1, v1, ...⟩`.
    pub fn with_head(&self, u: usize) -> Path {
        debug_assert!(self.head.is_none());
        Path {
            head: Some(u),
            links: self.links.clone(),
        }
    }

    /// `⟨v1, rest⟩` from an edge-initiated `⟨e1, v1, rest⟩`.
    pub fn after_first_edge(&self) -> Path {
        debug_assert!(self.head.is_none());
        Path {
            head: Some(self.links[0].1),
            links: self.links[1..].to_vec(),
        }
    }

    pub fn is_valid(&self, h: &Hypergraph) -> bool {
        if self.head.is_none() && self.links.is_empty() {
            return false;
        }
        let mut prev = self.head;
        for &(e, v) in &self.links {
            if e >= h.edge_count() || v >= h.vertex_count() {
                return false;
            }
            let edge = h.edge(e);
            if prev.is_some_and(|p| !edge.tails.contains(p)) || !edge.heads.contains(v) {
                return false;
            }
            prev = Some(v);
        }
        self.head.is_none_or(|v| v < h.vertex_count())
    }

    pub fn display<'a>(&'a self, h: &'a Hypergraph) -> PathDisplay<'a> {
        PathDisplay { path: self, h }
    }
}

pub struct PathDisplay<'a> {
    path: &'a Path,
    h: &'a Hypergraph,
}

impl fmt::Display for PathDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.h.vertices();
        let mut parts: Vec<String> = Vec::new();
        if let Some(v) = self.path.head {
            parts.push(names.name(v).to_string());
        }
        for &(e, v) in &self.path.links {
            parts.push(self.h.edge_label(e));
            parts.push(names.name(v).to_string());
        }
        write!(f, "<{}>", parts.join(","))
    }
}

/// `I_H` for a hypergraph `H`, with a depth bound for symbolic checks.
#[derive(Clone, Debug)]
pub struct PathModel {
    h: Hypergraph,
    universe: AttributeUniverse,
    costs: Vec<ExtendedBudget>,
    depth: usize,
    // vertex -> edges having it as a tail, ascending
    forward: Vec<Vec<usize>>,
}

/// `2(|V|+|E|)+2`.
pub fn default_depth(h: &Hypergraph) -> usize {
    2 * (h.vertex_count() + h.edge_count()) + 2
}

/// Builds the path model. Attribute `i < |V|` is vertex `i` (named
/// `v:<name>`); attribute `|V| + j` is edge `j` (named `e:<j>`).
pub fn synthesize_model(h: &Hypergraph, depth: usize) -> Result<PathModel> {
    if depth == 0 {
        return Err(Error::Precondition("depth must be at least 1".into()));
    }
    let n = h.vertex_count();
    let mut names: Vec<String> = h.vertices().names().iter().map(|v| format!("v:{v}")).collect();
    names.extend((0..h.edge_count()).map(|j| format!("e:{j}")));
    let universe = AttributeUniverse::new(names)?;
    let mut costs = vec![ExtendedBudget::Infinite; n];
    costs.extend(h.edges().iter().map(|e| ExtendedBudget::Finite(e.weight.clone())));
    let mut forward = vec![Vec::new(); n];
    for e in h.edges() {
        for v in e.tails.iter() {
            forward[v].push(e.id);
        }
    }
    Ok(PathModel {
        h: h.clone(),
        universe,
        costs,
        depth,
        forward,
    })
}

impl PathModel {
    pub fn hypergraph(&self) -> &Hypergraph {
        &self.h
    }

    pub fn universe(&self) -> &AttributeUniverse {
        &self.universe
    }

    pub fn costs(&self) -> &[ExtendedBudget] {
        &self.costs
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn origin_attribute(&self, o: Origin) -> usize {
        match o {
            Origin::Vertex(v) => v,
            Origin::Edge(e) => self.h.vertex_count() + e,
        }
    }

    pub fn attribute_origin(&self, a: usize) -> Origin {
        let n = self.h.vertex_count();
        if a < n {
            Origin::Vertex(a)
        } else {
            Origin::Edge(a - n)
        }
    }

    /// Vertex set `A` as an attribute set.
    pub fn lift_vertices(&self, a: &AttrSet) -> AttrSet {
        a.widen(self.universe.len())
    }

    /// Edge set `F` as an attribute set.
    pub fn lift_edges(&self, f: &EdgeSet) -> AttrSet {
        let n = self.h.vertex_count();
        AttrSet::from_indices(self.universe.len(), f.iter().map(|e| n + e))
    }

    pub fn lift_atom(&self, t: &Atom) -> Atom {
        Atom::new(self.lift_vertices(&t.lhs), self.lift_vertices(&t.rhs), t.budget.clone())
    }

    /// Calls `visit` on every path from `origin` with at most `maxlen` edges,
    /// depth first, edges and heads ascending. Stops early with an error
    /// once `limit` paths have been produced.
    pub fn visit_paths(
        &self,
        origin: Origin,
        maxlen: usize,
        limit: usize,
        visit: &mut dyn FnMut(&Path),
    ) -> Result<usize> {
        let mut count = 0;
        match origin {
            Origin::Vertex(v) => {
                let mut p = Path::vertex(v);
                self.extend(&mut p, maxlen, limit, &mut count, visit)?;
            }
            Origin::Edge(e) => {
                if maxlen == 0 {
                    return Ok(0);
                }
                for u in self.h.edge(e).heads.iter() {
                    let mut p = Path {
                        head: None,
                        links: vec![(e, u)],
                    };
                    self.extend(&mut p, maxlen, limit, &mut count, visit)?;
                }
            }
        }
        Ok(count)
    }

    fn extend(
        &self,
        p: &mut Path,
        maxlen: usize,
        limit: usize,
        count: &mut usize,
        visit: &mut dyn FnMut(&Path),
    ) -> Result<()> {
        if *count == limit {
            return Err(Error::cap("paths", limit, limit + 1));
        }
        *count += 1;
        visit(p);
        if p.edge_count() == maxlen {
            return Ok(());
        }
        let last = p.end();
        for &e in &self.forward[last] {
            for u in self.h.edge(e).heads.iter() {
                p.links.push((e, u));
                self.extend(p, maxlen, limit, count, visit)?;
                p.links.pop();
            }
        }
        Ok(())
    }
}

/// All paths from `origin` with at most `maxlen` edges, in visiting order.
pub fn enumerate_paths(pm: &PathModel, origin: Origin, maxlen: usize) -> Vec<Path> {
    let mut out = Vec::new();
    pm.visit_paths(origin, maxlen, usize::MAX, &mut |p| out.push(p.clone()))
        .expect("no limit");
    out
}

/// A cut, a root on its right side, and one tail `κ(e)` on the right side
/// for each non-crossing edge with a head on the right side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChoiceFunction {
    pub cut: Cut,
    pub root: usize,
    pub crossing: EdgeSet,
    pub kappa: Vec<Option<usize>>,
}

/// `κ(e)` is the least vertex of `in(e) ∩ right`.
pub fn choice_function(h: &Hypergraph, cut: &Cut, root: usize) -> Result<ChoiceFunction> {
    if !cut.is_partition() || cut.left.universe_len() != h.vertex_count() {
        return Err(Error::Precondition("cut is not a partition of the vertices".into()));
    }
    if !cut.right.contains(root) {
        return Err(Error::Precondition("root must lie on the right side of the cut".into()));
    }
    let crossing = h.crossing_edges(cut);
    let kappa = h
        .edges()
        .iter()
        .map(|e| {
            if crossing.contains(e.id) || !e.heads.intersects(&cut.right) {
                None
            } else {
                let k = e.tails.intersection(&cut.right).iter().next();
                debug_assert!(k.is_some(), "a non-crossing edge into the right side has a tail there");
                k
            }
        })
        .collect();
    Ok(ChoiceFunction {
        cut: cut.clone(),
        root,
        crossing,
        kappa,
    })
}

/// Membership in the cut-limited inverted tree rooted at `cf.root`, by one
/// scan: the path ends at the root, stays on the right side, and every
/// vertex preceding an edge is that edge's chosen tail (so the edge is not
/// crossing). A leading edge is unconstrained.
pub fn tree_membership(path: &Path, cf: &ChoiceFunction) -> bool {
    if path.end() != cf.root {
        return false;
    }
    let right = &cf.cut.right;
    if path.head.is_some_and(|v| !right.contains(v)) {
        return false;
    }
    let mut prev = path.head;
    for &(e, v) in &path.links {
        if !right.contains(v) {
            return false;
        }
        if let Some(p) = prev {
            if cf.kappa[e] != Some(p) {
                return false;
            }
        }
        prev = Some(v);
    }
    true
}

/// A legitimate-vector candidate given by a coordinate oracle: the zero
/// vector, optionally flipped along a tree, with extra single-coordinate
/// toggles (used to corrupt vectors in tests).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolicVector {
    pub flip: Option<ChoiceFunction>,
    pub toggles: BTreeSet<Path>,
}

impl SymbolicVector {
    pub fn zero() -> Self {
        SymbolicVector::default()
    }

    pub fn toggled(mut self, p: Path) -> Self {
        if !self.toggles.remove(&p) {
            self.toggles.insert(p);
        }
        self
    }

    /// `f_a(π)` where `a` is the origin of `π`.
    pub fn value(&self, path: &Path) -> bool {
        let base = self.flip.as_ref().is_some_and(|cf| {
            let flippable = match path.origin() {
                Origin::Vertex(_) => true,
                Origin::Edge(e) => cf.crossing.contains(e),
            };
            flippable && tree_membership(path, cf)
        });
        base ^ self.toggles.contains(path)
    }
}

/// The zero vector flipped along the tree of `cf`.
pub fn flip_vector(cf: ChoiceFunction) -> SymbolicVector {
    SymbolicVector {
        flip: Some(cf),
        toggles: BTreeSet::new(),
    }
}

fn equation_holds(pm: &PathModel, v: &SymbolicVector, pi: &Path) -> bool {
    let e1 = pi.links[0].0;
    let mut lhs = v.value(pi);
    for u in pm.h.edge(e1).tails.iter() {
        lhs ^= v.value(&pi.with_head(u));
    }
    lhs == v.value(&pi.after_first_edge())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckMode {
    Exhaustive,
    Sampled { seed: u64, samples: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationReport {
    pub mode: CheckMode,
    pub maxlen: usize,
    pub checked: usize,
    /// Edge-initiated paths whose equation fails, sorted.
    pub violations: Vec<Path>,
}

impl EquationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the equation of every edge-initiated path with at most `maxlen`
/// edges. Fails once more than `limit` paths would be examined.
pub fn verify_equations(pm: &PathModel, v: &SymbolicVector, maxlen: usize, limit: usize) -> Result<EquationReport> {
    let mut violations = Vec::new();
    let mut checked = 0;
    for e in 0..pm.h.edge_count() {
        let budget = limit - checked;
        checked += pm.visit_paths(Origin::Edge(e), maxlen, budget, &mut |pi| {
            if !equation_holds(pm, v, pi) {
                violations.push(pi.clone());
            }
        })?;
    }
    violations.sort();
    Ok(EquationReport {
        mode: CheckMode::Exhaustive,
        maxlen,
        checked,
        violations,
    })
}

/// Checks equations on `samples` random forward walks of at most `maxlen`
/// edges, each starting at a uniformly chosen edge.
pub fn verify_equations_sampled(
    pm: &PathModel,
    v: &SymbolicVector,
    maxlen: usize,
    samples: usize,
    seed: u64,
) -> EquationReport {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut violations = BTreeSet::new();
    let mut checked = 0;
    let m = pm.h.edge_count();
    if m > 0 && maxlen > 0 {
        for _ in 0..samples {
            let e = rng.gen_range(0..m);
            let heads: Vec<usize> = pm.h.edge(e).heads.iter().collect();
            let Some(&u) = heads.choose(&mut rng) else { continue };
            let mut pi = Path {
                head: None,
                links: vec![(e, u)],
            };
            let len = rng.gen_range(1..=maxlen);
            while pi.edge_count() < len {
                let steps: Vec<(usize, usize)> = pm.forward[pi.end()]
                    .iter()
                    .flat_map(|&f| pm.h.edge(f).heads.iter().map(move |w| (f, w)))
                    .collect();
                let Some(&step) = steps.choose(&mut rng) else { break };
                pi.links.push(step);
            }
            checked += 1;
            if !equation_holds(pm, v, &pi) {
                violations.insert(pi);
            }
        }
    }
    EquationReport {
        mode: CheckMode::Sampled { seed, samples },
        maxlen,
        checked,
        violations: violations.into_iter().collect(),
    }
}

/// Structural facts about the pair `(0, flip)` checked on every coordinate
/// path up to the depth: left vertices and non-crossing edges untouched,
/// the root's trivial path flipped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureReport {
    pub left_vertices_unchanged: bool,
    pub non_crossing_edges_unchanged: bool,
    pub root_differs: bool,
    pub paths_examined: usize,
}

impl StructureReport {
    pub fn ok(&self) -> bool {
        self.left_vertices_unchanged && self.non_crossing_edges_unchanged && self.root_differs
    }
}

pub fn check_structure(pm: &PathModel, flip: &SymbolicVector, maxlen: usize, limit: usize) -> Result<StructureReport> {
    let cf = flip
        .flip
        .as_ref()
        .ok_or_else(|| Error::Precondition("structure check needs a flip vector".into()))?;
    let mut report = StructureReport {
        left_vertices_unchanged: true,
        non_crossing_edges_unchanged: true,
        root_differs: flip.value(&Path::vertex(cf.root)),
        paths_examined: 0,
    };
    for u in cf.cut.left.iter() {
        let mut changed = false;
        report.paths_examined += pm.visit_paths(Origin::Vertex(u), maxlen, limit, &mut |p| changed |= flip.value(p))?;
        report.left_vertices_unchanged &= !changed;
    }
    for e in (0..pm.h.edge_count()).filter(|&e| !cf.crossing.contains(e)) {
        let mut changed = false;
        report.paths_examined += pm.visit_paths(Origin::Edge(e), maxlen, limit, &mut |p| changed |= flip.value(p))?;
        report.non_crossing_edges_unchanged &= !changed;
    }
    Ok(report)
}

pub const DEFAULT_COORDINATE_CAP: usize = 4096;
pub const EXPLICIT_DIMENSION_CAP: usize = 12;

/// The exact model of an acyclic hypergraph: every path is a coordinate
/// and the legitimate vectors form the GF(2) subspace cut out by the
/// equations.
#[derive(Clone, Debug)]
pub struct LinearModel {
    universe: AttributeUniverse,
    costs: Vec<ExtendedBudget>,
    coordinates: Vec<Path>,
    /// attribute -> its coordinate columns
    columns: Vec<Vec<usize>>,
    equations: usize,
    basis: Vec<FixedBitSet>,
}

pub fn materialize_acyclic(pm: &PathModel, coordinate_cap: usize) -> Result<LinearModel> {
    let h = &pm.h;
    if let Some(v) = h.find_cycle() {
        return Err(Error::Cyclic(h.vertices().name(v).to_string()));
    }
    // an acyclic path repeats no vertex, hence has at most |V|-1 edges
    let maxlen = h.vertex_count();
    let mut coordinates: Vec<Path> = Vec::new();
    let mut columns: Vec<Vec<usize>> = vec![Vec::new(); pm.universe.len()];
    let attrs = (0..h.vertex_count())
        .map(Origin::Vertex)
        .chain((0..h.edge_count()).map(Origin::Edge));
    for origin in attrs {
        let a = pm.origin_attribute(origin);
        let remaining = coordinate_cap.saturating_sub(coordinates.len());
        pm.visit_paths(origin, maxlen, remaining, &mut |p| {
            columns[a].push(coordinates.len());
            coordinates.push(p.clone());
        })
        .map_err(|_| Error::cap("path coordinates", coordinate_cap, coordinate_cap + 1))?;
    }
    let index: HashMap<&Path, usize> = coordinates.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let ncols = coordinates.len();
    let mut rows = Vec::new();
    for p in coordinates.iter().filter(|p| p.head.is_none()) {
        let mut row = FixedBitSet::with_capacity(ncols);
        row.toggle(index[p]);
        for u in h.edge(p.links[0].0).tails.iter() {
            row.toggle(index[&p.with_head(u)]);
        }
        row.toggle(index[&p.after_first_edge()]);
        rows.push(row);
    }
    let basis = gf2::nullspace(&rows, ncols);
    Ok(LinearModel {
        universe: pm.universe.clone(),
        costs: pm.costs.clone(),
        coordinates,
        columns,
        equations: rows.len(),
        basis,
    })
}

impl LinearModel {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn coordinate_count(&self) -> usize {
        self.coordinates.len()
    }

    pub fn equation_count(&self) -> usize {
        self.equations
    }

    pub fn coordinates(&self) -> &[Path] {
        &self.coordinates
    }

    pub fn basis(&self) -> &[FixedBitSet] {
        &self.basis
    }

    pub fn columns_of(&self, attrs: &AttrSet) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.coordinates.len());
        for a in attrs.iter() {
            for &c in &self.columns[a] {
                out.insert(c);
            }
        }
        out
    }

    pub fn truncate_costs(&self, r: &Budget) -> LinearModel {
        let costs = self
            .costs
            .iter()
            .map(|c| match c.finite() {
                Some(b) if b <= r => c.clone(),
                _ => ExtendedBudget::Finite(r.clone()),
            })
            .collect();
        LinearModel { costs, ..self.clone() }
    }

    /// All `2^dim` vectors as an explicit model, each attribute's value the
    /// bit string of its coordinates. Only for small dimensions.
    pub fn to_info_model(&self) -> Result<InfoModel> {
        if self.dimension() > EXPLICIT_DIMENSION_CAP {
            return Err(Error::cap(
                "explicit model dimension",
                EXPLICIT_DIMENSION_CAP,
                self.dimension(),
            ));
        }
        let rows = (0u32..1 << self.dimension()).map(|mask| {
            let mut x = FixedBitSet::with_capacity(self.coordinates.len());
            for (i, b) in self.basis.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    x.symmetric_difference_with(b);
                }
            }
            self.columns
                .iter()
                .map(|cols| {
                    let s: String = cols.iter().map(|&c| if x.contains(c) { '1' } else { '0' }).collect();
                    if s.is_empty() {
                        "-".to_string()
                    } else {
                        s
                    }
                })
                .collect::<Vec<String>>()
        });
        InfoModel::new(self.universe.clone(), self.costs.clone(), rows)
    }
}

impl InformationalModel for LinearModel {
    fn universe(&self) -> &AttributeUniverse {
        &self.universe
    }

    fn cost(&self, attr: usize) -> &ExtendedBudget {
        &self.costs[attr]
    }

    fn determines(&self, lhs: &AttrSet, rhs: &AttrSet) -> bool {
        gf2::subspace_fd_check(&self.basis, &self.columns_of(lhs), &self.columns_of(rhs))
    }
}

/// One flip witness refuting a false atom for one maximal affordable
/// purchase.
#[derive(Clone, Debug)]
pub struct FlipWitness {
    pub purchase: EdgeSet,
    pub choice: ChoiceFunction,
    pub purchase_avoids_crossing: bool,
    pub lhs_on_left: bool,
    pub zero_equations: EquationReport,
    pub flip_equations: EquationReport,
    pub structure: StructureReport,
}

impl FlipWitness {
    pub fn ok(&self) -> bool {
        self.purchase_avoids_crossing
            && self.lhs_on_left
            && self.zero_equations.ok()
            && self.flip_equations.ok()
            && self.structure.ok()
    }
}

#[derive(Clone, Debug)]
pub enum AtomCertificate {
    Holds {
        proof: Proof,
    },
    Fails {
        witnesses: Vec<FlipWitness>,
        truncated: bool,
    },
}

#[derive(Clone, Debug)]
pub struct AtomReport {
    pub atom: Atom,
    pub holds_in_hypergraph: bool,
    pub certificate: AtomCertificate,
}

#[derive(Clone, Debug)]
pub struct MaterializedReport {
    pub model: LinearModel,
    /// `(atom, value in the model)` for every atom of the formula.
    pub evaluations: Vec<(Atom, bool)>,
    pub formula_value: bool,
}

#[derive(Clone, Debug)]
pub struct CounterexamplePackage {
    pub hypergraph: Hypergraph,
    pub depth: usize,
    pub atoms: Vec<AtomReport>,
    pub materialized: Option<MaterializedReport>,
}

#[derive(Clone, Debug)]
pub struct CounterexampleOptions {
    pub depth: Option<usize>,
    /// Per-check path budget before switching to sampling.
    pub path_limit: usize,
    pub samples: usize,
    pub seed: u64,
    pub purchase_limit: usize,
    pub materialize: bool,
    pub coordinate_cap: usize,
}

impl Default for CounterexampleOptions {
    fn default() -> Self {
        CounterexampleOptions {
            depth: None,
            path_limit: 200_000,
            samples: 20_000,
            seed: 0,
            purchase_limit: 256,
            materialize: true,
            coordinate_cap: DEFAULT_COORDINATE_CAP,
        }
    }
}

fn equations_with_fallback(pm: &PathModel, v: &SymbolicVector, opts: &CounterexampleOptions) -> EquationReport {
    match verify_equations(pm, v, pm.depth, opts.path_limit) {
        Ok(r) => r,
        Err(_) => verify_equations_sampled(pm, v, pm.depth, opts.samples, opts.seed),
    }
}

/// Builds witnesses that `I_H` falsifies `f`, given that `H` does.
///
/// Atoms true in `H` get proofs from the premises `in(e) |w(e) out(e)`.
/// Each false atom `A |p B` gets, per maximal purchase `F` with
/// `w(F) <= p` (distinct closures only), the cut `(closure(A,F), rest)`,
/// a root in `B` beyond the closure, and the pair `(0, flip)`, which agrees
/// on `A ∪ F` yet differs at the root.
pub fn counterexample_for(h: &Hypergraph, f: &Formula, opts: &CounterexampleOptions) -> Result<CounterexamplePackage> {
    if f.universe_len() != h.vertex_count() {
        return Err(Error::UniverseMismatch(
            "formula and hypergraph differ in universe size".into(),
        ));
    }
    if hyper_satisfies(h, f) {
        return Err(Error::Precondition("the formula holds in the hypergraph".into()));
    }
    let depth = opts.depth.unwrap_or_else(|| default_depth(h));
    let pm = synthesize_model(h, depth)?;
    let premises = PremiseSet::new(
        h.vertices().clone(),
        h.edges()
            .iter()
            .map(|e| Atom::new(e.tails.clone(), e.heads.clone(), e.weight.clone()))
            .collect(),
    )?;

    let mut reports = Vec::new();
    for atom in f.atoms() {
        let holds = min_budget(h, &atom.lhs, &atom.rhs).fits(&atom.budget);
        let certificate = if holds {
            match entails(&premises, &atom)? {
                EntailmentAnswer::Proved { proof, .. } => AtomCertificate::Holds { proof },
                EntailmentAnswer::Refuted(_) => {
                    return Err(Error::Precondition("premise set disagrees with the hypergraph".into()))
                }
            }
        } else {
            let (purchases, truncated) = match maximal_affordable_sets(h, &atom.budget, opts.purchase_limit) {
                Ok(p) => (p, false),
                Err(e) if e.is_cap_exceeded() => (Vec::new(), true),
                Err(e) => return Err(e),
            };
            let mut witnesses: Vec<FlipWitness> = Vec::new();
            for purchase in purchases {
                let cut = h.reachability_cut(&atom.lhs, &purchase);
                if witnesses.iter().any(|w| w.choice.cut == cut) {
                    continue;
                }
                let root = atom
                    .rhs
                    .intersection(&cut.right)
                    .iter()
                    .next()
                    .expect("false atom leaves part of B unreached");
                let choice = choice_function(h, &cut, root)?;
                let flip = flip_vector(choice.clone());
                let structure = check_structure(&pm, &flip, depth, opts.path_limit).unwrap_or(StructureReport {
                    left_vertices_unchanged: false,
                    non_crossing_edges_unchanged: false,
                    root_differs: flip.value(&Path::vertex(root)),
                    paths_examined: 0,
                });
                witnesses.push(FlipWitness {
                    purchase_avoids_crossing: purchase.is_disjoint(&choice.crossing),
                    lhs_on_left: atom.lhs.is_subset(&cut.left),
                    zero_equations: equations_with_fallback(&pm, &SymbolicVector::zero(), opts),
                    flip_equations: equations_with_fallback(&pm, &flip, opts),
                    structure,
                    purchase,
                    choice,
                });
            }
            AtomCertificate::Fails { witnesses, truncated }
        };
        reports.push(AtomReport {
            atom,
            holds_in_hypergraph: holds,
            certificate,
        });
    }

    let materialized = if opts.materialize && h.is_acyclic() {
        match materialize_acyclic(&pm, opts.coordinate_cap) {
            Ok(model) => {
                let evaluations = reports
                    .iter()
                    .map(|r| {
                        let v =
                            infomodel::eval_atom(&model, &pm.lift_atom(&r.atom), infomodel::DEFAULT_AFFORDABLE_CAP)?;
                        Ok((r.atom.clone(), v))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let lifted = f.map_sets(&|s| pm.lift_vertices(s));
                let formula_value = infomodel::eval_formula(&model, &lifted, infomodel::DEFAULT_AFFORDABLE_CAP)?;
                Some(MaterializedReport {
                    model,
                    evaluations,
                    formula_value,
                })
            }
            Err(e) if e.is_cap_exceeded() => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    Ok(CounterexamplePackage {
        hypergraph: h.clone(),
        depth,
        atoms: reports,
        materialized,
    })
}

impl CounterexamplePackage {
    /// Every witness passed its checks, every false atom has a witness, and
    /// a materialized model (if any) agrees with the hypergraph and
    /// falsifies the formula.
    pub fn verified(&self) -> bool {
        let atoms_ok = self.atoms.iter().all(|r| match &r.certificate {
            AtomCertificate::Holds { .. } => r.holds_in_hypergraph,
            AtomCertificate::Fails { witnesses, truncated } => {
                !r.holds_in_hypergraph
                    && (*truncated || (!witnesses.is_empty() && witnesses.iter().all(FlipWitness::ok)))
            }
        });
        let model_ok = self.materialized.as_ref().is_none_or(|m| {
            !m.formula_value
                && m.evaluations
                    .iter()
                    .zip(&self.atoms)
                    .all(|((_, v), r)| *v == r.holds_in_hypergraph)
        });
        atoms_ok && model_ok
    }

    pub fn to_json(&self) -> Value {
        let h = &self.hypergraph;
        let u = h.vertices();
        let atoms: Vec<Value> = self
            .atoms
            .iter()
            .map(|r| {
                let atom = r.atom.display(u).to_string();
                match &r.certificate {
                    AtomCertificate::Holds { proof } => json!({
                        "atom": atom,
                        "holds": true,
                        "proof": proof.to_json(u),
                    }),
                    AtomCertificate::Fails { witnesses, truncated } => json!({
                        "atom": atom,
                        "holds": false,
                        "truncated": truncated,
                        "witnesses": witnesses.iter().map(|w| witness_json(h, w)).collect::<Vec<_>>(),
                    }),
                }
            })
            .collect();
        let mut out = json!({
            "hypergraph": h.to_json(),
            "depth": self.depth,
            "verified": self.verified(),
            "atoms": atoms,
        });
        if let Some(m) = &self.materialized {
            let mut mat = json!({
                "coordinates": m.model.coordinate_count(),
                "equations": m.model.equation_count(),
                "dimension": m.model.dimension(),
                "formula": m.formula_value,
                "evaluations": m.evaluations.iter().map(|(a, v)| json!({"atom": a.display(u).to_string(), "value": v})).collect::<Vec<_>>(),
            });
            if let Ok(explicit) = m.model.to_info_model() {
                mat["model"] = serde_json::to_value(explicit.to_json()).expect("model json");
            }
            out["materialized"] = mat;
        }
        out
    }
}

fn report_json(h: &Hypergraph, r: &EquationReport) -> Value {
    let mode = match &r.mode {
        CheckMode::Exhaustive => json!("exhaustive"),
        CheckMode::Sampled { seed, samples } => json!({"sampled": {"seed": seed, "samples": samples}}),
    };
    json!({
        "mode": mode,
        "maxlen": r.maxlen,
        "checked": r.checked,
        "violations": r.violations.iter().map(|p| p.display(h).to_string()).collect::<Vec<_>>(),
    })
}

fn witness_json(h: &Hypergraph, w: &FlipWitness) -> Value {
    let u = h.vertices();
    let kappa: serde_json::Map<String, Value> = w
        .choice
        .kappa
        .iter()
        .enumerate()
        .filter_map(|(e, k)| k.map(|v| (h.edge_label(e), json!(u.name(v)))))
        .collect();
    json!({
        "purchase": w.purchase.iter().map(|e| h.edge_label(e)).collect::<Vec<_>>(),
        "cut": {"left": u.format_set(&w.choice.cut.left), "right": u.format_set(&w.choice.cut.right)},
        "crossing": w.choice.crossing.iter().map(|e| h.edge_label(e)).collect::<Vec<_>>(),
        "root": u.name(w.choice.root),
        "kappa": kappa,
        "checks": {
            "purchase_avoids_crossing": w.purchase_avoids_crossing,
            "lhs_on_left": w.lhs_on_left,
            "left_vertices_unchanged": w.structure.left_vertices_unchanged,
            "non_crossing_edges_unchanged": w.structure.non_crossing_edges_unchanged,
            "root_differs": w.structure.root_differs,
            "zero_equations": report_json(h, &w.zero_equations),
            "flip_equations": report_json(h, &w.flip_equations),
        },
        "ok": w.ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use proptest::prelude::*;

    fn graph(names: &str, edges: &[(&str, &str, u64)]) -> Hypergraph {
        let u = AttributeUniverse::parse_decl(names).unwrap();
        let mut h = Hypergraph::new(u.clone());
        for (t, o, w) in edges {
            h.add_edge(
                u.parse_set(t).unwrap(),
                u.parse_set(o).unwrap(),
                Budget::from_integer(*w),
            );
        }
        h
    }

    fn two_edge_graph() -> Hypergraph {
        graph(
            "v1,v2,v3,v4,v5,v6",
            &[("{v1,v2}", "{v3,v4}", 1), ("{v1,v4}", "{v5,v6}", 1)],
        )
    }

    fn pm(h: &Hypergraph, d: usize) -> PathModel {
        synthesize_model(h, d).unwrap()
    }

    #[test]
    fn attribute_layout() {
        let m = pm(&two_edge_graph(), 3);
        assert_eq!(m.universe().len(), 8);
        assert_eq!(m.universe().name(0), "v:v1");
        assert_eq!(m.universe().name(7), "e:1");
        assert_eq!(m.costs()[0], ExtendedBudget::Infinite);
        assert_eq!(m.costs()[6], ExtendedBudget::Finite(Budget::from_integer(1)));
        assert!(synthesize_model(&two_edge_graph(), 0).is_err());
    }

    #[test]
    fn path_enumeration() {
        let h = graph("a,b", &[]);
        let m = pm(&h, 3);
        assert_eq!(enumerate_paths(&m, Origin::Vertex(0), 3), vec![Path::vertex(0)]);

        let h = two_edge_graph();
        let m = pm(&h, 4);
        let p = Path {
            head: Some(0),
            links: vec![(0, 3), (1, 5)],
        };
        assert!(p.is_valid(&h));
        assert_eq!(p.display(&h).to_string(), "<v1,e0,v4,e1,v6>");
        assert!(enumerate_paths(&m, Origin::Vertex(0), 4).contains(&p));
        let from_edge = enumerate_paths(&m, Origin::Edge(0), 2);
        assert!(from_edge.contains(&Path {
            head: None,
            links: vec![(0, 3), (1, 5)],
        }));

        let chain = graph("a,b,c", &[("{a}", "{b}", 1), ("{b}", "{c}", 1)]);
        let m = pm(&chain, 4);
        assert_eq!(enumerate_paths(&m, Origin::Vertex(0), 4).len(), 3);
    }

    #[test]
    fn choice_and_membership() {
        // y has tails h and k on the right; the least one is chosen
        let h = graph("h,k,m,z", &[("{h,k}", "{m}", 1), ("{z}", "{m}", 1)]);
        let u = h.vertices().clone();
        let cut = Cut::from_left(u.parse_set("{z}").unwrap());
        let cf = choice_function(&h, &cut, 2).unwrap();
        assert_eq!(cf.kappa[0], Some(0));
        assert_eq!(cf.kappa[1], None);
        assert!(cf.crossing.contains(1));

        assert!(tree_membership(&Path::vertex(2), &cf));
        assert!(!tree_membership(&Path::vertex(0), &cf));
        let via_h = Path {
            head: Some(0),
            links: vec![(0, 2)],
        };
        let via_k = Path {
            head: Some(1),
            links: vec![(0, 2)],
        };
        assert!(tree_membership(&via_h, &cf));
        assert!(!tree_membership(&via_k, &cf));
        // a leading crossing edge is in the tree, nothing before it is
        let crossing = Path {
            head: None,
            links: vec![(1, 2)],
        };
        assert!(tree_membership(&crossing, &cf));
        assert!(!tree_membership(&crossing.with_head(3), &cf));

        assert!(choice_function(&h, &cut, 3).is_err());
    }

    #[test]
    fn flip_coordinates() {
        let h = graph("a,b", &[("{a}", "{b}", 1)]);
        let u = h.vertices().clone();
        let cut = Cut::from_left(u.parse_set("{a}").unwrap());
        let v = flip_vector(choice_function(&h, &cut, 1).unwrap());
        assert!(v.value(&Path::vertex(1)));
        assert!(!v.value(&Path::vertex(0)));
        assert!(!v.value(&Path {
            head: Some(0),
            links: vec![(0, 1)]
        }));
        // the single edge crosses this cut and is flipped
        assert!(v.value(&Path {
            head: None,
            links: vec![(0, 1)]
        }));
        assert!(!SymbolicVector::zero().value(&Path::vertex(1)));
    }

    #[test]
    fn equation_checks_and_mutation() {
        let h = graph("a,b,c", &[("{a,c}", "{b}", 0), ("{b,c}", "{a}", 0), ("{}", "{c}", 4)]);
        let m = pm(&h, 6);
        let zero = verify_equations(&m, &SymbolicVector::zero(), 6, 1_000_000).unwrap();
        assert!(zero.ok());
        assert!(zero.checked > 0);
        let u = h.vertices().clone();
        let cut = Cut::from_left(u.parse_set("{c}").unwrap());
        let flip = flip_vector(choice_function(&h, &cut, 1).unwrap());
        assert!(verify_equations(&m, &flip, 6, 1_000_000).unwrap().ok());
        let bad = flip.toggled(Path {
            head: None,
            links: vec![(2, 2)],
        });
        let r = verify_equations(&m, &bad, 6, 1_000_000).unwrap();
        assert_eq!(
            r.violations,
            vec![Path {
                head: None,
                links: vec![(2, 2)]
            }]
        );
        let sampled = verify_equations_sampled(&m, &SymbolicVector::zero(), 6, 500, 7);
        assert!(sampled.ok());
        assert_eq!(sampled.checked, 500);
        assert!(verify_equations(&m, &SymbolicVector::zero(), 6, 3).is_err());
    }

    #[test]
    fn materialization_examples() {
        let edgeless = graph("a,b,c", &[]);
        let lm = materialize_acyclic(&pm(&edgeless, 1), 100).unwrap();
        assert_eq!(lm.dimension(), 3);

        let single = graph("a,b", &[("{a}", "{b}", 2)]);
        let lm = materialize_acyclic(&pm(&single, 1), 100).unwrap();
        assert_eq!(lm.coordinate_count(), 4);
        assert_eq!(lm.equation_count(), 1);
        assert_eq!(lm.dimension(), 3);
        let u = pm(&single, 1).universe().clone();
        let s = |t: &str| u.parse_set(t).unwrap();
        assert!(lm.determines(&s("{v:a,e:0}"), &s("{v:b}")));
        assert!(!lm.determines(&s("{v:a}"), &s("{v:b}")));
        assert!(lm.determines(&s("{v:a}"), &s("{}")));

        let chain = graph("a,b,c", &[("{a}", "{b}", 1), ("{b}", "{c}", 1)]);
        let lm = materialize_acyclic(&pm(&chain, 1), 100).unwrap();
        // paths: 3 trivial, <a,e0,b>, <a,e0,b,e1,c>, <b,e1,c>, <e0,b>, <e0,b,e1,c>, <e1,c>
        assert_eq!(lm.coordinate_count(), 9);
        assert_eq!(lm.equation_count(), 3);
        assert_eq!(lm.dimension(), 6);

        let cyclic = graph("a,b", &[("{a}", "{b}", 1), ("{b}", "{a}", 1)]);
        assert!(matches!(
            materialize_acyclic(&pm(&cyclic, 1), 100),
            Err(Error::Cyclic(_))
        ));
        assert!(materialize_acyclic(&pm(&chain, 1), 5).unwrap_err().is_cap_exceeded());
    }

    #[test]
    fn explicit_export_agrees() {
        let single = graph("a,b", &[("{a}", "{b}", 2)]);
        let lm = materialize_acyclic(&pm(&single, 1), 100).unwrap();
        let explicit = lm.to_info_model().unwrap();
        assert_eq!(explicit.tuple_count(), 8);
        let u = explicit.universe().clone();
        for (l, r) in [("{v:a,e:0}", "{v:b}"), ("{v:a}", "{v:b}"), ("{e:0}", "{v:a}")] {
            let (l, r) = (u.parse_set(l).unwrap(), u.parse_set(r).unwrap());
            assert_eq!(explicit.determines(&l, &r), lm.determines(&l, &r));
        }
    }

    #[test]
    fn counterexample_for_folders() {
        let h = graph("a,b", &[("{}", "{a}", 3), ("{}", "{b}", 5)]);
        let f = parse_formula("{} |4 {b}", h.vertices()).unwrap();
        let pkg = counterexample_for(&h, &f, &CounterexampleOptions::default()).unwrap();
        assert!(pkg.verified());
        let AtomCertificate::Fails { witnesses, .. } = &pkg.atoms[0].certificate else {
            panic!()
        };
        assert_eq!(witnesses.len(), 1);
        assert_eq!(witnesses[0].choice.root, 1);
        assert_eq!(witnesses[0].choice.cut.left, h.vertices().parse_set("{a}").unwrap());
        let m = pkg.materialized.as_ref().unwrap();
        assert!(!m.formula_value);
        let json = pkg.to_json();
        assert_eq!(json["verified"], true);
        assert!(json["materialized"]["model"].is_object());

        let taut = parse_formula("{a} |0 {a}", h.vertices()).unwrap();
        assert!(matches!(
            counterexample_for(&h, &taut, &CounterexampleOptions::default()),
            Err(Error::Precondition(_))
        ));
    }

    fn arb_graph() -> impl Strategy<Value = Hypergraph> {
        (1usize..=5).prop_flat_map(|n| {
            let edge = (
                proptest::collection::vec(proptest::bool::weighted(0.3), n),
                proptest::collection::vec(proptest::bool::weighted(0.3), n),
                0u64..4,
            );
            proptest::collection::vec(edge, 0..=6).prop_map(move |edges| {
                let u = AttributeUniverse::new((0..n).map(|i| format!("x{i}"))).unwrap();
                let mut h = Hypergraph::new(u);
                for (t, o, w) in edges {
                    h.add_edge(
                        AttrSet::from_indices(n, (0..n).filter(|&i| t[i])),
                        AttrSet::from_indices(n, (0..n).filter(|&i| o[i])),
                        Budget::from_integer(w),
                    );
                }
                h
            })
        })
    }

    fn arb_cut_case() -> impl Strategy<Value = (Hypergraph, AttrSet, usize)> {
        arb_graph().prop_flat_map(|h| {
            let n = h.vertex_count();
            (Just(h), proptest::collection::vec(any::<bool>(), n), 0..n).prop_map(move |(h, left, root)| {
                let mut l = AttrSet::from_indices(n, (0..n).filter(|&i| left[i]));
                l.remove(root);
                (h, l, root)
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn flip_vectors_are_legitimate((h, left, root) in arb_cut_case()) {
            let m = pm(&h, 5);
            let cf = choice_function(&h, &Cut::from_left(left), root).unwrap();
            let flip = flip_vector(cf);
            let r = verify_equations(&m, &flip, 5, 2_000_000).unwrap();
            prop_assert!(r.ok(), "violations {:?}", r.violations);
            prop_assert!(check_structure(&m, &flip, 5, 2_000_000).unwrap().ok());
        }

        #[test]
        fn acyclic_semantics_agree(h in arb_graph(), a in any::<u8>(), b in any::<u8>(), p in 0u64..8) {
            prop_assume!(h.is_acyclic());
            let m = pm(&h, 1);
            let Ok(lm) = materialize_acyclic(&m, 2048) else { return Ok(()) };
            let n = h.vertex_count();
            let a = AttrSet::from_indices(n, (0..n).filter(|i| a >> i & 1 == 1));
            let b = AttrSet::from_indices(n, (0..n).filter(|i| b >> i & 1 == 1));
            let t = Atom::new(a, b, Budget::from_integer(p));
            let hyper = min_budget(&h, &t.lhs, &t.rhs).fits(&t.budget);
            let model = infomodel::eval_atom(&lm, &m.lift_atom(&t), 24).unwrap();
            prop_assert_eq!(hyper, model);
        }

        #[test]
        fn agreement_propagates_along_closure(h in arb_graph(), a in any::<u8>(), f in any::<u8>()) {
            prop_assume!(h.is_acyclic());
            let m = pm(&h, 1);
            let Ok(lm) = materialize_acyclic(&m, 2048) else { return Ok(()) };
            let n = h.vertex_count();
            let a = AttrSet::from_indices(n, (0..n).filter(|i| a >> i & 1 == 1));
            let f = EdgeSet::from_ids(h.edge_count(), (0..h.edge_count()).filter(|i| f >> i & 1 == 1));
            let known = m.lift_vertices(&a).union(&m.lift_edges(&f));
            let reached = m.lift_vertices(&h.closure(&a, &f));
            prop_assert!(lm.determines(&known, &reached));
        }
    }
}
