//! Weighted directed hypergraphs: closures under edge sets, closure traces,
//! cuts and crossing edges.

use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::formula::{AttrSet, AttributeUniverse};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: usize,
    /// `in(e)`
    pub tails: AttrSet,
    /// `out(e)`
    pub heads: AttrSet,
    pub weight: Budget,
}

/// A finite hypergraph whose vertices are the attributes of a universe.
///
/// Immutable once built; parallel edges are allowed.
#[derive(Clone, Debug)]
pub struct Hypergraph {
    vertices: AttributeUniverse,
    edges: Vec<Edge>,
    // vertex -> ids of edges having it as a tail
    tail_index: Vec<Vec<usize>>,
}

impl PartialEq for Hypergraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges
    }
}

impl Hypergraph {
    pub fn new(vertices: AttributeUniverse) -> Self {
        let n = vertices.len();
        Hypergraph {
            vertices,
            edges: Vec::new(),
            tail_index: vec![Vec::new(); n],
        }
    }

    /// Appends an edge and returns its id.
    pub fn add_edge(&mut self, tails: AttrSet, heads: AttrSet, weight: Budget) -> usize {
        let n = self.vertices.len();
        assert_eq!(tails.universe_len(), n, "edge tails outside vertex universe");
        assert_eq!(heads.universe_len(), n, "edge heads outside vertex universe");
        let id = self.edges.len();
        for v in tails.iter() {
            self.tail_index[v].push(id);
        }
        self.edges.push(Edge {
            id,
            tails,
            heads,
            weight,
        });
        id
    }

    pub fn vertices(&self) -> &AttributeUniverse {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn all_edges(&self) -> EdgeSet {
        EdgeSet::full(self.edges.len())
    }

    pub fn no_edges(&self) -> EdgeSet {
        EdgeSet::empty(self.edges.len())
    }

    pub fn all_vertices(&self) -> AttrSet {
        self.vertices.full_set()
    }

    /// `w(F)`, exact.
    pub fn weight(&self, f: &EdgeSet) -> Budget {
        f.iter().map(|e| &self.edges[e].weight).sum()
    }

    /// `A*_F`: every vertex reachable from `a` by firing edges of `f` whose
    /// tails are all reached.
    ///
    /// Runs in time linear in the total size of the edge lists: each edge
    /// keeps a count of unreached tails, and a worklist holds newly reached
    /// vertices.
    pub fn closure(&self, a: &AttrSet, f: &EdgeSet) -> AttrSet {
        let mut reached = a.clone();
        let mut missing = vec![0usize; self.edges.len()];
        let mut worklist = Vec::new();
        for e in f.iter() {
            let edge = &self.edges[e];
            missing[e] = edge.tails.difference(a).len();
            if missing[e] == 0 {
                fire(edge, &mut reached, &mut worklist);
            }
        }
        while let Some(v) = worklist.pop() {
            for &e in &self.tail_index[v] {
                if !f.contains(e) {
                    continue;
                }
                missing[e] -= 1;
                if missing[e] == 0 {
                    fire(&self.edges[e], &mut reached, &mut worklist);
                }
            }
        }
        reached
    }

    /// The partial closures `A^0_F ⊆ A^1_F ⊆ ...`, computed round by round
    /// and stopping at the first repeated set (so the last entry is `A*_F`).
    pub fn partial_closures(&self, a: &AttrSet, f: &EdgeSet) -> Vec<AttrSet> {
        let mut rounds = vec![a.clone()];
        loop {
            let cur = rounds.last().unwrap();
            let mut next = cur.clone();
            for e in f.iter() {
                let edge = &self.edges[e];
                if edge.tails.is_subset(cur) {
                    next.union_with(&edge.heads);
                }
            }
            if &next == cur {
                return rounds;
            }
            rounds.push(next);
        }
    }

    /// A serial derivation of `A*_F` from `a`: sets `A_1 .. A_n` interleaved
    /// with distinct edges `f_1 .. f_{n-1}` where `in(f_i) ⊆ A_i` and
    /// `A_i ∪ out(f_i) = A_{i+1}`.
    ///
    /// Edges are taken round by round; within a round, every edge of `f`
    /// enabled by the previous round's set that still adds a vertex is
    /// appended in ascending id order.
    pub fn closure_trace(&self, a: &AttrSet, f: &EdgeSet) -> ClosureTrace {
        let mut sets = vec![a.clone()];
        let mut edges = Vec::new();
        let mut round_start = a.clone();
        loop {
            let enabled: Vec<usize> = f
                .iter()
                .filter(|&e| {
                    let edge = &self.edges[e];
                    edge.tails.is_subset(&round_start) && !edge.heads.is_subset(&round_start)
                })
                .collect();
            if enabled.is_empty() {
                return ClosureTrace { sets, edges };
            }
            for e in enabled {
                let next = sets.last().unwrap().union(&self.edges[e].heads);
                edges.push(e);
                sets.push(next);
            }
            round_start = sets.last().unwrap().clone();
        }
    }

    /// `Cross(c)`: edges with every tail on the left and some head on the right.
    pub fn crossing_edges(&self, cut: &Cut) -> EdgeSet {
        let mut out = self.no_edges();
        for edge in &self.edges {
            if edge.tails.is_subset(&cut.left) && edge.heads.intersects(&cut.right) {
                out.insert(edge.id);
            }
        }
        out
    }

    /// The cut `(A*_F, V \ A*_F)`. None of its crossing edges is in `f`.
    pub fn reachability_cut(&self, a: &AttrSet, f: &EdgeSet) -> Cut {
        let left = self.closure(a, f);
        let right = left.complement();
        Cut { left, right }
    }

    /// Some vertex lying on a directed cycle, where `v -> u` whenever an
    /// edge has `v` among its tails and `u` among its heads.
    pub fn find_cycle(&self) -> Option<usize> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Open,
            Done,
        }
        let n = self.vertices.len();
        let succ: Vec<Vec<usize>> = (0..n)
            .map(|v| {
                let mut s: Vec<usize> = self.tail_index[v]
                    .iter()
                    .flat_map(|&e| self.edges[e].heads.iter())
                    .collect();
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect();
        let mut mark = vec![Mark::New; n];
        for root in 0..n {
            if mark[root] != Mark::New {
                continue;
            }
            // iterative DFS: (vertex, next successor position)
            let mut stack = vec![(root, 0usize)];
            mark[root] = Mark::Open;
            while let Some(&mut (v, ref mut pos)) = stack.last_mut() {
                if *pos < succ[v].len() {
                    let u = succ[v][*pos];
                    *pos += 1;
                    match mark[u] {
                        Mark::Open => return Some(u),
                        Mark::New => {
                            mark[u] = Mark::Open;
                            stack.push((u, 0));
                        }
                        Mark::Done => {}
                    }
                } else {
                    mark[v] = Mark::Done;
                    stack.pop();
                }
            }
        }
        None
    }

    pub fn is_acyclic(&self) -> bool {
        self.find_cycle().is_none()
    }

    pub fn edge_label(&self, id: usize) -> String {
        format!("e{id}")
    }

    pub fn format_edges(&self, f: &EdgeSet) -> String {
        let names: Vec<String> = f.iter().map(|e| self.edge_label(e)).collect();
        format!("{{{}}}", names.join(","))
    }

    pub fn to_json(&self) -> HypergraphJson {
        HypergraphJson {
            vertices: self.vertices.names().to_vec(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeJson {
                    tails: e.tails.iter().map(|v| self.vertices.name(v).to_string()).collect(),
                    heads: e.heads.iter().map(|v| self.vertices.name(v).to_string()).collect(),
                    weight: e.weight.clone(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &HypergraphJson) -> Result<Self> {
        let vertices = AttributeUniverse::new(json.vertices.iter().cloned())?;
        let mut h = Hypergraph::new(vertices);
        for e in &json.edges {
            let tails = h.vertices.set(&e.tails)?;
            let heads = h.vertices.set(&e.heads)?;
            h.add_edge(tails, heads, e.weight.clone());
        }
        Ok(h)
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        let json: HypergraphJson = serde_json::from_str(text)?;
        Hypergraph::from_json(&json)
    }
}

fn fire(edge: &Edge, reached: &mut AttrSet, worklist: &mut Vec<usize>) {
    for h in edge.heads.iter() {
        if !reached.contains(h) {
            reached.insert(h);
            worklist.push(h);
        }
    }
}

/// Serialized form: `{"vertices":[..], "edges":[{"in":[..],"out":[..],"w":"3/2"}]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct HypergraphJson {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EdgeJson {
    #[serde(rename = "in")]
    pub tails: Vec<String>,
    #[serde(rename = "out")]
    pub heads: Vec<String>,
    #[serde(rename = "w")]
    pub weight: Budget,
}

/// A set of edge ids of one hypergraph.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EdgeSet(FixedBitSet);

impl EdgeSet {
    pub fn empty(edge_count: usize) -> Self {
        EdgeSet(FixedBitSet::with_capacity(edge_count))
    }

    pub fn full(edge_count: usize) -> Self {
        let mut b = FixedBitSet::with_capacity(edge_count);
        b.insert_range(..);
        EdgeSet(b)
    }

    pub fn from_ids(edge_count: usize, ids: impl IntoIterator<Item = usize>) -> Self {
        let mut s = EdgeSet::empty(edge_count);
        for i in ids {
            s.insert(i);
        }
        s
    }

    pub fn insert(&mut self, id: usize) {
        assert!(id < self.0.len(), "edge {id} out of range");
        self.0.insert(id);
    }

    pub fn remove(&mut self, id: usize) {
        self.0.set(id, false);
    }

    pub fn contains(&self, id: usize) -> bool {
        self.0.contains(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn capacity(&self) -> usize {
        self.0.len()
    }

    pub fn union(&self, other: &EdgeSet) -> EdgeSet {
        let mut b = self.0.clone();
        b.union_with(&other.0);
        EdgeSet(b)
    }

    pub fn intersection(&self, other: &EdgeSet) -> EdgeSet {
        let mut b = self.0.clone();
        b.intersect_with(&other.0);
        EdgeSet(b)
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &EdgeSet) -> bool {
        self.0.is_disjoint(&other.0)
    }
}

impl fmt::Debug for EdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// An ordered partition `(left, right)` of the vertex set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    pub left: AttrSet,
    pub right: AttrSet,
}

impl Cut {
    pub fn new(left: AttrSet, right: AttrSet) -> Result<Self> {
        if left.universe_len() != right.universe_len() {
            return Err(Error::UniverseMismatch("cut sides over different universes".into()));
        }
        if left.intersects(&right) || left.union(&right) != AttrSet::full(left.universe_len()) {
            return Err(Error::Precondition("cut sides must partition the vertices".into()));
        }
        Ok(Cut { left, right })
    }

    /// The cut with `left` on the left and everything else on the right.
    pub fn from_left(left: AttrSet) -> Self {
        let right = left.complement();
        Cut { left, right }
    }

    pub fn is_partition(&self) -> bool {
        self.left.is_disjoint(&self.right) && self.left.union(&self.right) == AttrSet::full(self.left.universe_len())
    }
}

/// Alternating sequence `A_1, f_1, A_2, ..., f_{n-1}, A_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureTrace {
    pub sets: Vec<AttrSet>,
    pub edges: Vec<usize>,
}

impl ClosureTrace {
    pub fn start(&self) -> &AttrSet {
        &self.sets[0]
    }

    pub fn end(&self) -> &AttrSet {
        self.sets.last().expect("trace has at least one set")
    }

    /// Mechanical check of the serial-derivation conditions against `h`,
    /// `a` and `f`, including that the final set is the closure.
    pub fn verify(&self, h: &Hypergraph, a: &AttrSet, f: &EdgeSet) -> std::result::Result<(), String> {
        if self.sets.is_empty() {
            return Err("empty trace".into());
        }
        if self.sets.len() != self.edges.len() + 1 {
            return Err(format!("{} sets but {} edges", self.sets.len(), self.edges.len()));
        }
        if &self.sets[0] != a {
            return Err("trace does not start at A".into());
        }
        let mut seen = h.no_edges();
        for (i, &e) in self.edges.iter().enumerate() {
            if e >= h.edge_count() || !f.contains(e) {
                return Err(format!("step {i}: edge {e} not in F"));
            }
            if seen.contains(e) {
                return Err(format!("step {i}: edge {e} repeated"));
            }
            seen.insert(e);
            let edge = h.edge(e);
            if !edge.tails.is_subset(&self.sets[i]) {
                return Err(format!("step {i}: tails of edge {e} not yet reached"));
            }
            if self.sets[i].union(&edge.heads) != self.sets[i + 1] {
                return Err(format!("step {i}: set does not grow by the heads of edge {e}"));
            }
        }
        if *self.end() != h.closure(a, f) {
            return Err("trace does not end at the closure".into());
        }
        Ok(())
    }
}
