//! Finite informational models: attributes with costs, an explicit list of
//! legitimate tuples, and evaluation of budgeted dependencies over them.

use std::collections::{HashMap, HashSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::budget::{Budget, ExtendedBudget};
use crate::error::{Error, Result};
use crate::formula::{Atom, AttrSet, AttributeUniverse, Formula};

pub const DEFAULT_AFFORDABLE_CAP: usize = 24;

/// What evaluation needs from a model: attribute costs and a functional
/// dependency test over the legitimate vectors.
pub trait InformationalModel {
    fn universe(&self) -> &AttributeUniverse;

    fn cost(&self, attr: usize) -> &ExtendedBudget;

    /// Whether any two legitimate vectors agreeing on `lhs` agree on `rhs`.
    fn determines(&self, lhs: &AttrSet, rhs: &AttrSet) -> bool;

    fn set_cost(&self, s: &AttrSet) -> ExtendedBudget {
        s.iter().map(|a| self.cost(a).clone()).sum()
    }
}

/// Attributes outside `exclude` whose cost is at most `budget`, cheapest
/// first, ties by position.
fn affordable<M: InformationalModel + ?Sized>(m: &M, exclude: &AttrSet, budget: &Budget) -> Vec<(usize, Budget)> {
    let mut out: Vec<(usize, Budget)> = (0..m.universe().len())
        .filter(|&a| !exclude.contains(a))
        .filter_map(|a| m.cost(a).finite().filter(|c| *c <= budget).map(|c| (a, c.clone())))
        .collect();
    out.sort_by(|x, y| x.1.cmp(&y.1).then(x.0.cmp(&y.0)));
    out
}

/// Searches for a purchase `C` with `‖C‖ <= p` such that `A∪C` determines
/// `B`. Returns the first witness in order of cardinality, then cost, so a
/// returned `C` is inclusion-minimal. Members of `A` are never bought.
pub fn find_witness<M: InformationalModel + ?Sized>(m: &M, t: &Atom, cap: usize) -> Result<Option<AttrSet>> {
    let n = m.universe().len();
    if t.universe_len() != n {
        return Err(Error::UniverseMismatch("atom and model differ in universe size".into()));
    }
    if t.rhs.is_subset(&t.lhs) {
        return Ok(Some(AttrSet::empty(n)));
    }
    let cand = affordable(m, &t.lhs, &t.budget);
    if cand.len() > cap {
        return Err(Error::cap("affordable attributes", cap, cand.len()));
    }
    let everything = t.lhs.union(&AttrSet::from_indices(n, cand.iter().map(|c| c.0)));
    if !m.determines(&everything, &t.rhs) {
        return Ok(None);
    }
    for k in 0..=cand.len() {
        let mut subsets: Vec<(Budget, Vec<usize>)> = Vec::new();
        k_subsets(&cand, k, 0, &mut Vec::new(), Budget::zero(), &t.budget, &mut subsets);
        if subsets.is_empty() {
            // costs are non-negative, so larger subsets are no cheaper
            break;
        }
        subsets.sort();
        for (_, members) in subsets {
            let c = AttrSet::from_indices(n, members);
            if m.determines(&t.lhs.union(&c), &t.rhs) {
                return Ok(Some(c));
            }
        }
    }
    Ok(None)
}

fn k_subsets(
    cand: &[(usize, Budget)],
    k: usize,
    from: usize,
    current: &mut Vec<usize>,
    spent: Budget,
    budget: &Budget,
    out: &mut Vec<(Budget, Vec<usize>)>,
) {
    if current.len() == k {
        let mut members = current.clone();
        members.sort_unstable();
        out.push((spent, members));
        return;
    }
    for i in from..cand.len() {
        if cand.len() - i < k - current.len() {
            break;
        }
        let next = &spent + &cand[i].1;
        if next > *budget {
            break; // sorted ascending
        }
        current.push(cand[i].0);
        k_subsets(cand, k, i + 1, current, next, budget, out);
        current.pop();
    }
}

pub fn eval_atom<M: InformationalModel + ?Sized>(m: &M, t: &Atom, cap: usize) -> Result<bool> {
    Ok(find_witness(m, t, cap)?.is_some())
}

pub fn eval_formula<M: InformationalModel + ?Sized>(m: &M, f: &Formula, cap: usize) -> Result<bool> {
    f.eval_with(&mut |t: &Atom| eval_atom(m, t, cap))
}

/// Cheapest `C` (over attributes outside `lhs` costing at most `cap`) with
/// `lhs ∪ C` determining `rhs`, by branch and bound.
pub fn min_witness<M: InformationalModel + ?Sized>(
    m: &M,
    lhs: &AttrSet,
    rhs: &AttrSet,
    cap: &Budget,
    attr_cap: usize,
) -> Result<Option<(Budget, AttrSet)>> {
    let n = m.universe().len();
    if rhs.is_subset(lhs) {
        return Ok(Some((Budget::zero(), AttrSet::empty(n))));
    }
    let cand = affordable(m, lhs, cap);
    if cand.len() > attr_cap {
        return Err(Error::cap("affordable attributes", attr_cap, cand.len()));
    }
    let mut best = None;
    let mut chosen = lhs.clone();
    min_dfs(m, &cand, 0, &mut chosen, Budget::zero(), rhs, cap, &mut best);
    Ok(best.map(|(p, with): (Budget, AttrSet)| (p, with.difference(lhs))))
}

#[allow(clippy::too_many_arguments)]
fn min_dfs<M: InformationalModel + ?Sized>(
    m: &M,
    cand: &[(usize, Budget)],
    i: usize,
    chosen: &mut AttrSet,
    spent: Budget,
    rhs: &AttrSet,
    cap: &Budget,
    best: &mut Option<(Budget, AttrSet)>,
) {
    if m.determines(chosen, rhs) {
        if best.as_ref().is_none_or(|(b, _)| &spent < b) {
            *best = Some((spent, chosen.clone()));
        }
        return;
    }
    let mut rest = chosen.clone();
    for (a, _) in &cand[i..] {
        rest.insert(*a);
    }
    if !m.determines(&rest, rhs) {
        return;
    }
    for j in i..cand.len() {
        let next = &spent + &cand[j].1;
        if next > *cap || best.as_ref().is_some_and(|(b, _)| &next >= b) {
            break; // sorted ascending
        }
        chosen.insert(cand[j].0);
        min_dfs(m, cand, j + 1, chosen, next, rhs, cap, best);
        chosen.remove(cand[j].0);
    }
}

/// An explicit model. Values are interned per attribute; tuples hold ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfoModel {
    universe: AttributeUniverse,
    costs: Vec<ExtendedBudget>,
    domains: Vec<Vec<String>>,
    tuples: Vec<Vec<u32>>,
}

impl InfoModel {
    /// Duplicate rows collapse. At least one row is required.
    pub fn new<S: AsRef<str>>(
        universe: AttributeUniverse,
        costs: Vec<ExtendedBudget>,
        rows: impl IntoIterator<Item = Vec<S>>,
    ) -> Result<Self> {
        let n = universe.len();
        if costs.len() != n {
            return Err(Error::Malformed(format!("{} costs for {n} attributes", costs.len())));
        }
        let mut domains: Vec<Vec<String>> = vec![Vec::new(); n];
        let mut lookup: Vec<HashMap<String, u32>> = vec![HashMap::new(); n];
        let mut tuples: Vec<Vec<u32>> = Vec::new();
        let mut seen: HashSet<Vec<u32>> = HashSet::new();
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::Malformed(format!(
                    "row {r} has {} values, expected {n}",
                    row.len()
                )));
            }
            let ids: Vec<u32> = row
                .iter()
                .enumerate()
                .map(|(a, v)| {
                    let v = v.as_ref();
                    *lookup[a].entry(v.to_string()).or_insert_with(|| {
                        domains[a].push(v.to_string());
                        (domains[a].len() - 1) as u32
                    })
                })
                .collect();
            if seen.insert(ids.clone()) {
                tuples.push(ids);
            }
        }
        if tuples.is_empty() {
            return Err(Error::Malformed("a model needs at least one legitimate tuple".into()));
        }
        Ok(InfoModel {
            universe,
            costs,
            domains,
            tuples,
        })
    }

    pub fn costs(&self) -> &[ExtendedBudget] {
        &self.costs
    }

    pub fn tuple_count(&self) -> usize {
        self.tuples.len()
    }

    pub fn domain(&self, attr: usize) -> &[String] {
        &self.domains[attr]
    }

    /// Row `i` as value strings.
    pub fn row(&self, i: usize) -> Vec<&str> {
        self.tuples[i]
            .iter()
            .enumerate()
            .map(|(a, &v)| self.domains[a][v as usize].as_str())
            .collect()
    }

    pub fn agrees_on(&self, i: usize, j: usize, s: &AttrSet) -> bool {
        s.iter().all(|a| self.tuples[i][a] == self.tuples[j][a])
    }

    /// Caps every cost at `r`, leaving values and tuples alone.
    pub fn truncate_costs(&self, r: &Budget) -> InfoModel {
        let costs = self
            .costs
            .iter()
            .map(|c| match c.finite() {
                Some(b) if b <= r => c.clone(),
                _ => ExtendedBudget::Finite(r.clone()),
            })
            .collect();
        InfoModel { costs, ..self.clone() }
    }

    pub fn eval_atom(&self, t: &Atom) -> Result<bool> {
        eval_atom(self, t, DEFAULT_AFFORDABLE_CAP)
    }

    pub fn eval_formula(&self, f: &Formula) -> Result<bool> {
        eval_formula(self, f, DEFAULT_AFFORDABLE_CAP)
    }

    pub fn to_json(&self) -> ModelJson {
        ModelJson {
            attributes: self
                .universe
                .names()
                .iter()
                .zip(&self.costs)
                .map(|(name, cost)| AttributeJson {
                    name: name.clone(),
                    cost: cost.clone(),
                })
                .collect(),
            tuples: (0..self.tuples.len())
                .map(|i| {
                    self.row(i)
                        .into_iter()
                        .map(|v| serde_json::Value::String(v.into()))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_json(json: &ModelJson) -> Result<Self> {
        let universe = AttributeUniverse::new(json.attributes.iter().map(|a| a.name.clone()))?;
        let costs = json.attributes.iter().map(|a| a.cost.clone()).collect();
        let rows: Vec<Vec<String>> = json
            .tuples
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| match v {
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect()
            })
            .collect();
        InfoModel::new(universe, costs, rows)
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        InfoModel::from_json(&serde_json::from_str(text)?)
    }

    /// Reads a CSV table (header row = attribute names, every value an opaque
    /// string) with costs from a `name=cost` sidecar.
    pub fn from_csv<R: Read>(csv_data: R, costs: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(csv_data);
        let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let universe = AttributeUniverse::new(header)?;
        let costs = parse_costs(costs, &universe)?;
        let mut rows = Vec::new();
        for rec in rdr.records() {
            rows.push(rec?.iter().map(str::to_string).collect::<Vec<_>>());
        }
        InfoModel::new(universe, costs, rows)
    }
}

/// Parses `name=cost` lines; every attribute needs exactly one entry.
pub fn parse_costs(text: &str, universe: &AttributeUniverse) -> Result<Vec<ExtendedBudget>> {
    let mut costs: Vec<Option<ExtendedBudget>> = vec![None; universe.len()];
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (name, cost) = line
            .split_once('=')
            .ok_or_else(|| Error::Malformed(format!("cost line {}: expected `name=cost`", no + 1)))?;
        let name = name.trim();
        let a = universe
            .position(name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))?;
        if costs[a].is_some() {
            return Err(Error::DuplicateAttribute(name.to_string()));
        }
        costs[a] = Some(ExtendedBudget::parse(cost)?);
    }
    costs
        .into_iter()
        .enumerate()
        .map(|(a, c)| c.ok_or_else(|| Error::Malformed(format!("no cost given for `{}`", universe.name(a)))))
        .collect()
}

impl InformationalModel for InfoModel {
    fn universe(&self) -> &AttributeUniverse {
        &self.universe
    }

    fn cost(&self, attr: usize) -> &ExtendedBudget {
        &self.costs[attr]
    }

    fn determines(&self, lhs: &AttrSet, rhs: &AttrSet) -> bool {
        let mut seen: HashMap<Vec<u32>, Vec<u32>> = HashMap::new();
        for t in &self.tuples {
            let key: Vec<u32> = lhs.iter().map(|a| t[a]).collect();
            let val: Vec<u32> = rhs.iter().map(|a| t[a]).collect();
            match seen.get(&key) {
                Some(prev) if prev != &val => return false,
                Some(_) => {}
                None => {
                    seen.insert(key, val);
                }
            }
        }
        true
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeJson {
    pub name: String,
    pub cost: ExtendedBudget,
}

/// `{"attributes":[{"name":"a","cost":"3"}], "tuples":[["x"]]}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelJson {
    pub attributes: Vec<AttributeJson>,
    pub tuples: Vec<Vec<serde_json::Value>>,
}

/// A mined dependency `lhs |budget {rhs}` with its cheapest purchase.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mined {
    pub atom: Atom,
    pub purchase: AttrSet,
}

/// For every single attribute `b` and every `A` with `|A| <= max_lhs` and
/// `b ∉ A`, the least budget `p <= cap` at which `A |p {b}` holds. Pairs
/// where a proper subset of `A` already achieves the same budget are
/// dropped.
pub fn mine_dependencies<M: InformationalModel + ?Sized>(
    m: &M,
    cap: &Budget,
    max_lhs: usize,
    attr_cap: usize,
) -> Result<Vec<Mined>> {
    let n = m.universe().len();
    if n > attr_cap {
        return Err(Error::cap("attributes", attr_cap, n));
    }
    let mut lhs_sets: Vec<AttrSet> = Vec::new();
    for k in 0..=max_lhs.min(n) {
        let mut acc = Vec::new();
        combinations(n, k, 0, &mut Vec::new(), &mut acc);
        lhs_sets.extend(acc.into_iter().map(|ix| AttrSet::from_indices(n, ix)));
    }
    let mut out = Vec::new();
    for b in 0..n {
        let rhs = AttrSet::singleton(n, b);
        let mut found: Vec<(AttrSet, Budget)> = Vec::new();
        for a in lhs_sets.iter().filter(|a| !a.contains(b)) {
            let Some((p, purchase)) = min_witness(m, a, &rhs, cap, attr_cap)? else {
                continue;
            };
            let redundant = found.iter().any(|(sub, q)| sub != a && sub.is_subset(a) && q == &p);
            if !redundant {
                found.push((a.clone(), p.clone()));
                out.push(Mined {
                    atom: Atom::new(a.clone(), rhs.clone(), p),
                    purchase,
                });
            }
        }
    }
    Ok(out)
}

fn combinations(n: usize, k: usize, from: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if current.len() == k {
        out.push(current.clone());
        return;
    }
    for i in from..n {
        current.push(i);
        combinations(n, k, i + 1, current, out);
        current.pop();
    }
}
