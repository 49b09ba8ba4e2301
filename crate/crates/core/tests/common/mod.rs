//! Fixtures and seeded generators shared by the integration tests.
#![allow(dead_code)]

use budgetfd::{Atom, AttrSet, AttributeUniverse, Budget, ExtendedBudget, Formula, Hypergraph, InfoModel, PremiseSet};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn universe(decl: &str) -> AttributeUniverse {
    AttributeUniverse::parse_decl(decl).unwrap()
}

pub fn premises(u: &AttributeUniverse, text: &str) -> PremiseSet {
    PremiseSet::parse(text, u).unwrap()
}

pub fn atom(u: &AttributeUniverse, text: &str) -> Atom {
    Atom::parse(text, u).unwrap()
}

pub const FOLDERS: &str = "{} |3 {a}\n{} |5 {b}";
pub const ONE_TIME_PAD: &str = "{} |3 {a}\n{} |5 {b}\n{} |4 {c}\n{a,c} |0 {b}\n{b,c} |0 {a}";
pub const ASYMMETRIC_KEYS: &str = "{} |1 {c}\n{} |5 {d}\n{} |100 {a}\n{} |100 {b}\n{a,c} |0 {b}\n{b,d} |0 {a}";
pub const KEYS_FORMULA: &str = "{a} |1 {b} & {b} |5 {a} => {} |5 {a} | {} |1 {b} | {b} |4 {a}";

fn random_set(rng: &mut ChaCha8Rng, n: usize, p: f64) -> AttrSet {
    AttrSet::from_indices(n, (0..n).filter(|_| rng.gen_bool(p)))
}

/// Weights from `{0, 1/2, 1, 3/2, 2, 3}`.
pub fn grid_weight(rng: &mut ChaCha8Rng) -> Budget {
    const GRID: [(u64, u64); 6] = [(0, 1), (1, 2), (1, 1), (3, 2), (2, 1), (3, 1)];
    let (n, d) = GRID[rng.gen_range(0..GRID.len())];
    Budget::from_ratio(n, d).unwrap()
}

pub fn random_hypergraph(rng: &mut ChaCha8Rng, max_v: usize, max_e: usize, density: f64) -> Hypergraph {
    let n = rng.gen_range(1..=max_v);
    let m = rng.gen_range(0..=max_e);
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut h = Hypergraph::new(AttributeUniverse::new(names).unwrap());
    for _ in 0..m {
        let tails = random_set(rng, n, density);
        let heads = random_set(rng, n, density);
        let w = grid_weight(rng);
        h.add_edge(tails, heads, w);
    }
    h
}

pub fn random_vertex_set(rng: &mut ChaCha8Rng, n: usize) -> AttrSet {
    random_set(rng, n, 0.4)
}

/// At most `max_attrs` attributes over a binary or ternary alphabet, costs
/// in `0..=4` with the occasional `inf`.
pub fn random_model(rng: &mut ChaCha8Rng, max_attrs: usize, max_tuples: usize) -> InfoModel {
    let n = rng.gen_range(1..=max_attrs);
    let rows = rng.gen_range(1..=max_tuples);
    let u = AttributeUniverse::new((0..n).map(|i| format!("x{i}"))).unwrap();
    let costs = (0..n)
        .map(|_| {
            if rng.gen_bool(0.15) {
                ExtendedBudget::Infinite
            } else {
                ExtendedBudget::Finite(Budget::from_integer(rng.gen_range(0..=4)))
            }
        })
        .collect();
    let alphabet = rng.gen_range(2..=3);
    let tuples: Vec<Vec<String>> = (0..rows)
        .map(|_| (0..n).map(|_| rng.gen_range(0..alphabet).to_string()).collect())
        .collect();
    InfoModel::new(u, costs, tuples).unwrap()
}

pub fn random_atom(rng: &mut ChaCha8Rng, n: usize, max_budget: u64) -> Atom {
    Atom::new(
        random_set(rng, n, 0.4),
        random_set(rng, n, 0.4),
        Budget::from_integer(rng.gen_range(0..=max_budget)),
    )
}

/// A random formula whose leaves are drawn from `pool`.
pub fn random_formula(rng: &mut ChaCha8Rng, pool: &[Atom], depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return Formula::Atom(pool[rng.gen_range(0..pool.len())].clone());
    }
    let a = random_formula(rng, pool, depth - 1);
    match rng.gen_range(0..5) {
        0 => Formula::not(a),
        1 => Formula::implies(a, random_formula(rng, pool, depth - 1)),
        2 => Formula::and(a, random_formula(rng, pool, depth - 1)),
        3 => Formula::or(a, random_formula(rng, pool, depth - 1)),
        _ => Formula::iff(a, random_formula(rng, pool, depth - 1)),
    }
}
