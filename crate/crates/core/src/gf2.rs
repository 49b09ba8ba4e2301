//! Dense linear algebra over GF(2) on bitset rows.

use fixedbitset::FixedBitSet;

/// Reduced row echelon form in place. Returns the pivot column of each
/// remaining row; zero rows are dropped.
pub fn rref(rows: &mut Vec<FixedBitSet>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        let Some(found) = (r..rows.len()).find(|&i| rows[i].contains(col)) else {
            continue;
        };
        rows.swap(r, found);
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row.contains(col) {
                row.symmetric_difference_with(&pivot);
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

pub fn rank(rows: &[FixedBitSet], ncols: usize) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m, ncols).len()
}

/// A basis of `{x : row·x = 0 for every row}`.
pub fn nullspace(rows: &[FixedBitSet], ncols: usize) -> Vec<FixedBitSet> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m, ncols);
    let mut is_pivot = FixedBitSet::with_capacity(ncols);
    for &p in &pivots {
        is_pivot.insert(p);
    }
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|&c| !is_pivot.contains(c)) {
        let mut x = FixedBitSet::with_capacity(ncols);
        x.insert(free);
        for (row, &p) in m.iter().zip(&pivots) {
            if row.contains(free) {
                x.insert(p);
            }
        }
        basis.push(x);
    }
    basis
}

/// Rows spanning `{x ∈ span(basis) : x vanishes on cols}`.
pub fn vanishing_subspace(basis: &[FixedBitSet], cols: &FixedBitSet) -> Vec<FixedBitSet> {
    let mut rows = basis.to_vec();
    let mut r = 0;
    for col in cols.ones() {
        let Some(found) = (r..rows.len()).find(|&i| rows[i].contains(col)) else {
            continue;
        };
        rows.swap(r, found);
        let pivot = rows[r].clone();
        for row in rows[r + 1..].iter_mut() {
            if row.contains(col) {
                row.symmetric_difference_with(&pivot);
            }
        }
        r += 1;
    }
    rows.split_off(r)
}

/// Whether `x|S = y|S ⇒ x|B = y|B` for all `x, y` in the span: every vector
/// of the span vanishing on `s` also vanishes on `b`.
pub fn subspace_fd_check(basis: &[FixedBitSet], s: &FixedBitSet, b: &FixedBitSet) -> bool {
    vanishing_subspace(basis, s).iter().all(|k| k.is_disjoint(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits(n: usize, ones: &[usize]) -> FixedBitSet {
        let mut b = FixedBitSet::with_capacity(n);
        for &i in ones {
            b.insert(i);
        }
        b
    }

    fn from_mask(n: usize, mask: u32) -> FixedBitSet {
        bits(n, &(0..n).filter(|i| mask >> i & 1 == 1).collect::<Vec<_>>())
    }

    /// Every element of the span, by enumerating coefficient vectors.
    fn span(rows: &[FixedBitSet], n: usize) -> Vec<FixedBitSet> {
        let mut out: Vec<FixedBitSet> = (0u32..1 << rows.len())
            .map(|mask| {
                let mut x = FixedBitSet::with_capacity(n);
                for (i, r) in rows.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        x.symmetric_difference_with(r);
                    }
                }
                x
            })
            .collect();
        out.sort_by_key(|x| x.ones().collect::<Vec<_>>());
        out.dedup();
        out
    }

    fn dot(a: &FixedBitSet, b: &FixedBitSet) -> bool {
        a.intersection(b).count() % 2 == 1
    }

    #[test]
    fn single_equation() {
        let eq = bits(4, &[0, 1, 2]);
        let basis = nullspace(std::slice::from_ref(&eq), 4);
        assert_eq!(basis.len(), 3);
        assert!(basis.iter().all(|x| !dot(&eq, x)));
    }

    #[test]
    fn empty_system_is_full_space() {
        assert_eq!(nullspace(&[], 3).len(), 3);
    }

    fn arb_rows() -> impl Strategy<Value = (usize, Vec<u32>)> {
        (1usize..=7).prop_flat_map(|n| (Just(n), proptest::collection::vec(0u32..(1 << n), 0..6)))
    }

    proptest! {
        #[test]
        fn nullspace_matches_enumeration((n, masks) in arb_rows()) {
            let rows: Vec<FixedBitSet> = masks.iter().map(|&m| from_mask(n, m)).collect();
            let basis = nullspace(&rows, n);
            let solutions: Vec<FixedBitSet> = (0u32..1 << n)
                .map(|m| from_mask(n, m))
                .filter(|x| rows.iter().all(|r| !dot(r, x)))
                .collect();
            prop_assert_eq!(rank(&basis, n), basis.len());
            prop_assert_eq!(1usize << basis.len(), solutions.len());
            prop_assert_eq!(basis.len() + rank(&rows, n), n);
            for x in &basis {
                prop_assert!(rows.iter().all(|r| !dot(r, x)));
            }
        }

        #[test]
        fn fd_check_matches_pairwise((n, masks) in arb_rows(), s in 0u32..128, b in 0u32..128) {
            let basis: Vec<FixedBitSet> = masks.iter().map(|&m| from_mask(n, m)).collect();
            let (s, b) = (from_mask(n, s & ((1 << n) - 1)), from_mask(n, b & ((1 << n) - 1)));
            let vectors = span(&basis, n);
            let agree = |x: &FixedBitSet, y: &FixedBitSet, on: &FixedBitSet| {
                on.ones().all(|i| x.contains(i) == y.contains(i))
            };
            let expected = vectors.iter().all(|x| vectors.iter().all(|y| !agree(x, y, &s) || agree(x, y, &b)));
            prop_assert_eq!(subspace_fd_check(&basis, &s, &b), expected);
        }
    }
}
