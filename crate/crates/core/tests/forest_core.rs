use std::collections::HashSet;

use forestcalc::forest::{
    all_links, count_trees_by_degree, degree_sequences, enumerate_forests, enumerate_trees, tree_from_prufer, Forest,
};
use num_bigint::BigInt;
use proptest::prelude::*;

/// Acyclic link subsets by a separate union-find over all 2^(n(n-1)/2) subsets.
fn brute_forest_count(n: usize) -> usize {
    let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect();
    (0u32..1 << pairs.len())
        .filter(|mask| {
            let mut parent: Vec<usize> = (0..=n).collect();
            fn root(p: &mut [usize], mut x: usize) -> usize {
                while p[x] != x {
                    x = p[x];
                }
                x
            }
            pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .all(|(_, &(i, j))| {
                    let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                    parent[a] = b;
                    a != b
                })
        })
        .count()
}

#[test]
fn forest_counts_match_subset_filter() {
    for n in 1..=5 {
        assert_eq!(enumerate_forests(n).unwrap().len(), brute_forest_count(n), "n = {n}");
    }
}

#[test]
fn trees_are_distinct_spanning_and_counted() {
    for n in 2..=6 {
        let trees = enumerate_trees(n).unwrap();
        let set: HashSet<_> = trees.iter().map(|t| t.links().to_vec()).collect();
        assert_eq!(set.len(), n.pow(n as u32 - 2));
        for t in &trees {
            assert_eq!(t.links().len(), n - 1);
            assert_eq!(t.forest().clusters().len(), 1);
        }
    }
}

#[test]
fn degree_counts_sum_to_cayley() {
    for n in 2..=7 {
        let total: BigInt = degree_sequences(n)
            .iter()
            .map(|d| count_trees_by_degree(n, d).unwrap())
            .sum();
        assert_eq!(total, BigInt::from(n.pow(n as u32 - 2)));
    }
}

#[test]
fn degree_counts_match_enumeration() {
    let n = 6;
    let trees = enumerate_trees(n).unwrap();
    for d in degree_sequences(n) {
        let observed = trees
            .iter()
            .filter(|t| (1..=n).all(|v| t.forest().degree(v) == d[v - 1]))
            .count();
        assert_eq!(BigInt::from(observed), count_trees_by_degree(n, &d).unwrap(), "{d:?}");
    }
}

#[test]
fn single_vertex_and_small_cases() {
    assert_eq!(enumerate_trees(1).unwrap().len(), 1);
    assert_eq!(enumerate_trees(2).unwrap()[0].links().len(), 1);
    assert_eq!(all_links(4).len(), 6);
    assert!(Forest::from_pairs(3, &[(1, 2), (2, 3), (1, 3)]).is_err());
}

proptest! {
    #[test]
    fn prufer_degrees(seq in (3usize..=8).prop_flat_map(|n| (Just(n), prop::collection::vec(1..=n, n - 2)))) {
        let (n, seq) = seq;
        let t = tree_from_prufer(n, &seq).unwrap();
        for v in 1..=n {
            let occurrences = seq.iter().filter(|&&x| x == v).count();
            prop_assert_eq!(t.forest().degree(v), occurrences + 1);
        }
    }

    #[test]
    fn paths_in_trees_connect(seq in prop::collection::vec(1usize..=6, 4), a in 1usize..=6, b in 1usize..=6) {
        let t = tree_from_prufer(6, &seq).unwrap();
        let path = t.forest().path(a, b).unwrap().unwrap();
        if a == b {
            prop_assert!(path.is_empty());
        } else {
            prop_assert!(path.first().unwrap().contains(a));
            prop_assert!(path.last().unwrap().contains(b));
            for pair in path.windows(2) {
                prop_assert!(pair[0].contains(pair[1].lo()) || pair[0].contains(pair[1].hi()));
            }
        }
    }
}
