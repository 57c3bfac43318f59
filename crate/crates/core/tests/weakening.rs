use std::collections::VecDeque;

use forestcalc::forest::{enumerate_forests, Forest};
use forestcalc::matrix::random_psd;
use forestcalc::rational::{int, rat};
use forestcalc::weakening::{
    block_sum, convex_block_decomposition, hadamard_product, is_positive_semidefinite, Rule, WeakeningMatrix,
    WeightAssignment,
};
use forestcalc::{QMatrix, Rational};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Minimum weight along the BFS path, 0 across clusters, 1 on the diagonal.
fn path_min(f: &Forest, w: &[Rational], i: usize, j: usize) -> Rational {
    if i == j {
        return int(1);
    }
    let mut best: Vec<Option<Rational>> = vec![None; f.n() + 1];
    best[i] = Some(int(1));
    let mut queue = VecDeque::from([i]);
    while let Some(v) = queue.pop_front() {
        for (k, l) in f.links().iter().enumerate() {
            if l.contains(v) {
                let u = l.other(v);
                if best[u].is_none() {
                    let cur = best[v].clone().unwrap();
                    best[u] = Some(if w[k] < cur { w[k].clone() } else { cur });
                    queue.push_back(u);
                }
            }
        }
    }
    best[j].clone().unwrap_or_else(|| int(0))
}

fn weights(len: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((0i64..=8).prop_map(|p| rat(p, 8)), len)
}

fn forest_and_weights(n: usize) -> impl Strategy<Value = (Forest, Vec<Rational>)> {
    let forests = enumerate_forests(n).unwrap();
    (0..forests.len()).prop_flat_map(move |k| {
        let f = forests[k].clone();
        let len = f.len();
        (Just(f), weights(len))
    })
}

#[test]
fn rooted_star_is_not_psd() {
    // siblings share a layer and get weight 1; det = -(a - b)²
    let f = Forest::from_pairs(3, &[(1, 2), (1, 3)]).unwrap();
    let w = WeightAssignment::new(&f, vec![rat(1, 4), rat(3, 4)]).unwrap();
    let m = WeakeningMatrix::build(&f, &w, Rule::Rooted).unwrap().matrix;
    assert_eq!(m[(1, 2)], int(1));
    assert_eq!(m.determinant().unwrap(), rat(-1, 4));
    assert!(!is_positive_semidefinite(&m).unwrap().is_psd);
    let equal = WeightAssignment::uniform(&f, rat(1, 2)).unwrap();
    let m = WeakeningMatrix::build(&f, &equal, Rule::Rooted).unwrap().matrix;
    assert!(is_positive_semidefinite(&m).unwrap().is_psd);
}

#[test]
fn indefinite_matrix_is_rejected() {
    let m = QMatrix::from_rows(vec![vec![int(1), int(2)], vec![int(2), int(1)]]).unwrap();
    let cert = is_positive_semidefinite(&m).unwrap();
    assert!(!cert.is_psd);
    assert!(cert.witness.is_some());
}

proptest! {
    #[test]
    fn symmetric_matches_path_minimum((f, w) in (1usize..=6).prop_flat_map(forest_and_weights)) {
        let wa = WeightAssignment::new(&f, w.clone()).unwrap();
        let m = WeakeningMatrix::build(&f, &wa, Rule::Symmetric).unwrap().matrix;
        for i in 1..=f.n() {
            for j in 1..=f.n() {
                prop_assert_eq!(&m[(i - 1, j - 1)], &path_min(&f, &w, i, j));
            }
        }
    }

    #[test]
    fn symmetric_psd_and_convex((f, w) in (1usize..=6).prop_flat_map(forest_and_weights)) {
        let wa = WeightAssignment::new(&f, w).unwrap();
        let m = WeakeningMatrix::build(&f, &wa, Rule::Symmetric).unwrap().matrix;
        prop_assert!(is_positive_semidefinite(&m).unwrap().is_psd);
        let terms = convex_block_decomposition(&f, &wa).unwrap();
        prop_assert!(terms.iter().all(|t| t.weight >= int(0)));
        prop_assert_eq!(terms.iter().map(|t| t.weight.clone()).sum::<Rational>(), int(1));
        prop_assert_eq!(block_sum(f.n(), &terms), m);
    }

    #[test]
    fn rooted_shape((f, w) in (1usize..=6).prop_flat_map(forest_and_weights)) {
        let wa = WeightAssignment::new(&f, w.clone()).unwrap();
        let m = WeakeningMatrix::build(&f, &wa, Rule::Rooted).unwrap().matrix;
        prop_assert!(m.is_symmetric());
        for i in 0..f.n() {
            prop_assert_eq!(&m[(i, i)], &int(1));
            for j in 0..f.n() {
                prop_assert!(m[(i, j)] >= int(0) && m[(i, j)] <= int(1));
                if !f.same_cluster(i + 1, j + 1) {
                    prop_assert_eq!(&m[(i, j)], &int(0));
                }
            }
        }
        for (k, l) in f.links().iter().enumerate() {
            prop_assert_eq!(&m[(l.lo() - 1, l.hi() - 1)], &w[k]);
        }
    }

    #[test]
    fn hadamard_of_psd_is_psd(seed in any::<u64>(), n in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (random_psd(n, &mut rng), random_psd(n, &mut rng));
        prop_assert!(is_positive_semidefinite(&a).unwrap().is_psd);
        prop_assert!(is_positive_semidefinite(&hadamard_product(&a, &b).unwrap()).unwrap().is_psd);
    }
}
