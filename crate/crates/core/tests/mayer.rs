use forestcalc::mayer::{
    connected_coefficient_graphs, connected_coefficient_graphs_pattern, connected_coefficient_tree,
    connected_coefficient_tree_pattern, mayer_log_series, partition_polynomial, verify_mayer, OverlapPattern, Polymer,
    PolymerGas,
};
use forestcalc::rational::{int, rat};
use forestcalc::symbolic::log_series;
use forestcalc::Rational;
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pattern(k: usize, edges: &[(usize, usize)]) -> OverlapPattern {
    OverlapPattern::new(k, edges).unwrap()
}

#[test]
fn connected_coefficients_by_hand() {
    // path: only the full edge set connects; triangle: 3·(+1) - 1 = 2;
    // 4-cycle: 1 - 4 = -3; star on 4: -1
    let cases = [
        (pattern(3, &[(0, 1), (1, 2)]), int(1)),
        (pattern(3, &[(0, 1), (1, 2), (0, 2)]), int(2)),
        (pattern(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]), int(-3)),
        (pattern(4, &[(0, 1), (0, 2), (0, 3)]), int(-1)),
        (pattern(3, &[(0, 1)]), int(0)),
    ];
    for (p, want) in cases {
        assert_eq!(connected_coefficient_tree_pattern(&p).unwrap(), want, "{:?}", p.edges());
        assert_eq!(connected_coefficient_graphs_pattern(&p).unwrap(), want);
    }
}

#[test]
fn repeated_polymer_gives_log_one_plus_z() {
    let y = Polymer::new(&[1, 2]).unwrap();
    for k in 1..=5 {
        let seq = vec![y; k];
        let fact: i64 = (1..k as i64).product();
        let sign = if k % 2 == 1 { 1 } else { -1 };
        assert_eq!(connected_coefficient_tree(&seq).unwrap(), int(sign * fact));
        assert_eq!(connected_coefficient_graphs(&seq).unwrap(), int(sign * fact));
    }
    let z = rat(2, 5);
    let gas = PolymerGas::new(2, vec![(y, z.clone())], int(0)).unwrap();
    let log = mayer_log_series(&gas, 5).unwrap();
    let direct = log_series(&[int(1), z.clone(), int(0), int(0), int(0), int(0)]).unwrap();
    assert_eq!(log, direct);
}

#[test]
fn mutually_overlapping_polymers() {
    // all pairs overlap: Z_r = 1 + Σ z, log Z_r = log(1 + Σ z) graded by count
    let ps = [vec![1, 2], vec![2, 3], vec![1, 3]];
    let zs = [rat(1, 2), rat(-1, 3), rat(1, 7)];
    let entries = ps
        .iter()
        .zip(&zs)
        .map(|(b, z)| (Polymer::new(b).unwrap(), z.clone()))
        .collect();
    let gas = PolymerGas::new(3, entries, int(0)).unwrap();
    let s: Rational = zs.iter().cloned().sum();
    assert_eq!(partition_polynomial(&gas, 3), vec![int(1), s.clone(), int(0), int(0)]);
    let log = mayer_log_series(&gas, 4).unwrap();
    let want = log_series(&[int(1), s, int(0), int(0), int(0)]).unwrap();
    assert_eq!(log, want);
}

#[test]
fn disjoint_polymers_add_logs() {
    let a = Polymer::new(&[1, 2]).unwrap();
    let b = Polymer::new(&[3, 4]).unwrap();
    let gas = PolymerGas::new(4, vec![(a, rat(1, 3)), (b, rat(1, 5))], int(0)).unwrap();
    let log = mayer_log_series(&gas, 4).unwrap();
    let la = log_series(&[int(1), rat(1, 3), int(0), int(0), int(0)]).unwrap();
    let lb = log_series(&[int(1), rat(1, 5), int(0), int(0), int(0)]).unwrap();
    for k in 0..=4 {
        assert_eq!(log[k], &la[k] + &lb[k]);
    }
}

#[test]
fn trivial_polymers_rejected() {
    assert!(PolymerGas::new(2, vec![(Polymer::new(&[1]).unwrap(), int(1))], int(0)).is_err());
    assert!(PolymerGas::new(2, vec![(Polymer::new(&[1, 3]).unwrap(), int(1))], int(0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tree_formula_matches_graphs(seed in any::<u64>(), k in 1usize..=5, density in 0.1f64..0.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = OverlapPattern::random(k, density, &mut rng).unwrap();
        let t = connected_coefficient_tree_pattern(&p).unwrap();
        prop_assert_eq!(&t, &connected_coefficient_graphs_pattern(&p).unwrap());
        prop_assert_eq!(t.is_zero(), !p.is_connected());
    }

    #[test]
    fn exp_log_is_partition_function(n in 3usize..=5, len in 2usize..=3, p in -3i64..=3, q in 1i64..=4) {
        let gas = PolymerGas::intervals(n, len, rat(p, q)).unwrap();
        let report = verify_mayer(&gas, 3).unwrap();
        prop_assert!(report.residuals.iter().all(|r| r == "0"));
    }
}
