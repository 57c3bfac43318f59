use forestcalc::gaussian::{
    activity, activity_decay_table, cluster_expansion, partition_series, verify_factorization, wick_moment,
    zero_dim_connected_count, BoxModel, BoxModelFile,
};
use forestcalc::matrix::random_psd;
use forestcalc::mayer::finite_volume_pressure;
use forestcalc::rational::{int, rat};
use forestcalc::symbolic::FormalSeries;
use forestcalc::{QMatrix, Rational};
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn double_factorial(n: i64) -> BigInt {
    (1..=n).rev().step_by(2).map(BigInt::from).product()
}

fn factorial(n: i64) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

fn cov2(a: Rational, b: Rational, c: Rational) -> QMatrix {
    QMatrix::from_rows(vec![vec![a, b.clone()], vec![b, c]]).unwrap()
}

#[test]
fn wick_against_pairing_counts() {
    let c = rat(2, 3);
    let one = QMatrix::from_rows(vec![vec![c.clone()]]).unwrap();
    for k in 0..6u32 {
        let want =
            Rational::from_integer(double_factorial(2 * k as i64 - 1)) * forestcalc::rational::pow(&c, k as usize);
        assert_eq!(wick_moment(&one, &[2 * k]).unwrap(), want);
        assert_eq!(wick_moment(&one, &[2 * k + 1]).unwrap(), int(0));
    }
    let (a, b, d) = (rat(1, 2), rat(1, 3), int(2));
    let m = cov2(a.clone(), b.clone(), d.clone());
    assert_eq!(wick_moment(&m, &[2, 2]).unwrap(), &a * &d + int(2) * &b * &b);
    // 15 pairings of x⁴y²: 3 with y–y, 12 with both y's on x's
    assert_eq!(
        wick_moment(&m, &[4, 2]).unwrap(),
        int(3) * &a * &a * &d + int(12) * &a * &b * &b
    );
}

#[test]
fn one_box_series_and_log() {
    // Z = Σ (-λ)^k (4k-1)!! / k!
    let z = partition_series(&BoxModel::new(QMatrix::identity(1), 3).unwrap()).unwrap();
    let want: Vec<Rational> = (0..=3)
        .map(|k| {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            Rational::new(BigInt::from(sign) * double_factorial(4 * k - 1), factorial(k))
        })
        .collect();
    assert_eq!(z.coeffs(), want.as_slice());
    let (z1, z2, z3) = (&want[1], &want[2], &want[3]);
    let log3 = z3 - z1 * z2 + z1 * z1 * z1 / int(3);
    assert_eq!(zero_dim_connected_count(1).unwrap(), int(-3));
    assert_eq!(zero_dim_connected_count(2).unwrap(), int(48));
    assert_eq!(zero_dim_connected_count(3).unwrap(), log3);
    assert_eq!(log3, int(-1584));
}

#[test]
fn decoupled_boxes_factor() {
    let c = QMatrix::from_rows(vec![
        vec![int(1), int(0), int(0)],
        vec![int(0), rat(1, 2), int(0)],
        vec![int(0), int(0), int(2)],
    ])
    .unwrap();
    let model = BoxModel::new(c.clone(), 2).unwrap();
    let acts = cluster_expansion(&model).unwrap();
    let mut product = FormalSeries::one(2);
    for b in 1..=3 {
        let single = partition_series(&model.restrict(&[b]).unwrap()).unwrap();
        assert_eq!(acts.get(&[b]).unwrap(), &single);
        product = product.mul(&single);
    }
    assert_eq!(partition_series(&model).unwrap(), product);
    for y in [vec![1, 2], vec![1, 3], vec![2, 3], vec![1, 2, 3]] {
        assert!(activity(&model, &y).unwrap().is_zero(), "{y:?}");
    }
}

#[test]
fn two_box_activity_is_connected_part() {
    // A({1,2}) = Z - A({1}) A({2}) for two boxes
    let m = BoxModel::new(cov2(int(1), rat(1, 3), int(1)), 3).unwrap();
    let z = partition_series(&m).unwrap();
    let a1 = activity(&m, &[1]).unwrap();
    let a2 = activity(&m, &[2]).unwrap();
    assert_eq!(activity(&m, &[1, 2]).unwrap(), z.sub(&a1.mul(&a2)));
    assert_eq!(activity(&m, &[1, 2]).unwrap().coeff(1), int(0));
}

#[test]
fn model_file_roundtrip_and_validation() {
    let text = r#"{"boxes": 2, "covariance": [["1", "1/2"], ["1/2", "1"]], "order": 2}"#;
    let file: BoxModelFile = serde_json::from_str(text).unwrap();
    let model = BoxModel::try_from(file).unwrap();
    assert_eq!(model.to_file().covariance[0][1], "1/2");
    let indefinite = r#"{"boxes": 2, "covariance": [["1", "2"], ["2", "1"]], "order": 2}"#;
    assert!(BoxModel::try_from(serde_json::from_str::<BoxModelFile>(indefinite).unwrap()).is_err());
    let asymmetric = r#"{"boxes": 2, "covariance": [["1", "0"], ["1", "1"]], "order": 2}"#;
    assert!(BoxModel::try_from(serde_json::from_str::<BoxModelFile>(asymmetric).unwrap()).is_err());
}

#[test]
fn decay_table_small_coupling() {
    let rows = activity_decay_table(&rat(1, 10), 3).unwrap();
    assert_eq!(rows[0].value, "-3");
    assert!(rows[2].root < rows[1].root && rows[1].root < rows[0].root);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn factorization_and_pressure(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = BoxModel::new(random_psd(n, &mut rng), 2).unwrap();
        let report = verify_factorization(&model).unwrap();
        prop_assert!(report.residuals.iter().all(|r| r == "0"));
        let p = finite_volume_pressure(&model).unwrap();
        prop_assert_eq!(p.via_mayer, p.direct);
    }

    #[test]
    fn moments_scale_homogeneously(seed in any::<u64>(), p in 1i64..=3, q in 1i64..=3) {
        // E_{sC}[φ^α] = s^{|α|/2} E_C[φ^α]
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_psd(2, &mut rng);
        let s = rat(p, q);
        let scaled = QMatrix::from_fn(2, 2, |i, j| &s * &c[(i, j)]);
        let exps = [2u32, 4];
        prop_assert_eq!(
            wick_moment(&scaled, &exps).unwrap(),
            forestcalc::rational::pow(&s, 3) * wick_moment(&c, &exps).unwrap()
        );
    }
}
