use forestcalc::rational::{int, rat, to_f64};
use forestcalc::symbolic::{integrate_min_expression, FormalSeries, MinExpression};
use forestcalc::Rational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(p, q)| rat(p, q))
}

/// Products of min-symbols over random masks, with small coefficients.
fn min_expression(tau: usize) -> impl Strategy<Value = MinExpression> {
    let factor = (1u32..1 << tau).prop_map(move |m| MinExpression::min_of(tau, m).unwrap());
    let term = (prop::collection::vec(factor, 0..3), small_rational())
        .prop_map(move |(fs, c)| fs.iter().fold(MinExpression::constant(tau, c), |acc, f| acc.mul(f)));
    prop::collection::vec(term, 1..4).prop_map(move |ts| ts.iter().fold(MinExpression::zero(tau), |acc, t| acc.add(t)))
}

#[test]
fn closed_form_integrals() {
    // ∫ min(t_1..t_k) = 1/(k+1)
    for k in 1..=5 {
        let e = MinExpression::min_of(k, (1 << k) - 1).unwrap();
        assert_eq!(integrate_min_expression(&e).unwrap(), rat(1, k as i64 + 1));
    }
    // ∫ t_1 t_2 = 1/4, ∫ min(t_1,t_2)² = 1/6
    let t1 = MinExpression::link(2, 0).unwrap();
    let t2 = MinExpression::link(2, 1).unwrap();
    assert_eq!(integrate_min_expression(&t1.mul(&t2)).unwrap(), rat(1, 4));
    let m = MinExpression::min_of(2, 0b11).unwrap();
    assert_eq!(integrate_min_expression(&m.mul(&m)).unwrap(), rat(1, 6));
}

#[test]
fn monte_carlo_agreement() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let tau = 3;
    let e = MinExpression::min_of(tau, 0b011)
        .unwrap()
        .mul(&MinExpression::min_of(tau, 0b110).unwrap())
        .add(&MinExpression::link(tau, 2).unwrap().scale(&rat(-1, 2)));
    let exact = to_f64(&integrate_min_expression(&e).unwrap());
    let samples = 200_000;
    let mut sum = 0.0;
    let mut sq = 0.0;
    for _ in 0..samples {
        let w: Vec<Rational> = (0..tau).map(|_| rat(rng.gen_range(0..1_000_000), 1_000_000)).collect();
        let v = to_f64(&e.evaluate(&w).unwrap());
        sum += v;
        sq += v * v;
    }
    let mean = sum / samples as f64;
    let sd = ((sq / samples as f64 - mean * mean) / samples as f64).sqrt();
    assert!((mean - exact).abs() < 5.0 * sd + 1e-5, "mean {mean}, exact {exact}");
}

#[test]
fn known_series() {
    // log(1 + t) = t - t²/2 + t³/3
    let one_plus_t = FormalSeries::new(vec![int(1), int(1), int(0), int(0)]);
    assert_eq!(
        one_plus_t.log().unwrap().coeffs(),
        &[int(0), int(1), rat(-1, 2), rat(1, 3)]
    );
    // exp(t) = 1 + t + t²/2 + t³/6
    assert_eq!(
        FormalSeries::variable(3).exp().unwrap().coeffs(),
        &[int(1), int(1), rat(1, 2), rat(1, 6)]
    );
    assert!(FormalSeries::new(vec![int(2), int(1)]).log().is_err());
}

proptest! {
    #[test]
    fn exp_log_roundtrip(tail in prop::collection::vec(small_rational(), 1..6)) {
        let mut c = vec![int(1)];
        c.extend(tail);
        let s = FormalSeries::new(c);
        prop_assert_eq!(s.log().unwrap().exp().unwrap(), s);
    }

    #[test]
    fn log_of_product_is_sum(a in prop::collection::vec(small_rational(), 4), b in prop::collection::vec(small_rational(), 4)) {
        let series = |t: &[Rational]| {
            let mut c = vec![int(1)];
            c.extend_from_slice(t);
            FormalSeries::new(c)
        };
        let (x, y) = (series(&a), series(&b));
        prop_assert_eq!(x.mul(&y).log().unwrap(), x.log().unwrap().add(&y.log().unwrap()));
    }

    #[test]
    fn integral_invariant_under_relabeling(e in min_expression(3), perm in Just(vec![2usize, 0, 1])) {
        // relabel link l as perm[l]
        let mut relabeled = MinExpression::zero(3);
        for (mono, c) in e.terms() {
            let mut t = MinExpression::constant(3, c.clone());
            for &(mask, k) in mono.iter() {
                let moved = (0..3).filter(|l| mask >> l & 1 == 1).fold(0u32, |m, l| m | 1 << perm[l]);
                for _ in 0..k {
                    t = t.mul(&MinExpression::min_of(3, moved).unwrap());
                }
            }
            relabeled.add_assign(&t);
        }
        prop_assert_eq!(integrate_min_expression(&e).unwrap(), integrate_min_expression(&relabeled).unwrap());
    }

    #[test]
    fn integral_is_linear(a in min_expression(3), b in min_expression(3), q in small_rational()) {
        let lhs = integrate_min_expression(&a.add(&b.scale(&q))).unwrap();
        let rhs = integrate_min_expression(&a).unwrap() + q * integrate_min_expression(&b).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
