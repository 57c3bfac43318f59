use forestcalc::forest::{enumerate_forests, link_index, Forest, Link};
use forestcalc::forest_formula::{
    forest_sum, forest_term, ordered_forest_sum, random_polynomial, term_table, FormulaRule, InterpolationJob,
};
use forestcalc::rational::{int, rat};
use forestcalc::symbolic::RationalPolynomial;
use forestcalc::Rational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn monomial(n: usize, pairs: &[(usize, usize)], c: Rational) -> RationalPolynomial {
    let mut e = vec![0; n * (n - 1) / 2];
    for &(i, j) in pairs {
        e[link_index(n, Link::new(i, j).unwrap())] += 1;
    }
    RationalPolynomial::from_terms(e.len(), vec![(e, c)]).unwrap()
}

#[test]
fn one_link_is_the_fundamental_theorem() {
    // H(x) = x³: H(0) + ∫ 3w² dw = 1
    let h = monomial(2, &[(1, 2), (1, 2), (1, 2)], int(1));
    for rule in FormulaRule::ALL {
        let job = InterpolationJob::new(2, h.clone(), rule).unwrap();
        let f = Forest::from_pairs(2, &[(1, 2)]).unwrap();
        assert_eq!(forest_term(&job, &f).unwrap(), int(1));
        assert_eq!(forest_sum(&job).unwrap(), int(1));
    }
}

#[test]
fn triangle_terms_by_hand() {
    // H = x12 x13 x23; forest {12,13}: ∂ leaves x23 at min(w12,w13) (symmetric, 1/3),
    // or at 1 when 2 and 3 share a layer (rooted)
    let h = monomial(3, &[(1, 2), (1, 3), (2, 3)], int(1));
    let f = Forest::from_pairs(3, &[(1, 2), (1, 3)]).unwrap();
    let sym = InterpolationJob::new(3, h.clone(), FormulaRule::Symmetric).unwrap();
    assert_eq!(forest_term(&sym, &f).unwrap(), rat(1, 3));
    assert_eq!(forest_term(&sym.with_rule(FormulaRule::Rooted), &f).unwrap(), int(1));
    for rule in FormulaRule::ALL {
        assert_eq!(forest_sum(&sym.with_rule(rule)).unwrap(), int(1));
    }
    let rows = term_table(&sym).unwrap();
    assert_eq!(rows.len(), enumerate_forests(3).unwrap().len());
    assert!(rows.iter().any(|r| r.symmetric != r.rooted));
}

#[test]
fn ordered_sum_entry_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = random_polynomial(6, 3, &mut rng);
    let at_one: Rational = h.terms().map(|(_, c)| c.clone()).sum();
    let job = InterpolationJob::new(4, h, FormulaRule::Symmetric).unwrap();
    assert_eq!(ordered_forest_sum(&job).unwrap(), at_one);
}

#[test]
fn wrong_variable_count_rejected() {
    assert!(InterpolationJob::new(3, RationalPolynomial::zero(2), FormulaRule::Symmetric).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn every_rule_reaches_h_at_one(seed in any::<u64>(), n in 2usize..=4, degree in 0u32..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_polynomial(n * (n - 1) / 2, degree, &mut rng);
        let at_one: Rational = h.terms().map(|(_, c)| c.clone()).sum();
        let job = InterpolationJob::new(n, h, FormulaRule::Symmetric).unwrap();
        for rule in FormulaRule::ALL {
            prop_assert_eq!(forest_sum(&job.with_rule(rule)).unwrap(), at_one.clone());
        }
    }

    #[test]
    fn empty_forest_term_is_h_at_zero(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_polynomial(3, 3, &mut rng);
        let at_zero = h.evaluate(&[int(0), int(0), int(0)]).unwrap();
        let job = InterpolationJob::new(3, h, FormulaRule::Symmetric).unwrap();
        for rule in FormulaRule::ALL {
            prop_assert_eq!(forest_term(&job.with_rule(rule), &Forest::empty(3).unwrap()).unwrap(), at_zero.clone());
        }
    }

    #[test]
    fn forest_sum_is_linear(seed in any::<u64>(), p in -4i64..=4, q in 1i64..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_polynomial(3, 3, &mut rng);
        let b = random_polynomial(3, 3, &mut rng);
        let c = rat(p, q);
        let combined = a.add(&b.scale(&c)).unwrap();
        for rule in FormulaRule::ALL {
            let sum = |h: RationalPolynomial| forest_sum(&InterpolationJob::new(3, h, rule).unwrap()).unwrap();
            prop_assert_eq!(sum(combined.clone()), sum(a.clone()) + &c * sum(b.clone()));
        }
    }
}
