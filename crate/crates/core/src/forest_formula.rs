//! Taylor forest formulas for polynomial functions of the pair variables
//! `x_l`, `l` ranging over all pairs of `{1..n}`, and the exact check that
//! every rule sums to `H(1)`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinat::permutations;
use crate::error::{Error, Result};
use crate::forest::{all_links, enumerate_forests, link_index, Forest, Link};
use crate::rational::{format_rational, Rational};
use crate::symbolic::{integrate_min_expression, MinExpression, RationalPolynomial};
use crate::weakening::{rooted_symbol, symmetric_symbol, WeakeningSymbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaRule {
    Symmetric,
    Rooted,
    Ordered,
}

impl FormulaRule {
    pub const ALL: [FormulaRule; 3] = [FormulaRule::Symmetric, FormulaRule::Rooted, FormulaRule::Ordered];
}

type DerivativeCache = Arc<Mutex<HashMap<u64, Arc<RationalPolynomial>>>>;

/// A polynomial `H` in the `n(n-1)/2` pair variables together with a rule.
/// Jobs derived with [`InterpolationJob::with_rule`] share derivatives.
#[derive(Clone, Debug)]
pub struct InterpolationJob {
    n: usize,
    h: RationalPolynomial,
    rule: FormulaRule,
    cache: DerivativeCache,
}

impl InterpolationJob {
    pub fn new(n: usize, h: RationalPolynomial, rule: FormulaRule) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("n must be positive"));
        }
        let pairs = n * (n - 1) / 2;
        if h.nvars() != pairs {
            return Err(Error::validation(format!(
                "H has {} variables but n = {n} has {pairs} pairs",
                h.nvars()
            )));
        }
        Ok(InterpolationJob {
            n,
            h,
            rule,
            cache: Arc::default(),
        })
    }

    pub fn with_rule(&self, rule: FormulaRule) -> Self {
        InterpolationJob { rule, ..self.clone() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> &RationalPolynomial {
        &self.h
    }

    pub fn rule(&self) -> FormulaRule {
        self.rule
    }

    /// `H` with every `x_l := 1`.
    pub fn value_at_one(&self) -> Result<Rational> {
        self.h.evaluate(&vec![Rational::one(); self.h.nvars()])
    }

    /// `∏_{l ∈ F} ∂/∂x_l H`.
    pub fn derivative(&self, forest: &Forest) -> Result<Arc<RationalPolynomial>> {
        let indices: Vec<usize> = forest.links().iter().map(|l| link_index(self.n, *l)).collect();
        let key = indices.iter().fold(0u64, |k, i| k | 1 << i);
        if let Some(d) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(d.clone());
        }
        let mut d = self.h.clone();
        for i in indices {
            if d.is_zero() {
                break;
            }
            d = d.partial_derivative(i)?;
        }
        let d = Arc::new(d);
        self.cache.lock().expect("cache lock").insert(key, d.clone());
        Ok(d)
    }
}

/// Weakening symbol of every pair variable, indexed like the variables.
fn pair_symbols(forest: &Forest, rule: FormulaRule) -> Result<Vec<WeakeningSymbol>> {
    let layers = forest.layers();
    all_links(forest.n())
        .into_iter()
        .map(|l| match rule {
            FormulaRule::Rooted => rooted_symbol(forest, &layers, l.lo(), l.hi()),
            _ => symmetric_symbol(forest, l.lo(), l.hi()),
        })
        .collect()
}

/// Substitutes `x_v := symbol_v` into `d`.
fn substitute_symbols(d: &RationalPolynomial, symbols: &[WeakeningSymbol], tau: usize) -> MinExpression {
    let mut out = MinExpression::zero(tau);
    'terms: for (exps, c) in d.terms() {
        let mut mono: BTreeMap<u32, u32> = BTreeMap::new();
        for (v, &k) in exps.iter().enumerate() {
            if k == 0 {
                continue;
            }
            match symbols[v] {
                WeakeningSymbol::Zero => continue 'terms,
                WeakeningSymbol::One => {}
                WeakeningSymbol::Min(mask) => *mono.entry(mask).or_default() += k,
            }
        }
        out.add_term(mono.into_iter().collect(), c.clone());
    }
    out
}

/// Polynomial in `w` for the rooted rule, where every symbol is `0`, `1` or a single weight.
fn rooted_polynomial(d: &RationalPolynomial, symbols: &[WeakeningSymbol], tau: usize) -> Result<RationalPolynomial> {
    let mut terms = Vec::new();
    'terms: for (exps, c) in d.terms() {
        let mut w = vec![0u32; tau];
        for (v, &k) in exps.iter().enumerate() {
            if k == 0 {
                continue;
            }
            match symbols[v] {
                WeakeningSymbol::Zero => continue 'terms,
                WeakeningSymbol::One => {}
                WeakeningSymbol::Min(mask) => {
                    debug_assert_eq!(mask.count_ones(), 1);
                    w[mask.trailing_zeros() as usize] += k;
                }
            }
        }
        terms.push((w, c.clone()));
    }
    RationalPolynomial::from_terms(tau, terms)
}

/// `∫₀¹…∫₀¹` of a polynomial over the unit cube.
fn integrate_cube(p: &RationalPolynomial) -> Result<Rational> {
    let mut q = p.clone();
    for v in 0..p.nvars() {
        q = q.integrate_unit_interval(v)?;
    }
    Ok(q.coefficient(&vec![0; p.nvars()]))
}

/// Contribution of one ordering of the forest's links: the `k`-th added
/// link carries `t_k`, with `1 ≥ t_1 ≥ … ≥ t_τ ≥ 0`, and a connected pair
/// is weakened by the parameter of the latest link added on its path.
fn ordered_term(d: &RationalPolynomial, forest: &Forest, order: &[usize]) -> Result<Rational> {
    let tau = forest.len();
    let mut rank = vec![0usize; tau];
    for (k, &pos) in order.iter().enumerate() {
        rank[pos] = k;
    }
    // symbol per pair: None = 0, Some(None) = 1, Some(Some(k)) = t_k
    let slots: Vec<Option<Option<usize>>> = all_links(forest.n())
        .into_iter()
        .map(|l| {
            Ok(forest
                .path(l.lo(), l.hi())?
                .map(|path| path.iter().map(|p| rank[forest.position(*p).expect("path link")]).max()))
        })
        .collect::<Result<_>>()?;
    let mut total = Rational::zero();
    'terms: for (exps, c) in d.terms() {
        let mut e = vec![0u32; tau];
        for (v, &k) in exps.iter().enumerate() {
            if k == 0 {
                continue;
            }
            match slots[v] {
                None => continue 'terms,
                Some(None) => {}
                Some(Some(slot)) => e[slot] += k,
            }
        }
        // ∫ t_1^{e_1}…t_τ^{e_τ} over the ordered simplex, innermost t_τ first
        let mut acc = 0u32;
        let mut denom = Rational::one();
        for k in (0..tau).rev() {
            acc += e[k] + 1;
            denom *= Rational::from_integer(acc.into());
        }
        total += c / denom;
    }
    Ok(total)
}

/// `∫ dw (∂^F H)(X_F(w))` for the job's rule; for the ordered rule the
/// contributions of all `τ!` link orders are added.
pub fn forest_term(job: &InterpolationJob, forest: &Forest) -> Result<Rational> {
    if forest.n() != job.n {
        return Err(Error::validation(format!(
            "forest on {} vertices for a job with n = {}",
            forest.n(),
            job.n
        )));
    }
    let d = job.derivative(forest)?;
    if d.is_zero() {
        return Ok(Rational::zero());
    }
    let tau = forest.len();
    match job.rule {
        FormulaRule::Symmetric => {
            let symbols = pair_symbols(forest, job.rule)?;
            integrate_min_expression(&substitute_symbols(&d, &symbols, tau))
        }
        FormulaRule::Rooted => {
            let symbols = pair_symbols(forest, job.rule)?;
            integrate_cube(&rooted_polynomial(&d, &symbols, tau)?)
        }
        FormulaRule::Ordered => {
            crate::limits::Limits::check("tau", tau, crate::limits::current().max_tau)?;
            permutations(tau)
                .iter()
                .map(|order| ordered_term(&d, forest, order))
                .sum()
        }
    }
}

/// `Σ_F forest_term`, over every forest on `n` vertices.
pub fn forest_sum(job: &InterpolationJob) -> Result<Rational> {
    enumerate_forests(job.n)?
        .par_iter()
        .map(|f| forest_term(job, f))
        .try_reduce(Rational::zero, |a, b| Ok(a + b))
}

/// The ordered formula, summed over (forest, link order) pairs.
pub fn ordered_forest_sum(job: &InterpolationJob) -> Result<Rational> {
    forest_sum(&job.with_rule(FormulaRule::Ordered))
}

/// Per-forest terms under each rule, in enumeration order.
#[derive(Clone, Debug, Serialize)]
pub struct TermRow {
    pub links: Vec<Link>,
    pub symmetric: String,
    pub rooted: String,
    pub ordered: String,
}

pub fn term_table(job: &InterpolationJob) -> Result<Vec<TermRow>> {
    enumerate_forests(job.n)?
        .par_iter()
        .map(|f| {
            let term = |rule| forest_term(&job.with_rule(rule), f).map(|q| format_rational(&q));
            Ok(TermRow {
                links: f.links().to_vec(),
                symmetric: term(FormulaRule::Symmetric)?,
                rooted: term(FormulaRule::Rooted)?,
                ordered: term(FormulaRule::Ordered)?,
            })
        })
        .collect()
}

/// Random `H` of total degree `≤ degree` in `nvars` variables, each
/// variable of degree `≤ 3`, with small rational coefficients.
pub fn random_polynomial(nvars: usize, degree: u32, rng: &mut impl Rng) -> RationalPolynomial {
    let nterms = rng.gen_range(1..=6);
    let mut terms = Vec::with_capacity(nterms);
    for _ in 0..nterms {
        let mut e = vec![0u32; nvars];
        if nvars > 0 {
            let total = rng.gen_range(0..=degree);
            for _ in 0..total {
                let v = rng.gen_range(0..nvars);
                if e[v] < 3 {
                    e[v] += 1;
                }
            }
        }
        let num = rng.gen_range(-6i64..=6);
        let den = rng.gen_range(1i64..=5);
        terms.push((e, Rational::new(num.into(), den.into())));
    }
    RationalPolynomial::from_terms(nvars, terms).expect("exponent vectors sized to nvars")
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub h: String,
    pub expected: String,
    pub symmetric: String,
    pub rooted: String,
    pub ordered: String,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub n: usize,
    pub degree: u32,
    pub seed: u64,
    pub trials: Vec<TrialOutcome>,
    pub failures: usize,
}

/// Draws `trials` random polynomials and compares every rule's sum with `H(1)`.
pub fn verify_identity(
    n: usize,
    degree: u32,
    trials: usize,
    seed: u64,
    rules: &[FormulaRule],
) -> Result<IdentityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nvars = n * (n - 1) / 2;
    let hs: Vec<RationalPolynomial> = (0..trials)
        .map(|_| random_polynomial(nvars, degree, &mut rng))
        .collect();
    let outcomes = hs
        .into_iter()
        .enumerate()
        .map(|(trial, h)| {
            let job = InterpolationJob::new(n, h, FormulaRule::Symmetric)?;
            let expected = job.value_at_one()?;
            let mut sums = HashMap::new();
            for &rule in rules {
                sums.insert(rule, forest_sum(&job.with_rule(rule))?);
            }
            let ok = sums.values().all(|s| *s == expected);
            let show = |rule| sums.get(&rule).map(format_rational).unwrap_or_default();
            Ok(TrialOutcome {
                trial,
                h: job.h().to_string(),
                expected: format_rational(&expected),
                symmetric: show(FormulaRule::Symmetric),
                rooted: show(FormulaRule::Rooted),
                ordered: show(FormulaRule::Ordered),
                ok,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let failures = outcomes.iter().filter(|o| !o.ok).count();
    Ok(IdentityReport {
        n,
        degree,
        seed,
        trials: outcomes,
        failures,
    })
}
