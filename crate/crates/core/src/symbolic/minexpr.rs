use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::RationalPolynomial;
use crate::combinat::permutations;
use crate::error::{Error, Result};
use crate::limits::{self, Limits};
use crate::rational::Rational;

/// Bit set of link positions; bit `l` stands for `w_l`.
pub type LinkMask = u32;

/// Product of path minima `∏ m_S^k`, sorted by mask. A singleton mask is the
/// plain weight `w_l`.
pub type MinMonomial = Vec<(LinkMask, u32)>;

/// Polynomial in the symbols `m_S = min{w_l : l ∈ S}` over `τ` link weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinExpression {
    tau: usize,
    terms: BTreeMap<MinMonomial, Rational>,
}

fn merge(a: &MinMonomial, b: &MinMonomial) -> MinMonomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl MinExpression {
    pub fn zero(tau: usize) -> Self {
        MinExpression {
            tau,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(tau: usize, c: Rational) -> Self {
        let mut e = Self::zero(tau);
        e.add_term(Vec::new(), c);
        e
    }

    pub fn one(tau: usize) -> Self {
        Self::constant(tau, Rational::one())
    }

    /// The weight `w_l` of link position `l`.
    pub fn link(tau: usize, l: usize) -> Result<Self> {
        if l >= tau {
            return Err(Error::UnknownVariable(l));
        }
        Self::min_of(tau, 1 << l)
    }

    /// The symbol `min{w_l : l ∈ mask}`.
    pub fn min_of(tau: usize, mask: LinkMask) -> Result<Self> {
        if mask == 0 || (tau < 32 && mask >> tau != 0) {
            return Err(Error::validation(format!(
                "min-subset {mask:#b} is not a nonempty subset of {tau} links"
            )));
        }
        let mut e = Self::zero(tau);
        e.add_term(vec![(mask, 1)], Rational::one());
        Ok(e)
    }

    /// Reads a polynomial in `τ` variables as a min-free expression.
    pub fn from_polynomial(p: &RationalPolynomial) -> Self {
        let tau = p.nvars();
        let mut e = Self::zero(tau);
        for (exps, c) in p.terms() {
            let mono: MinMonomial = exps
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(l, &k)| (1 << l, k))
                .collect();
            e.add_term(mono, c.clone());
        }
        e
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MinMonomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, mono: MinMonomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn scale(&self, q: &Rational) -> Self {
        let mut out = Self::zero(self.tau);
        if q.is_zero() {
            return out;
        }
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), c * q);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.tau.max(other.tau));
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(merge(ma, mb), ca * cb);
            }
        }
        out
    }

    /// Multiplies by `c · ∏ atoms` in place of a full product.
    pub fn mul_monomial(&self, mono: &MinMonomial, c: &Rational) -> Self {
        let mut out = Self::zero(self.tau);
        for (m, a) in &self.terms {
            out.add_term(merge(m, mono), a * c);
        }
        out
    }

    /// Value at the weights `w` (one entry per link position).
    pub fn evaluate(&self, w: &[Rational]) -> Result<Rational> {
        if w.len() != self.tau {
            return Err(Error::validation("weight vector length differs from τ"));
        }
        let mut total = Rational::zero();
        for (mono, c) in &self.terms {
            let mut t = c.clone();
            for &(mask, k) in mono {
                let m = (0..self.tau)
                    .filter(|l| mask >> l & 1 == 1)
                    .map(|l| &w[l])
                    .min()
                    .expect("nonempty mask");
                t *= crate::rational::pow(m, k as usize);
            }
            total += t;
        }
        Ok(total)
    }

    /// Integral over the simplex `0 < w_{order[0]} < … < w_{order[τ-1]} < 1`.
    ///
    /// On that simplex each `m_S` is the weight of the earliest element of
    /// `S` in `order`, and a monomial `∏ w_{order[k]}^{e_k}` integrates to
    /// `∏_k 1 / (e_0 + … + e_k + k + 1)`.
    pub fn integrate_over_simplex(&self, order: &[usize]) -> Rational {
        let tau = self.tau;
        let mut rank = vec![0usize; tau];
        for (pos, &l) in order.iter().enumerate() {
            rank[l] = pos;
        }
        let mut total = Rational::zero();
        let mut e = vec![0u32; tau];
        for (mono, c) in &self.terms {
            e.iter_mut().for_each(|x| *x = 0);
            for &(mask, k) in mono {
                let first = (0..tau)
                    .filter(|l| mask >> l & 1 == 1)
                    .map(|l| rank[l])
                    .min()
                    .expect("nonempty mask");
                e[first] += k;
            }
            let mut denom = BigInt::one();
            let mut partial = 0u64;
            for (k, &ek) in e.iter().enumerate() {
                partial += ek as u64;
                denom *= BigInt::from(partial + k as u64 + 1);
            }
            total += c / Rational::from_integer(denom);
        }
        total
    }
}

/// Exact `∫_{[0,1]^τ} e dw`, summing the simplex integrals of all `τ!`
/// orderings of the link weights.
pub fn integrate_min_expression(e: &MinExpression) -> Result<Rational> {
    Limits::check("tau", e.tau(), limits::current().max_tau)?;
    if e.is_zero() {
        return Ok(Rational::zero());
    }
    let perms = permutations(e.tau());
    if perms.len() * e.len() < 512 {
        return Ok(perms
            .iter()
            .map(|p| e.integrate_over_simplex(p))
            .fold(Rational::zero(), |a, b| a + b));
    }
    Ok(perms
        .par_iter()
        .map(|p| e.integrate_over_simplex(p))
        .reduce(Rational::zero, |a, b| a + b))
}

impl super::Coefficient for MinExpression {
    fn zero_like(&self) -> Self {
        MinExpression::zero(self.tau)
    }
    fn one_like(&self) -> Self {
        MinExpression::one(self.tau)
    }
    fn add(&self, other: &Self) -> Self {
        MinExpression::add(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        MinExpression::mul(self, other)
    }
    fn scale(&self, q: &Rational) -> Self {
        MinExpression::scale(self, q)
    }
    fn vanishes(&self) -> bool {
        self.terms.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn single_weight() {
        let e = MinExpression::link(1, 0).unwrap();
        assert_eq!(integrate_min_expression(&e).unwrap(), rat(1, 2));
    }

    #[test]
    fn min_of_two() {
        let e = MinExpression::min_of(2, 0b11).unwrap();
        assert_eq!(integrate_min_expression(&e).unwrap(), rat(1, 3));
    }

    #[test]
    fn constant_volume() {
        let e = MinExpression::constant(2, int(1));
        assert_eq!(integrate_min_expression(&e).unwrap(), int(1));
    }

    #[test]
    fn rejects_bad_subsets_and_large_tau() {
        assert!(MinExpression::min_of(2, 0b100).is_err());
        assert!(MinExpression::min_of(2, 0).is_err());
        let big = MinExpression::one(9);
        assert!(integrate_min_expression(&big).is_err());
    }

    #[test]
    fn min_squared_times_weight() {
        // ∫∫ min(a,b)^2 · a = 2/15 + ... check against brute simplex split:
        // region a<b: ∫_0^1 ∫_0^b a^3 da db = 1/20; region b<a: ∫_0^1 ∫_0^a b^2 a db da = 1/15
        let m = MinExpression::min_of(2, 0b11).unwrap();
        let e = m.mul(&m).mul(&MinExpression::link(2, 0).unwrap());
        assert_eq!(integrate_min_expression(&e).unwrap(), rat(1, 20) + rat(1, 15));
    }
}
