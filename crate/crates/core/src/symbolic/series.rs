use std::fmt::Debug;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Ring operations needed by the series and Mayer machinery.
///
/// Implemented for [`Rational`] and for [`FormalSeries`], so a series whose
/// coefficients are themselves truncated series (a bookkeeping variable on
/// top of the coupling) reuses the same code.
pub trait Coefficient: Clone + Debug + PartialEq + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, q: &Rational) -> Self;
    fn vanishes(&self) -> bool;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    fn is_one(&self) -> bool {
        *self == self.one_like()
    }
}

impl Coefficient for Rational {
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn one_like(&self) -> Self {
        Rational::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn scale(&self, q: &Rational) -> Self {
        self * q
    }
    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }
}

/// `exp` of a truncated series with zero constant term.
pub fn exp_series<C: Coefficient>(a: &[C]) -> Result<Vec<C>> {
    let Some(first) = a.first() else {
        return Ok(Vec::new());
    };
    if !first.vanishes() {
        return Err(Error::validation(
            "exponential needs a zero constant term to stay rational",
        ));
    }
    let mut e = vec![first.one_like()];
    for k in 1..a.len() {
        let mut acc = first.zero_like();
        for j in 1..=k {
            let t = a[j].mul(&e[k - j]).scale(&Rational::from_integer(j.into()));
            acc = acc.add(&t);
        }
        e.push(acc.scale(&Rational::new(1.into(), k.into())));
    }
    Ok(e)
}

/// `log` of a truncated series with constant term one.
pub fn log_series<C: Coefficient>(a: &[C]) -> Result<Vec<C>> {
    let Some(first) = a.first() else {
        return Ok(Vec::new());
    };
    if !first.is_one() {
        return Err(Error::LogConstantTerm(format!("{first:?}")));
    }
    let mut l = vec![first.zero_like()];
    for k in 1..a.len() {
        let mut acc = a[k].scale(&Rational::from_integer(k.into()));
        for j in 1..k {
            let t = l[j].mul(&a[k - j]).scale(&Rational::from_integer(j.into()));
            acc = acc.sub(&t);
        }
        l.push(acc.scale(&Rational::new(1.into(), k.into())));
    }
    Ok(l)
}

/// Power series `c₀ + c₁ t + … + c_p t^p` truncated at order `p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FormalSeries {
    #[serde(with = "crate::rational::serde_str::vec")]
    coeffs: Vec<Rational>,
}

impl FormalSeries {
    /// Coefficients `c₀..c_p`; the order is `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty(), "a series carries at least c0");
        FormalSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        FormalSeries {
            coeffs: vec![Rational::zero(); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(order, Rational::one())
    }

    pub fn constant(order: usize, c: Rational) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// The series variable `t` (needs order ≥ 1 to be nonzero).
    pub fn variable(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = Rational::one();
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, k: usize, c: Rational) {
        if k <= self.order() {
            self.coeffs[k] = c;
        }
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, Rational::zero());
        FormalSeries { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        FormalSeries {
            coeffs: (0..=order).map(|k| &self.coeffs[k] + &other.coeffs[k]).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, q: &Rational) -> Self {
        FormalSeries {
            coeffs: self.coeffs.iter().map(|c| c * q).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut coeffs = vec![Rational::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if Zero::is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                coeffs[i + j] += a * b;
            }
        }
        FormalSeries { coeffs }
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::one(self.order()), |acc, _| acc.mul(self))
    }

    /// Substitutes `t -> c t`.
    pub fn rescale_variable(&self, c: &Rational) -> Self {
        let mut factor = Rational::one();
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            coeffs.push(a * &factor);
            factor *= c;
        }
        FormalSeries { coeffs }
    }

    /// Multiplicative inverse; needs a nonzero constant term.
    pub fn inverse(&self) -> Result<Self> {
        let c0 = &self.coeffs[0];
        if Zero::is_zero(c0) {
            return Err(Error::validation("inverse of a series with zero constant term"));
        }
        let mut inv = vec![c0.recip()];
        for k in 1..=self.order() {
            let mut acc = Rational::zero();
            for j in 1..=k {
                acc += &self.coeffs[j] * &inv[k - j];
            }
            inv.push(-acc / c0);
        }
        Ok(FormalSeries { coeffs: inv })
    }

    pub fn exp(&self) -> Result<Self> {
        Ok(FormalSeries {
            coeffs: exp_series(&self.coeffs)?,
        })
    }

    /// Natural logarithm; the constant term must be exactly one.
    pub fn log(&self) -> Result<Self> {
        if Zero::is_zero(&self.coeffs[0]) {
            return Err(Error::LogConstantTerm("0".into()));
        }
        Ok(FormalSeries {
            coeffs: log_series(&self.coeffs)?,
        })
    }
}

impl Coefficient for FormalSeries {
    fn zero_like(&self) -> Self {
        Self::zero(self.order())
    }
    fn one_like(&self) -> Self {
        Self::one(self.order())
    }
    fn add(&self, other: &Self) -> Self {
        FormalSeries::add(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        FormalSeries::mul(self, other)
    }
    fn scale(&self, q: &Rational) -> Self {
        FormalSeries::scale(self, q)
    }
    fn vanishes(&self) -> bool {
        FormalSeries::is_zero(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn log_one_plus_z() {
        let s = FormalSeries::new(vec![int(1), int(1), int(0), int(0)]);
        let l = s.log().unwrap();
        assert_eq!(l.coeffs(), &[int(0), int(1), rat(-1, 2), rat(1, 3)]);
    }

    #[test]
    fn exp_of_zero() {
        assert_eq!(FormalSeries::zero(3).exp().unwrap(), FormalSeries::one(3));
    }

    #[test]
    fn log_of_single_box_series() {
        let s = FormalSeries::new(vec![int(1), int(-3), rat(105, 2)]);
        assert_eq!(s.log().unwrap().coeffs(), &[int(0), int(-3), int(48)]);
    }

    #[test]
    fn log_rejects_bad_constant() {
        assert!(FormalSeries::new(vec![int(0), int(1)]).log().is_err());
        assert!(FormalSeries::new(vec![int(2), int(1)]).log().is_err());
        assert!(FormalSeries::new(vec![int(1), int(1)]).exp().is_err());
    }

    #[test]
    fn inverse_roundtrip() {
        let s = FormalSeries::new(vec![int(2), int(-1), rat(1, 3), int(5)]);
        let p = s.mul(&s.inverse().unwrap());
        assert_eq!(p, FormalSeries::one(3));
    }

    #[test]
    fn nested_series_coefficients() {
        // exp(a z) with a a λ-series
        let a = FormalSeries::new(vec![int(0), int(1), int(2)]);
        let z = vec![a.zero_like(), a.clone(), a.zero_like()];
        let e = exp_series(&z).unwrap();
        assert_eq!(e[2], a.mul(&a).scale(&rat(1, 2)));
    }
}
