use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Exponent vector, one entry per declared variable.
pub type Exponents = Vec<u32>;

/// Sparse multivariate polynomial with rational coefficients over a fixed
/// number of variables. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalPolynomial {
    nvars: usize,
    terms: BTreeMap<Exponents, Rational>,
}

impl RationalPolynomial {
    pub fn zero(nvars: usize) -> Self {
        RationalPolynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn variable(nvars: usize, var: usize) -> Result<Self> {
        if var >= nvars {
            return Err(Error::UnknownVariable(var));
        }
        let mut e = vec![0; nvars];
        e[var] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, Rational::one());
        Ok(p)
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Exponents, Rational)>) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::validation(format!(
                    "exponent vector of length {} for {nvars} variables",
                    e.len()
                )));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum::<u32>()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e[var]).max().unwrap_or(0)
    }

    pub fn coefficient(&self, exponents: &[u32]) -> Rational {
        self.terms.get(exponents).cloned().unwrap_or_else(Rational::zero)
    }

    pub(crate) fn add_term(&mut self, e: Exponents, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
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

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::validation(format!(
                "variable sets differ ({} vs {})",
                self.nvars, other.nvars
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, q: &Rational) -> Self {
        let mut out = Self::zero(self.nvars);
        if q.is_zero() {
            return out;
        }
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), c * q);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut out = Self::one(self.nvars);
        for _ in 0..k {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Formal partial derivative with respect to variable `var`.
    pub fn partial_derivative(&self, var: usize) -> Result<Self> {
        if var >= self.nvars {
            return Err(Error::UnknownVariable(var));
        }
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[var] -= 1;
            out.add_term(d, c * Rational::from_integer(e[var].into()));
        }
        Ok(out)
    }

    /// Replaces variable `var` by the polynomial `value`.
    pub fn substitute(&self, var: usize, value: &Self) -> Result<Self> {
        if var >= self.nvars {
            return Err(Error::UnknownVariable(var));
        }
        self.check_compatible(value)?;
        let max = self.degree_in(var) as usize;
        let mut powers = vec![Self::one(self.nvars)];
        for k in 1..=max {
            powers.push(powers[k - 1].mul(value)?);
        }
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut rest = e.clone();
            rest[var] = 0;
            let mut head = Self::zero(self.nvars);
            head.add_term(rest, c.clone());
            out = out.add(&head.mul(&powers[e[var] as usize])?)?;
        }
        Ok(out)
    }

    /// Replaces variable `var` by a rational constant.
    pub fn substitute_value(&self, var: usize, value: &Rational) -> Result<Self> {
        if var >= self.nvars {
            return Err(Error::UnknownVariable(var));
        }
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut rest = e.clone();
            rest[var] = 0;
            out.add_term(rest, c * crate::rational::pow(value, e[var] as usize));
        }
        Ok(out)
    }

    pub fn evaluate(&self, point: &[Rational]) -> Result<Rational> {
        if point.len() != self.nvars {
            return Err(Error::validation(format!(
                "point of dimension {} for {} variables",
                point.len(),
                self.nvars
            )));
        }
        let mut total = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    t *= crate::rational::pow(x, k as usize);
                }
            }
            total += t;
        }
        Ok(total)
    }

    /// `∫₀¹ p d(var)`, leaving a polynomial in the other variables.
    pub fn integrate_unit_interval(&self, var: usize) -> Result<Self> {
        if var >= self.nvars {
            return Err(Error::UnknownVariable(var));
        }
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut rest = e.clone();
            rest[var] = 0;
            out.add_term(rest, c / Rational::from_integer((e[var] + 1).into()));
        }
        Ok(out)
    }
}

impl fmt::Debug for RationalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RationalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (v, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*x{v}")?,
                    _ => write!(f, "*x{v}^{k}")?,
                }
            }
        }
        Ok(())
    }
}
