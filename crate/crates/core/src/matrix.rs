//! Dense matrices over exact rationals.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};

#[derive(Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_strings()).finish()
    }
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::validation("ragged matrix rows"));
        }
        Ok(QMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        QMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, other: &QMatrix) -> Result<QMatrix> {
        if self.cols != other.rows {
            return Err(Error::validation(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(Rational::zero(), |acc, k| acc + &self[(i, k)] * &other[(k, j)])
        }))
    }

    /// Entrywise product.
    pub fn hadamard(&self, other: &QMatrix) -> Result<QMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::validation(format!(
                "dimension mismatch {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect(),
        })
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> QMatrix {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    /// Determinant by Gaussian elimination with exact pivots.
    pub fn determinant(&self) -> Result<Rational> {
        if !self.is_square() {
            return Err(Error::validation("determinant of a non-square matrix"));
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = Rational::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&i| !a[i * n + k].is_zero()) else {
                return Ok(Rational::zero());
            };
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                det = -det;
            }
            let pivot = a[k * n + k].clone();
            det *= &pivot;
            for i in k + 1..n {
                if a[i * n + k].is_zero() {
                    continue;
                }
                let factor = &a[i * n + k] / &pivot;
                for j in k + 1..n {
                    let delta = &factor * &a[k * n + j];
                    a[i * n + j] -= delta;
                }
            }
        }
        Ok(det)
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(format_rational).collect())
            .collect()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(crate::rational::to_f64).collect())
            .collect()
    }

    pub fn max_abs(&self) -> Rational {
        self.data.iter().map(|q| q.abs()).max().unwrap_or_else(Rational::zero)
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl Serialize for QMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

/// Why a symmetric matrix failed the semidefiniteness test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PsdWitness {
    /// A diagonal entry of the current Schur complement is negative.
    NegativePivot {
        index: usize,
        #[serde(with = "crate::rational::serde_str")]
        value: Rational,
    },
    /// Zero diagonal entries at `i` and `j` with a nonzero coupling: the
    /// principal 2x2 minor is `-b^2 < 0`.
    ZeroDiagonalCoupling {
        i: usize,
        j: usize,
        #[serde(with = "crate::rational::serde_str")]
        coupling: Rational,
    },
}

/// Result of the exact semidefiniteness test.
///
/// `pivot_order` lists indices in elimination order; `minors[k]` is the
/// principal minor on the first `k + 1` indices of that order, and
/// `pivots[k] = minors[k] / minors[k - 1]` whenever the previous minor is
/// nonzero. Trailing zero pivots belong to a vanishing Schur complement.
#[derive(Clone, Debug, Serialize)]
pub struct PsdCertificate {
    pub is_psd: bool,
    pub pivot_order: Vec<usize>,
    #[serde(with = "crate::rational::serde_str::vec")]
    pub pivots: Vec<Rational>,
    #[serde(with = "crate::rational::serde_str::vec")]
    pub minors: Vec<Rational>,
    pub witness: Option<PsdWitness>,
}

/// `B Bᵀ` for a random `n×n` matrix `B` with small rational entries,
/// occasionally rank deficient.
pub fn random_psd(n: usize, rng: &mut impl rand::Rng) -> QMatrix {
    let rank = if n > 1 && rng.gen_bool(0.25) {
        rng.gen_range(1..n)
    } else {
        n
    };
    let b = QMatrix::from_fn(n, rank, |_, _| {
        Rational::new(rng.gen_range(-3i64..=3).into(), rng.gen_range(1i64..=3).into())
    });
    b.mul(&b.transpose()).expect("conforming shapes")
}

/// Exact positive semidefiniteness by symmetric pivoted elimination.
///
/// Positive diagonal entries are eliminated one at a time (Schur
/// complements). A negative diagonal entry, or a zero diagonal entry with a
/// nonzero off-diagonal partner, disproves semidefiniteness.
pub fn psd_certificate(m: &QMatrix) -> Result<PsdCertificate> {
    if !m.is_symmetric() {
        return Err(Error::validation("semidefiniteness test needs a symmetric matrix"));
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut order = Vec::with_capacity(n);
    let mut pivots = Vec::with_capacity(n);
    let mut minors = Vec::with_capacity(n);
    let mut minor = Rational::one();

    while !remaining.is_empty() {
        if let Some(&i) = remaining.iter().find(|&&i| a[(i, i)].is_negative()) {
            return Ok(PsdCertificate {
                is_psd: false,
                pivot_order: order,
                pivots,
                minors,
                witness: Some(PsdWitness::NegativePivot {
                    index: i,
                    value: a[(i, i)].clone(),
                }),
            });
        }
        let Some(pos) = remaining.iter().position(|&i| a[(i, i)].is_positive()) else {
            for (x, &i) in remaining.iter().enumerate() {
                for &j in &remaining[x + 1..] {
                    if !a[(i, j)].is_zero() {
                        return Ok(PsdCertificate {
                            is_psd: false,
                            pivot_order: order,
                            pivots,
                            minors,
                            witness: Some(PsdWitness::ZeroDiagonalCoupling {
                                i,
                                j,
                                coupling: a[(i, j)].clone(),
                            }),
                        });
                    }
                }
            }
            for &i in &remaining {
                order.push(i);
                pivots.push(Rational::zero());
                minors.push(Rational::zero());
            }
            break;
        };
        let p = remaining.remove(pos);
        let pivot = a[(p, p)].clone();
        for &i in &remaining {
            if a[(i, p)].is_zero() {
                continue;
            }
            let factor = &a[(i, p)] / &pivot;
            for &j in &remaining {
                let delta = &factor * &a[(p, j)];
                a[(i, j)] -= delta;
            }
        }
        minor *= &pivot;
        order.push(p);
        pivots.push(pivot);
        minors.push(minor.clone());
    }
    Ok(PsdCertificate {
        is_psd: true,
        pivot_order: order,
        pivots,
        minors,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn m(rows: &[&[i64]]) -> QMatrix {
        QMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()).unwrap()
    }

    #[test]
    fn determinant_small() {
        assert_eq!(m(&[&[1, 2], &[3, 4]]).determinant().unwrap(), int(-2));
        assert_eq!(m(&[&[0, 1], &[1, 0]]).determinant().unwrap(), int(-1));
        assert_eq!(m(&[&[1, 1], &[1, 1]]).determinant().unwrap(), int(0));
        assert_eq!(QMatrix::identity(4).determinant().unwrap(), int(1));
    }

    #[test]
    fn psd_catches_singular_indefinite() {
        // leading minors 0, 0 but not semidefinite
        let c = psd_certificate(&m(&[&[0, 0], &[0, -1]])).unwrap();
        assert!(!c.is_psd);
        let c = psd_certificate(&m(&[&[0, 1], &[1, 0]])).unwrap();
        assert!(matches!(c.witness, Some(PsdWitness::ZeroDiagonalCoupling { .. })));
        let c = psd_certificate(&m(&[&[1, 1], &[1, 1]])).unwrap();
        assert!(c.is_psd);
        assert_eq!(c.minors, vec![int(1), int(0)]);
    }

    #[test]
    fn psd_rejects_asymmetric() {
        assert!(psd_certificate(&m(&[&[1, 2], &[0, 1]])).is_err());
    }

    #[test]
    fn psd_minors_match_determinants() {
        let a = QMatrix::from_rows(vec![
            vec![int(2), rat(1, 2), int(0)],
            vec![rat(1, 2), int(1), rat(1, 3)],
            vec![int(0), rat(1, 3), int(1)],
        ])
        .unwrap();
        let c = psd_certificate(&a).unwrap();
        assert!(c.is_psd);
        assert_eq!(c.minors.last().unwrap(), &a.determinant().unwrap());
    }
}
