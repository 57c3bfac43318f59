use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::{One, Signed};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forest::Forest;
use crate::matrix::QMatrix;
use crate::rational::{format_rational, to_f64, Rational};
use crate::weakening::{symmetric_weakening, WeightAssignment};

/// Vectors `f_i`, `g_j` (rows of `D` and `E`) with `C_ij = ⟨f_i, g_j⟩`.
#[derive(Clone, Debug, Serialize)]
pub struct GramFactorization {
    f: QMatrix,
    g: QMatrix,
}

impl GramFactorization {
    pub fn from_matrices(d: &QMatrix, e: &QMatrix) -> Result<Self> {
        if d.cols() != e.cols() {
            return Err(Error::validation(format!(
                "factor widths differ: {} and {}",
                d.cols(),
                e.cols()
            )));
        }
        Ok(GramFactorization {
            f: d.clone(),
            g: e.clone(),
        })
    }

    pub fn f(&self) -> &QMatrix {
        &self.f
    }

    pub fn g(&self) -> &QMatrix {
        &self.g
    }

    /// `⟨f_i, g_j⟩`.
    pub fn gram(&self) -> QMatrix {
        self.f.mul(&self.g.transpose()).expect("equal widths")
    }

    fn norms_squared(m: &QMatrix) -> Vec<Rational> {
        (0..m.rows()).map(|i| m.row(i).iter().map(|x| x * x).sum()).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GramReport {
    #[serde(with = "crate::rational::serde_str")]
    pub determinant: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub determinant_squared: Rational,
    /// `∏ ‖f_i‖² ‖g_i‖²`.
    #[serde(with = "crate::rational::serde_str")]
    pub bound_squared: Rational,
    /// `|det B| / ∏ ‖f_i‖ ‖g_i‖`.
    pub ratio: f64,
}

/// `|det [w_ij ⟨f_i, g_j⟩]| ≤ ∏ ‖f_i‖ ‖g_i‖` with `w` the symmetric
/// weakening of `forest`, compared exactly after squaring.
pub fn gram_bound_check(fact: &GramFactorization, forest: &Forest, w: &WeightAssignment) -> Result<GramReport> {
    let n = forest.n();
    if fact.f.rows() != n || fact.g.rows() != n {
        return Err(Error::validation(format!(
            "{} vertices but {} and {} vectors",
            n,
            fact.f.rows(),
            fact.g.rows()
        )));
    }
    let gram = fact.gram();
    let mut b = QMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = symmetric_weakening(forest, w, i + 1, j + 1)? * &gram[(i, j)];
        }
    }
    let det = b.determinant()?;
    let det_sq = &det * &det;
    let bound: Rational = GramFactorization::norms_squared(&fact.f)
        .into_iter()
        .chain(GramFactorization::norms_squared(&fact.g))
        .fold(Rational::one(), |acc, x| acc * x);
    let ratio = if bound.is_positive() {
        (to_f64(&det_sq) / to_f64(&bound)).sqrt()
    } else {
        0.0
    };
    if det_sq > bound {
        return Err(Error::InequalityFailure {
            check: "gram determinant bound",
            witness: format!(
                "forest {:?}, det² = {} > {}",
                forest.links().iter().map(|l| l.to_string()).collect::<Vec<_>>(),
                format_rational(&det_sq),
                format_rational(&bound)
            ),
        });
    }
    Ok(GramReport {
        determinant: det,
        determinant_squared: det_sq,
        bound_squared: bound,
        ratio,
    })
}

/// Floating-point `V` with `V Vᵀ ≈ W`, from the eigendecomposition; its rows
/// make `w_ij ⟨f_i, g_j⟩ = ⟨v_i ⊗ f_i, v_j ⊗ g_j⟩` explicit.
#[derive(Clone, Debug, Serialize)]
pub struct SquareRoot {
    pub rows: Vec<Vec<f64>>,
    pub min_eigenvalue: f64,
    /// `max |V Vᵀ - W|`.
    pub residual: f64,
}

pub fn weakening_square_root(w: &QMatrix) -> Result<SquareRoot> {
    if !w.is_symmetric() {
        return Err(Error::validation("weakening matrix is not symmetric"));
    }
    let n = w.rows();
    let m = DMatrix::from_fn(n, n, |i, j| to_f64(&w[(i, j)]));
    let eig = SymmetricEigen::new(m.clone());
    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| x.max(0.0).sqrt()));
    let v = &eig.eigenvectors * sqrt * eig.eigenvectors.transpose();
    let residual = (&v * v.transpose() - &m).amax();
    Ok(SquareRoot {
        rows: (0..n).map(|i| v.row(i).iter().copied().collect()).collect(),
        min_eigenvalue,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::enumerate_forests;
    use crate::rational::{int, rat};
    use crate::weakening::{Rule, WeakeningMatrix};

    fn vectors(rows: &[&[i64]]) -> QMatrix {
        QMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()).unwrap()
    }

    #[test]
    fn orthonormal_vectors_saturate() {
        let id = QMatrix::identity(3);
        let fact = GramFactorization::from_matrices(&id, &id).unwrap();
        let f = Forest::from_pairs(3, &[(1, 2)]).unwrap();
        let w = WeightAssignment::new(&f, vec![rat(1, 2)]).unwrap();
        let r = gram_bound_check(&fact, &f, &w).unwrap();
        assert_eq!(r.determinant, int(1));
        assert_eq!(r.bound_squared, int(1));
    }

    #[test]
    fn holds_on_all_forests() {
        let f = vectors(&[&[1, 2], &[-1, 1], &[0, 3]]);
        let g = vectors(&[&[2, 0], &[1, 1], &[1, -2]]);
        let fact = GramFactorization::from_matrices(&f, &g).unwrap();
        for forest in enumerate_forests(3).unwrap() {
            let weights = (0..forest.len()).map(|k| rat(k as i64 + 1, 4)).collect();
            let w = WeightAssignment::new(&forest, weights).unwrap();
            let r = gram_bound_check(&fact, &forest, &w).unwrap();
            assert!(r.determinant_squared <= r.bound_squared);
        }
    }

    #[test]
    fn width_mismatch_rejected() {
        assert!(GramFactorization::from_matrices(&QMatrix::identity(2), &QMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn square_root_reproduces_weakening() {
        let f = Forest::from_pairs(4, &[(1, 2), (2, 3), (2, 4)]).unwrap();
        let w = WeightAssignment::new(&f, vec![rat(1, 3), rat(3, 4), int(0)]).unwrap();
        let wm = WeakeningMatrix::build(&f, &w, Rule::Symmetric).unwrap();
        let s = weakening_square_root(&wm.matrix).unwrap();
        assert!(s.residual < 1e-12);
        assert!(s.min_eigenvalue > -1e-12);
        for row in &s.rows {
            let norm: f64 = row.iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }
}
