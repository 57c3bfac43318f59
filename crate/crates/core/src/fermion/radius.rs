use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{pressure_series_tree, GrassmannModel};
use crate::error::{Error, Result};
use crate::matrix::QMatrix;
use crate::rational::{abs, factorial, format_rational, int, pow, rat, to_f64, Rational};

#[derive(Clone, Debug, Serialize)]
pub struct RadiusRow {
    pub colors: usize,
    pub n: usize,
    #[serde(with = "crate::rational::serde_str")]
    pub coefficient: Rational,
    /// `(|a_n| / N)^{1/n}`.
    pub root: f64,
    /// `(n^{n-2}/n!)² (8S)^{2(n-1)} (G²)^{n+1}`, with `S = max_x Σ_y |C(x,y)|`
    /// and `G² = max ‖f‖² max ‖g‖²`.
    #[serde(with = "crate::rational::serde_str")]
    pub bound_squared: Rational,
    pub within_bound: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RadiusProbe {
    pub rows: Vec<RadiusRow>,
    /// Smallest `K'` with `|a_n|/N ≤ (n^{n-2}/n!) K'^n` on every row.
    pub envelope: f64,
    pub all_within_bound: bool,
}

fn cayley_weight(n: usize) -> Rational {
    let trees = if n == 1 { int(1) } else { pow(&int(n as i64), n - 2) };
    trees / Rational::from_integer(factorial(n))
}

fn max_norm_squared(m: &QMatrix) -> Rational {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|x| x * x).sum::<Rational>())
        .max()
        .unwrap_or_else(Rational::zero)
}

/// Tree-expansion coefficients of each model against the determinant bound.
pub fn radius_probe(models: &[GrassmannModel]) -> Result<RadiusProbe> {
    let mut rows = Vec::new();
    for model in models {
        let series = pressure_series_tree(model)?;
        let c = model.propagator();
        let s = (0..c.rows())
            .map(|x| c.row(x).iter().map(abs).sum::<Rational>())
            .max()
            .unwrap_or_else(Rational::zero);
        let fact = model.factorization_or_trivial();
        let g2 = max_norm_squared(fact.f()) * max_norm_squared(fact.g());
        let nc = Rational::from_integer((model.colors() as i64).into());
        for n in 1..=model.order() {
            let coefficient = series.coeff(n);
            let normalized = abs(&coefficient) / &nc;
            let bound_squared = pow(&cayley_weight(n), 2) * pow(&(int(8) * &s), 2 * (n - 1)) * pow(&g2, n + 1);
            rows.push(RadiusRow {
                colors: model.colors(),
                n,
                root: to_f64(&normalized).powf(1.0 / n as f64),
                within_bound: &normalized * &normalized <= bound_squared,
                coefficient,
                bound_squared,
            });
        }
    }
    let envelope = rows
        .iter()
        .map(|r| {
            let normalized = to_f64(&abs(&r.coefficient)) / r.colors as f64;
            (normalized / to_f64(&cayley_weight(r.n))).powf(1.0 / r.n as f64)
        })
        .fold(0.0, f64::max);
    let all_within_bound = rows.iter().all(|r| r.within_bound);
    if let Some(r) = rows.iter().find(|r| !r.within_bound) {
        return Err(Error::InequalityFailure {
            check: "pressure coefficient bound",
            witness: format!(
                "N = {}, n = {}: a_n = {}, bound² = {}",
                r.colors,
                r.n,
                format_rational(&r.coefficient),
                format_rational(&r.bound_squared)
            ),
        });
    }
    Ok(RadiusProbe {
        rows,
        envelope,
        all_within_bound,
    })
}

/// Two sites, `C = [[1, 1/2], [1/2, 1]]`, factored as `C · Iᵀ`.
pub fn two_site_model(colors: usize, order: usize) -> Result<GrassmannModel> {
    let c = QMatrix::from_rows(vec![vec![int(1), rat(1, 2)], vec![rat(1, 2), int(1)]])?;
    GrassmannModel::new(c.clone(), colors, order)?.with_factorization(c, QMatrix::identity(2))
}

impl RadiusRow {
    pub fn is_nonzero(&self) -> bool {
        self.coefficient.is_positive() || self.coefficient.is_negative()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_site_family_within_bound() {
        let models: Vec<_> = (1..=3).map(|n| two_site_model(n, 2).unwrap()).collect();
        let p = radius_probe(&models).unwrap();
        assert!(p.all_within_bound);
        assert_eq!(p.rows.len(), 6);
        assert!(p.envelope > 0.0);
    }

    #[test]
    fn zero_propagator_has_zero_roots() {
        let m = GrassmannModel::new(QMatrix::zeros(2, 2), 2, 2).unwrap();
        let p = radius_probe(&[m]).unwrap();
        assert!(p.rows.iter().all(|r| r.root == 0.0 && !r.is_nonzero()));
        assert_eq!(p.envelope, 0.0);
    }

    #[test]
    fn single_coefficient_envelope() {
        let m = GrassmannModel::new(QMatrix::identity(1), 3, 1).unwrap();
        let p = radius_probe(&[m]).unwrap();
        // a_1 = N - 1 = 2, so |a_1|/N = 2/3
        assert_eq!(p.rows[0].coefficient, int(2));
        assert!((p.envelope - 2.0 / 3.0).abs() < 1e-15);
    }
}
