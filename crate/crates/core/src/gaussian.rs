//! Finite-dimensional Gaussian φ⁴ models: one real variable per box with
//! covariance `C`, interaction `λ Σ_i φ_i⁴`, and the tree-interpolated
//! cluster expansion `Z = Σ_{partitions} ∏ A(Y)`.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinat::{compositions, partition_blocks, set_partitions};
use crate::error::{Error, Result};
use crate::forest::enumerate_trees;
use crate::matrix::{psd_certificate, QMatrix};
use crate::rational::{factorial, format_rational, int, parse_rational, Rational};
use crate::symbolic::{integrate_min_expression, Coefficient, FormalSeries, MinExpression};
use crate::weakening::{symmetric_symbol, WeakeningSymbol};

/// Largest `order · boxes` accepted by the series routines.
pub const MAX_ORDER_BOXES: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoxModel {
    boxes: usize,
    covariance: QMatrix,
    order: usize,
}

/// JSON form `{"boxes": n, "covariance": [["1", "1/2"], …], "order": p}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoxModelFile {
    pub boxes: usize,
    pub covariance: Vec<Vec<String>>,
    pub order: usize,
}

impl TryFrom<BoxModelFile> for BoxModel {
    type Error = Error;

    fn try_from(file: BoxModelFile) -> Result<Self> {
        let rows = file
            .covariance
            .iter()
            .map(|row| row.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        if rows.len() != file.boxes {
            return Err(Error::validation(format!(
                "covariance has {} rows for {} boxes",
                rows.len(),
                file.boxes
            )));
        }
        BoxModel::new(QMatrix::from_rows(rows)?, file.order)
    }
}

impl BoxModel {
    pub fn new(covariance: QMatrix, order: usize) -> Result<Self> {
        if !covariance.is_square() || covariance.rows() == 0 {
            return Err(Error::validation("covariance must be a nonempty square matrix"));
        }
        if !covariance.is_symmetric() {
            return Err(Error::validation("covariance is not symmetric"));
        }
        let cert = psd_certificate(&covariance)?;
        if !cert.is_psd {
            return Err(Error::validation(format!(
                "covariance is not positive semidefinite: {:?}",
                cert.witness
            )));
        }
        let boxes = covariance.rows();
        crate::limits::Limits::check("order·boxes", order * boxes, MAX_ORDER_BOXES)?;
        Ok(BoxModel {
            boxes,
            covariance,
            order,
        })
    }

    pub fn boxes(&self) -> usize {
        self.boxes
    }

    pub fn covariance(&self) -> &QMatrix {
        &self.covariance
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// The model on the boxes of `y` (1-based, sorted).
    pub fn restrict(&self, y: &[usize]) -> Result<BoxModel> {
        let idx: Vec<usize> = y.iter().map(|b| b - 1).collect();
        Ok(BoxModel {
            boxes: y.len(),
            covariance: self.covariance.submatrix(&idx, &idx),
            order: self.order,
        })
    }

    pub fn to_file(&self) -> BoxModelFile {
        BoxModelFile {
            boxes: self.boxes,
            covariance: self.covariance.to_strings(),
            order: self.order,
        }
    }
}

/// `C(x)`: off-diagonal entries `C_ij` multiplied by `x_ij`, diagonal kept.
#[derive(Clone, Debug)]
pub struct InterpolatedCovariance {
    base: QMatrix,
    x: BTreeMap<(usize, usize), Rational>,
}

impl InterpolatedCovariance {
    /// `x` maps 1-based pairs `(i, j)`, `i < j`; missing pairs count as `1`.
    pub fn new(base: &QMatrix, x: BTreeMap<(usize, usize), Rational>) -> Self {
        InterpolatedCovariance { base: base.clone(), x }
    }

    pub fn uniform(base: &QMatrix, value: Rational) -> Self {
        let n = base.rows();
        let mut x = BTreeMap::new();
        for i in 1..=n {
            for j in i + 1..=n {
                x.insert((i, j), value.clone());
            }
        }
        Self::new(base, x)
    }

    pub fn matrix(&self) -> QMatrix {
        QMatrix::from_fn(self.base.rows(), self.base.cols(), |i, j| {
            let c = &self.base[(i, j)];
            if i == j {
                return c.clone();
            }
            let key = (i.min(j) + 1, i.max(j) + 1);
            match self.x.get(&key) {
                Some(x) => c * x,
                None => c.clone(),
            }
        })
    }
}

/// Gaussian moments `E[∏ φ_i^{e_i}]` by Wick's rule, memoized on the
/// exponent vector. Entries may be rationals or any other coefficient ring.
pub struct Wick<'a, C: Coefficient> {
    cov: &'a [Vec<C>],
    zero: C,
    one: C,
    memo: HashMap<Vec<u32>, C>,
}

impl<'a, C: Coefficient> Wick<'a, C> {
    pub fn new(cov: &'a [Vec<C>], unit: &C) -> Self {
        Wick {
            cov,
            zero: unit.zero_like(),
            one: unit.one_like(),
            memo: HashMap::new(),
        }
    }

    pub fn moment(&mut self, exps: &[u32]) -> C {
        let total: u32 = exps.iter().sum();
        if total % 2 == 1 {
            return self.zero.clone();
        }
        if total == 0 {
            return self.one.clone();
        }
        if let Some(v) = self.memo.get(exps) {
            return v.clone();
        }
        // pair one copy of the first field with every other copy
        let a = exps.iter().position(|&e| e > 0).expect("nonzero total");
        let mut rest = exps.to_vec();
        rest[a] -= 1;
        let mut acc = self.zero.clone();
        for b in 0..exps.len() {
            if rest[b] == 0 || self.cov[a][b].vanishes() {
                continue;
            }
            let mult = rest[b];
            rest[b] -= 1;
            let sub = self.moment(&rest);
            rest[b] += 1;
            if !sub.vanishes() {
                let term = self.cov[a][b].mul(&sub).scale(&int(mult as i64));
                acc = acc.add(&term);
            }
        }
        self.memo.insert(exps.to_vec(), acc.clone());
        acc
    }
}

fn rows_of(c: &QMatrix) -> Vec<Vec<Rational>> {
    (0..c.rows()).map(|i| c.row(i).to_vec()).collect()
}

pub fn wick_moment(c: &QMatrix, exps: &[u32]) -> Result<Rational> {
    if exps.len() != c.rows() {
        return Err(Error::validation(format!(
            "multi-index of length {} for {} boxes",
            exps.len(),
            c.rows()
        )));
    }
    let rows = rows_of(c);
    Ok(Wick::new(&rows, &Rational::zero()).moment(exps))
}

fn rational_from(b: BigInt) -> Rational {
    Rational::from_integer(b)
}

/// `Z = E[exp(-λ Σ φ_i⁴)]` to the model's order.
pub fn partition_series(model: &BoxModel) -> Result<FormalSeries> {
    let n = model.boxes;
    let rows = rows_of(&model.covariance);
    let mut wick = Wick::new(&rows, &Rational::zero());
    let mut coeffs = Vec::with_capacity(model.order + 1);
    for k in 0..=model.order {
        let mut acc = Rational::zero();
        for ks in compositions(k, n) {
            let exps: Vec<u32> = ks.iter().map(|&k| 4 * k as u32).collect();
            let m = wick.moment(&exps);
            if Zero::is_zero(&m) {
                continue;
            }
            let denom: BigInt = ks.iter().map(|&k| factorial(k)).product();
            acc += m / rational_from(denom);
        }
        if k % 2 == 1 {
            acc = -acc;
        }
        coeffs.push(acc);
    }
    Ok(FormalSeries::new(coeffs))
}

/// `A(Y)` for every nonempty box set `Y`, keyed by the sorted 1-based boxes.
#[derive(Clone, Debug, Serialize)]
pub struct PolymerActivitySeries {
    pub order: usize,
    pub activities: BTreeMap<Vec<usize>, FormalSeries>,
}

impl PolymerActivitySeries {
    pub fn get(&self, y: &[usize]) -> Option<&FormalSeries> {
        self.activities.get(y)
    }
}

/// Tree formula for the activity of the box set `y` (1-based, sorted):
/// each tree line `{i, j}` brings `C_ij ∂_i ∂_j` onto `exp(-λ Σ φ⁴)`, and
/// the remaining expectation uses `C_ab · min_{path(a,b)} w` off the
/// diagonal.
pub fn activity(model: &BoxModel, y: &[usize]) -> Result<FormalSeries> {
    if y.is_empty() || y.windows(2).any(|w| w[0] >= w[1]) || y[y.len() - 1] > model.boxes {
        return Err(Error::validation(format!("{y:?} is not a sorted set of boxes")));
    }
    let local = model.restrict(y)?;
    let size = y.len();
    let order = model.order;
    let trees = enumerate_trees(size)?;
    let per_tree = trees
        .par_iter()
        .map(|tree| -> Result<Vec<Rational>> {
            let forest = tree.forest();
            let tau = forest.len();
            let c = &local.covariance;
            let mut line_product = Rational::one();
            for l in forest.links() {
                line_product *= &c[(l.lo() - 1, l.hi() - 1)];
            }
            let mut out = vec![Rational::zero(); order + 1];
            if Zero::is_zero(&line_product) {
                return Ok(out);
            }
            let mut cw = vec![vec![MinExpression::zero(tau); size]; size];
            for a in 0..size {
                for b in 0..size {
                    let entry = &c[(a, b)];
                    cw[a][b] = match symmetric_symbol(forest, a + 1, b + 1)? {
                        WeakeningSymbol::Zero => MinExpression::zero(tau),
                        WeakeningSymbol::One => MinExpression::constant(tau, entry.clone()),
                        WeakeningSymbol::Min(mask) => MinExpression::min_of(tau, mask)?.scale(entry),
                    };
                }
            }
            let degrees: Vec<usize> = (1..=size).map(|v| forest.degree(v)).collect();
            let minimum: usize = degrees.iter().map(|d| d.div_ceil(4)).sum();
            let mut wick = Wick::new(&cw, &MinExpression::zero(tau));
            for (k, slot) in out.iter_mut().enumerate().skip(minimum) {
                let mut integrand = MinExpression::zero(tau);
                for ks in compositions(k, size) {
                    if ks.iter().zip(&degrees).any(|(&k, &d)| 4 * k < d) {
                        continue;
                    }
                    let mut weight = Rational::one();
                    for (&k, &d) in ks.iter().zip(&degrees) {
                        weight *= rational_from(factorial(4 * k)) / rational_from(factorial(k) * factorial(4 * k - d));
                    }
                    let exps: Vec<u32> = ks.iter().zip(&degrees).map(|(&k, &d)| (4 * k - d) as u32).collect();
                    let m = wick.moment(&exps);
                    integrand.add_assign(&m.scale(&weight));
                }
                let mut value = integrate_min_expression(&integrand)? * &line_product;
                if k % 2 == 1 {
                    value = -value;
                }
                *slot = value;
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut coeffs = vec![Rational::zero(); order + 1];
    for t in per_tree {
        for (acc, v) in coeffs.iter_mut().zip(t) {
            *acc += v;
        }
    }
    Ok(FormalSeries::new(coeffs))
}

fn subsets(n: usize) -> Vec<Vec<usize>> {
    (1u32..1 << n)
        .map(|mask| (1..=n).filter(|b| mask >> (b - 1) & 1 == 1).collect())
        .collect()
}

pub fn cluster_expansion(model: &BoxModel) -> Result<PolymerActivitySeries> {
    let activities = subsets(model.boxes)
        .into_par_iter()
        .map(|y| Ok((y.clone(), activity(model, &y)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(PolymerActivitySeries {
        order: model.order,
        activities,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorizationReport {
    pub order: usize,
    pub partitions: usize,
    pub partition_series: FormalSeries,
    pub polymer_sum: FormalSeries,
    /// Residual `Z - Σ ∏ A(Y)` per order.
    pub residuals: Vec<String>,
}

/// Checks `Z = Σ_{set partitions {Y_i}} ∏ A(Y_i)` order by order.
pub fn verify_factorization(model: &BoxModel) -> Result<FactorizationReport> {
    let z = partition_series(model)?;
    let acts = cluster_expansion(model)?;
    let mut sum = FormalSeries::zero(model.order);
    let labels = set_partitions(model.boxes);
    for l in &labels {
        let mut prod = FormalSeries::one(model.order);
        for block in partition_blocks(l) {
            let y: Vec<usize> = block.iter().map(|b| b + 1).collect();
            prod = prod.mul(acts.get(&y).expect("every subset has an activity"));
        }
        sum = sum.add(&prod);
    }
    let residual = z.sub(&sum);
    if let Some(k) = (0..=model.order).find(|&k| !Zero::is_zero(&residual.coeff(k))) {
        return Err(Error::IdentityFailure {
            check: "cluster factorization",
            order: k,
            detail: format!(
                "Z_{k} = {}, polymer sum = {} over {} partitions",
                format_rational(&z.coeff(k)),
                format_rational(&sum.coeff(k)),
                labels.len()
            ),
        });
    }
    Ok(FactorizationReport {
        order: model.order,
        partitions: labels.len(),
        residuals: residual.coeffs().iter().map(format_rational).collect(),
        partition_series: z,
        polymer_sum: sum,
    })
}

/// Coefficient of `λ^k` in `log Z` for one box with unit covariance.
pub fn zero_dim_connected_count(order: usize) -> Result<Rational> {
    let model = BoxModel::new(QMatrix::identity(1), order)?;
    Ok(partition_series(&model)?.log()?.coeff(order))
}

/// `C_ij = r^{|i-j|}` on `n` boxes.
pub fn chain_covariance(n: usize, r: &Rational) -> QMatrix {
    QMatrix::from_fn(n, n, |i, j| crate::rational::pow(r, i.abs_diff(j)))
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayRow {
    pub size: usize,
    /// Order `λ^{|Y|}`, the lowest at which `A(Y)` can be nonzero.
    pub order: usize,
    pub value: String,
    pub magnitude: f64,
    /// `|A(Y)|^{1/|Y|}`.
    pub root: f64,
}

/// Lowest-order activities of the intervals `{1..m}` on the geometric chain.
pub fn activity_decay_table(r: &Rational, max_size: usize) -> Result<Vec<DecayRow>> {
    (1..=max_size)
        .map(|m| {
            let model = BoxModel::new(chain_covariance(m, r), m)?;
            let y: Vec<usize> = (1..=m).collect();
            let a = activity(&model, &y)?.coeff(m);
            let magnitude = crate::rational::to_f64(&a.abs());
            Ok(DecayRow {
                size: m,
                order: m,
                value: format_rational(&a),
                magnitude,
                root: magnitude.powf(1.0 / m as f64),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    /// `E[∏ φ]` by explicit enumeration of perfect matchings of the copies.
    fn pairing_oracle(c: &QMatrix, exps: &[u32]) -> Rational {
        let labels: Vec<usize> = exps
            .iter()
            .enumerate()
            .flat_map(|(i, &e)| std::iter::repeat_n(i, e as usize))
            .collect();
        fn rec(c: &QMatrix, rest: &[usize]) -> Rational {
            if rest.is_empty() {
                return Rational::one();
            }
            let (first, tail) = (rest[0], &rest[1..]);
            let mut acc = Rational::zero();
            for k in 0..tail.len() {
                let mut remaining = tail.to_vec();
                let partner = remaining.remove(k);
                acc += &c[(first, partner)] * rec(c, &remaining);
            }
            acc
        }
        if labels.len() % 2 == 1 {
            return Rational::zero();
        }
        rec(c, &labels)
    }

    fn two_box(c: Rational, order: usize) -> BoxModel {
        BoxModel::new(
            QMatrix::from_rows(vec![vec![int(1), c.clone()], vec![c, int(1)]]).unwrap(),
            order,
        )
        .unwrap()
    }

    #[test]
    fn wick_examples() {
        let c = QMatrix::from_rows(vec![vec![int(2), rat(1, 3)], vec![rat(1, 3), int(1)]]).unwrap();
        assert_eq!(wick_moment(&c, &[1, 1]).unwrap(), rat(1, 3));
        assert_eq!(wick_moment(&c, &[2, 1]).unwrap(), int(0));
        assert_eq!(wick_moment(&QMatrix::identity(1), &[4]).unwrap(), int(3));
        assert_eq!(wick_moment(&QMatrix::identity(1), &[8]).unwrap(), int(105));
        for e in [[3, 1], [2, 2], [4, 2], [3, 3], [1, 5]] {
            assert_eq!(wick_moment(&c, &e).unwrap(), pairing_oracle(&c, &e));
        }
    }

    #[test]
    fn single_box_series() {
        let z = partition_series(&BoxModel::new(QMatrix::identity(1), 2).unwrap()).unwrap();
        assert_eq!(z.coeffs(), &[int(1), int(-3), rat(105, 2)]);
    }

    #[test]
    fn independent_boxes_factorize() {
        let one = partition_series(&BoxModel::new(QMatrix::identity(1), 3).unwrap()).unwrap();
        let two = partition_series(&BoxModel::new(QMatrix::identity(2), 3).unwrap()).unwrap();
        assert_eq!(two, one.mul(&one));
    }

    #[test]
    fn activities_of_two_boxes() {
        let model = two_box(rat(1, 2), 3);
        let acts = cluster_expansion(&model).unwrap();
        let z1 = partition_series(&BoxModel::new(QMatrix::identity(1), 3).unwrap()).unwrap();
        assert_eq!(acts.get(&[1]).unwrap(), &z1);
        let a12 = acts.get(&[1, 2]).unwrap();
        assert_eq!(a12.coeff(0), int(0));
        assert_eq!(a12.coeff(1), int(0));
        // E[φ₁⁴φ₂⁴] = 9 + 72c² + 24c⁴, minus the product term 9
        let c = rat(1, 2);
        let direct = pairing_oracle(model.covariance(), &[4, 4]) - int(9);
        assert_eq!(direct, int(72) * &c * &c + int(24) * crate::rational::pow(&c, 4));
        assert_eq!(a12.coeff(2), direct);
        verify_factorization(&model).unwrap();

        let zero = two_box(int(0), 3);
        assert!(cluster_expansion(&zero).unwrap().get(&[1, 2]).unwrap().is_zero());
    }

    #[test]
    fn chain_factorization() {
        let c = chain_covariance(3, &rat(1, 2));
        let report = verify_factorization(&BoxModel::new(c, 2).unwrap()).unwrap();
        assert!(report.residuals.iter().all(|r| r == "0"));
        assert_eq!(report.partitions, 5);
        let c = chain_covariance(3, &rat(1, 2));
        verify_factorization(&BoxModel::new(c, 4).unwrap()).unwrap();
    }

    #[test]
    fn diagonal_factorization() {
        let c = QMatrix::from_fn(4, 4, |i, j| if i == j { rat(i as i64 + 1, 2) } else { int(0) });
        let model = BoxModel::new(c, 2).unwrap();
        verify_factorization(&model).unwrap();
        let acts = cluster_expansion(&model).unwrap();
        for (y, a) in &acts.activities {
            assert_eq!(a.is_zero(), y.len() > 1);
        }
    }

    #[test]
    fn locality() {
        let c = chain_covariance(4, &rat(1, 3));
        let model = BoxModel::new(c, 3).unwrap();
        let y = [2, 4];
        let restricted = model.restrict(&y).unwrap();
        assert_eq!(activity(&model, &y).unwrap(), activity(&restricted, &[1, 2]).unwrap());
    }

    #[test]
    fn interpolation_endpoints() {
        let c = chain_covariance(3, &rat(1, 2));
        assert_eq!(InterpolatedCovariance::uniform(&c, int(1)).matrix(), c);
        let zero = InterpolatedCovariance::uniform(&c, int(0)).matrix();
        assert_eq!(
            zero,
            QMatrix::from_fn(3, 3, |i, j| if i == j { int(1) } else { int(0) })
        );
        let z = partition_series(&BoxModel::new(zero, 2).unwrap()).unwrap();
        let z1 = partition_series(&BoxModel::new(QMatrix::identity(1), 2).unwrap()).unwrap();
        assert_eq!(z, z1.pow(3));
    }

    #[test]
    fn zero_dimensional_counts() {
        assert_eq!(zero_dim_connected_count(0).unwrap(), int(0));
        assert_eq!(zero_dim_connected_count(1).unwrap(), int(-3));
        assert_eq!(zero_dim_connected_count(2).unwrap(), int(48));
    }

    #[test]
    fn model_validation() {
        let bad = QMatrix::from_rows(vec![vec![int(1), int(2)], vec![int(2), int(1)]]).unwrap();
        assert!(BoxModel::new(bad, 2).is_err());
        let asym = QMatrix::from_rows(vec![vec![int(1), int(0)], vec![int(1), int(1)]]).unwrap();
        assert!(BoxModel::new(asym, 2).is_err());
        assert!(BoxModel::new(QMatrix::identity(4), 9).is_err());
        let file = BoxModelFile {
            boxes: 2,
            covariance: vec![vec!["1".into(), "1/2".into()], vec!["1/2".into(), "1".into()]],
            order: 2,
        };
        assert_eq!(BoxModel::try_from(file).unwrap(), two_box(rat(1, 2), 2));
    }

    #[test]
    fn decay_table_shrinks() {
        let rows = activity_decay_table(&rat(1, 10), 3).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[1].value, "903/1250");
        assert!(rows[2].magnitude < rows[1].magnitude);
        assert!(rows[2].root < rows[1].root);
    }
}
