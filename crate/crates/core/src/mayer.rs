//! Mayer expansion of a hardcore polymer gas: connected coefficients by the
//! tree formula and by connected graphs, the graded log series, and the
//! exact check `exp(log Z_r) = Z_r`.

use std::collections::HashMap;
use std::sync::Mutex;

use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinat::UnionFind;
use crate::error::{Error, Result};
use crate::forest::{enumerate_trees, Forest, Tree};
use crate::gaussian::{activity, partition_series, BoxModel};
use crate::limits::{self, Limits};
use crate::rational::{factorial, format_rational, Rational};
use crate::symbolic::{exp_series, integrate_min_expression, Coefficient, FormalSeries, MinExpression};
use crate::weakening::{symmetric_symbol, WeakeningSymbol};

/// Nonempty set of boxes `1..=64`, bit `b-1` for box `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Polymer(u64);

impl Polymer {
    pub fn new(boxes: &[usize]) -> Result<Self> {
        let mut bits = 0u64;
        for &b in boxes {
            if b == 0 || b > 64 {
                return Err(Error::validation(format!("box {b} outside 1..64")));
            }
            bits |= 1 << (b - 1);
        }
        if bits == 0 {
            return Err(Error::validation("empty polymer"));
        }
        Ok(Polymer(bits))
    }

    pub fn from_bits(bits: u64) -> Result<Self> {
        if bits == 0 {
            return Err(Error::validation("empty polymer"));
        }
        Ok(Polymer(bits))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn boxes(self) -> Vec<usize> {
        (1..=64).filter(|b| self.0 >> (b - 1) & 1 == 1).collect()
    }

    /// Hardcore compatibility `η(X, Y)`.
    pub fn compatible(self, other: Polymer) -> bool {
        self.0 & other.0 == 0
    }
}

impl Serialize for Polymer {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.boxes().serialize(s)
    }
}

/// Which pairs of a polymer sequence overlap (`ε_ij = -1`); all other
/// pairs have `ε_ij = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OverlapPattern {
    k: usize,
    /// Bit `i*k + j` set when `i` and `j` overlap.
    bits: u64,
}

impl OverlapPattern {
    pub fn new(k: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if k == 0 || k > 8 {
            return Err(Error::validation(format!("pattern size {k} outside 1..8")));
        }
        let mut p = OverlapPattern { k, bits: 0 };
        for &(i, j) in edges {
            if i >= k || j >= k || i == j {
                return Err(Error::validation(format!("bad pattern edge ({i}, {j})")));
            }
            p.set(i, j);
        }
        Ok(p)
    }

    fn set(&mut self, i: usize, j: usize) {
        self.bits |= 1 << (i * self.k + j);
        self.bits |= 1 << (j * self.k + i);
    }

    pub fn from_polymers(polymers: &[Polymer]) -> Result<Self> {
        let k = polymers.len();
        let mut p = OverlapPattern::new(k, &[])?;
        for i in 0..k {
            for j in i + 1..k {
                if !polymers[i].compatible(polymers[j]) {
                    p.set(i, j);
                }
            }
        }
        Ok(p)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn overlaps(&self, i: usize, j: usize) -> bool {
        i != j && self.bits >> (i * self.k + j) & 1 == 1
    }

    /// `ε_ij ∈ {0, -1}`.
    pub fn epsilon(&self, i: usize, j: usize) -> Rational {
        if self.overlaps(i, j) {
            -Rational::one()
        } else {
            Rational::zero()
        }
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.k {
            for j in i + 1..self.k {
                if self.overlaps(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        let mut uf = UnionFind::new(self.k);
        let mut parts = self.k;
        for (i, j) in self.edges() {
            if uf.union(i, j) {
                parts -= 1;
            }
        }
        parts == 1
    }

    /// All `2^{k(k-1)/2}` patterns on `k` elements.
    pub fn all(k: usize) -> Result<Vec<OverlapPattern>> {
        let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
        (0u64..1 << pairs.len())
            .map(|mask| {
                let chosen: Vec<(usize, usize)> = pairs
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask >> b & 1 == 1)
                    .map(|(_, p)| *p)
                    .collect();
                OverlapPattern::new(k, &chosen)
            })
            .collect()
    }

    /// Each pair overlaps independently with probability `density`.
    pub fn random(k: usize, density: f64, rng: &mut impl Rng) -> Result<OverlapPattern> {
        let mut edges = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                if rng.gen_bool(density) {
                    edges.push((i, j));
                }
            }
        }
        OverlapPattern::new(k, &edges)
    }

    /// Polymers with exactly this overlap pattern: one shared box per
    /// overlapping pair and one private box per element.
    pub fn realize(&self) -> Result<Vec<Polymer>> {
        let mut boxes: Vec<Vec<usize>> = (0..self.k).map(|i| vec![i + 1]).collect();
        let mut next = self.k + 1;
        for (i, j) in self.edges() {
            boxes[i].push(next);
            boxes[j].push(next);
            next += 1;
        }
        boxes.iter().map(|b| Polymer::new(b)).collect()
    }
}

/// `∏_{l ∉ T} (1 + w_l^T ε_l)` as a polynomial in path minima.
pub fn loop_factor(pattern: &OverlapPattern, tree: &Forest) -> Result<MinExpression> {
    let tau = tree.len();
    let mut product = MinExpression::one(tau);
    for (i, j) in pattern.edges() {
        let link = crate::forest::Link::new(i + 1, j + 1)?;
        if tree.contains(link) {
            continue;
        }
        let weak = match symmetric_symbol(tree, i + 1, j + 1)? {
            WeakeningSymbol::Zero => continue,
            WeakeningSymbol::One => MinExpression::one(tau),
            WeakeningSymbol::Min(mask) => MinExpression::min_of(tau, mask)?,
        };
        product = product.mul(&MinExpression::one(tau).sub(&weak));
    }
    Ok(product)
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::validation("empty polymer sequence"));
    }
    Limits::check("mayer sequence length", k, limits::current().max_mayer_k)
}

/// Tree formula `Σ_T ∫ dw ∏_{l∈T} ε_l ∏_{l∉T} (1 + w_l^T ε_l)`.
pub fn connected_coefficient_tree_pattern(pattern: &OverlapPattern) -> Result<Rational> {
    check_k(pattern.k)?;
    let k = pattern.k;
    let trees: Vec<Tree> = enumerate_trees(k)?;
    let sign = if k % 2 == 1 { Rational::one() } else { -Rational::one() };
    trees
        .par_iter()
        .filter(|t| t.links().iter().all(|l| pattern.overlaps(l.lo() - 1, l.hi() - 1)))
        .map(|t| Ok(integrate_min_expression(&loop_factor(pattern, t.forest())?)? * &sign))
        .try_reduce(Rational::zero, |a, b| Ok(a + b))
}

/// `Σ_{G connected on {1..k}} ∏_{l∈G} ε_l`, by enumerating edge subsets of
/// the overlap graph (any other edge carries `ε = 0`).
pub fn connected_coefficient_graphs_pattern(pattern: &OverlapPattern) -> Result<Rational> {
    check_k(pattern.k)?;
    let k = pattern.k;
    let edges = pattern.edges();
    let mut total = Rational::zero();
    for mask in 0u64..1 << edges.len() {
        let mut uf = UnionFind::new(k);
        let mut parts = k;
        for (b, &(i, j)) in edges.iter().enumerate() {
            if mask >> b & 1 == 1 && uf.union(i, j) {
                parts -= 1;
            }
        }
        if parts == 1 {
            if mask.count_ones() % 2 == 0 {
                total += Rational::one();
            } else {
                total -= Rational::one();
            }
        }
    }
    Ok(total)
}

pub fn connected_coefficient_tree(polymers: &[Polymer]) -> Result<Rational> {
    check_k(polymers.len())?;
    connected_coefficient_tree_pattern(&OverlapPattern::from_polymers(polymers)?)
}

pub fn connected_coefficient_graphs(polymers: &[Polymer]) -> Result<Rational> {
    check_k(polymers.len())?;
    connected_coefficient_graphs_pattern(&OverlapPattern::from_polymers(polymers)?)
}

/// Hardcore gas of admissible polymers (at least two boxes) with activities
/// in any coefficient ring.
#[derive(Clone, Debug)]
pub struct PolymerGas<C: Coefficient> {
    boxes: usize,
    polymers: Vec<Polymer>,
    activities: Vec<C>,
    unit: C,
}

impl<C: Coefficient> PolymerGas<C> {
    /// `unit` fixes the ring element used for zero and one.
    pub fn new(boxes: usize, entries: Vec<(Polymer, C)>, unit: C) -> Result<Self> {
        if boxes > 64 {
            return Err(Error::validation("at most 64 boxes"));
        }
        let mut polymers = Vec::with_capacity(entries.len());
        let mut activities = Vec::with_capacity(entries.len());
        for (p, a) in entries {
            if p.len() < 2 {
                return Err(Error::validation(format!(
                    "polymer {:?} is trivial; single boxes are quotiented out",
                    p.boxes()
                )));
            }
            if p.bits() >> boxes != 0 {
                return Err(Error::validation(format!(
                    "polymer {:?} outside {boxes} boxes",
                    p.boxes()
                )));
            }
            if polymers.contains(&p) {
                return Err(Error::validation(format!("polymer {:?} listed twice", p.boxes())));
            }
            polymers.push(p);
            activities.push(a);
        }
        Ok(PolymerGas {
            boxes,
            polymers,
            activities,
            unit,
        })
    }

    pub fn boxes(&self) -> usize {
        self.boxes
    }

    pub fn polymers(&self) -> &[Polymer] {
        &self.polymers
    }

    pub fn activities(&self) -> &[C] {
        &self.activities
    }
}

impl PolymerGas<Rational> {
    /// Intervals `{i, …, i+len-1}` of `n` boxes on a line, `2 ≤ len ≤ max_len`,
    /// all with the same activity.
    pub fn intervals(n: usize, max_len: usize, activity: Rational) -> Result<Self> {
        let mut entries = Vec::new();
        for len in 2..=max_len.min(n) {
            for start in 1..=n + 1 - len {
                let boxes: Vec<usize> = (start..start + len).collect();
                entries.push((Polymer::new(&boxes)?, activity.clone()));
            }
        }
        PolymerGas::new(n, entries, Rational::zero())
    }
}

/// Connected coefficients shared across sequences with equal overlap pattern.
#[derive(Default)]
pub struct ConnectedCache {
    map: Mutex<HashMap<OverlapPattern, Rational>>,
}

impl ConnectedCache {
    pub fn get(&self, pattern: &OverlapPattern) -> Result<Rational> {
        if let Some(v) = self.map.lock().expect("cache lock").get(pattern) {
            return Ok(v.clone());
        }
        let v = connected_coefficient_tree_pattern(pattern)?;
        self.map.lock().expect("cache lock").insert(pattern.clone(), v.clone());
        Ok(v)
    }
}

/// Coefficients `c_0..c_grade` of `log Z_r` in the bookkeeping variable:
/// `c_k = (1/k!) Σ_{(Y_1..Y_k)} ∏ A_r(Y_i) C^T(Y_1..Y_k)`.
pub fn mayer_log_series<C: Coefficient>(gas: &PolymerGas<C>, grade: usize) -> Result<Vec<C>> {
    if grade > 0 {
        Limits::check("mayer grade", grade, limits::current().max_mayer_k)?;
    }
    let cache = ConnectedCache::default();
    let m = gas.polymers.len();
    let mut out = vec![gas.unit.zero_like(); grade + 1];
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        if m == 0 {
            break;
        }
        let count = (m as u64).checked_pow(k as u32).ok_or(Error::SizeLimit {
            what: "polymer sequences",
            value: usize::MAX,
            limit: u32::MAX as usize,
        })?;
        let total = (0..count)
            .into_par_iter()
            .map(|code| -> Result<Option<C>> {
                let mut idx = Vec::with_capacity(k);
                let mut c = code;
                for _ in 0..k {
                    idx.push((c % m as u64) as usize);
                    c /= m as u64;
                }
                let seq: Vec<Polymer> = idx.iter().map(|&i| gas.polymers[i]).collect();
                let pattern = OverlapPattern::from_polymers(&seq)?;
                if !pattern.is_connected() {
                    return Ok(None);
                }
                let ct = cache.get(&pattern)?;
                if ct.is_zero() {
                    return Ok(None);
                }
                let mut prod = gas.activities[idx[0]].clone();
                for &i in &idx[1..] {
                    prod = prod.mul(&gas.activities[i]);
                }
                Ok(Some(prod.scale(&ct)))
            })
            .try_fold(
                || gas.unit.zero_like(),
                |acc, term| {
                    Ok(match term? {
                        Some(t) => acc.add(&t),
                        None => acc,
                    })
                },
            )
            .try_reduce(|| gas.unit.zero_like(), |a, b| Ok(a.add(&b)))?;
        *slot = total.scale(&Rational::from_integer(factorial(k)).recip());
    }
    Ok(out)
}

/// `Z_r = Σ_{pairwise disjoint polymer sets S} z^{|S|} ∏_{Y∈S} A_r(Y)`, to `grade`.
pub fn partition_polynomial<C: Coefficient>(gas: &PolymerGas<C>, grade: usize) -> Vec<C> {
    fn rec<C: Coefficient>(gas: &PolymerGas<C>, start: usize, used: u64, depth: usize, weight: C, out: &mut [C]) {
        out[depth] = out[depth].add(&weight);
        if depth + 1 >= out.len() {
            return;
        }
        for i in start..gas.polymers.len() {
            let p = gas.polymers[i];
            if p.bits() & used == 0 {
                rec(
                    gas,
                    i + 1,
                    used | p.bits(),
                    depth + 1,
                    weight.mul(&gas.activities[i]),
                    out,
                );
            }
        }
    }
    let mut out = vec![gas.unit.zero_like(); grade + 1];
    rec(gas, 0, 0, 0, gas.unit.one_like(), &mut out);
    out
}

/// `Z_r - exp(log series)` per grade.
pub fn mayer_residuals<C: Coefficient>(gas: &PolymerGas<C>, grade: usize) -> Result<(Vec<C>, Vec<C>, Vec<C>)> {
    let log = mayer_log_series(gas, grade)?;
    let z = partition_polynomial(gas, grade);
    let exp = exp_series(&log)?;
    let residual = z.iter().zip(&exp).map(|(a, b)| a.sub(b)).collect();
    Ok((log, z, residual))
}

#[derive(Clone, Debug, Serialize)]
pub struct MayerReport {
    pub boxes: usize,
    pub polymers: Vec<Polymer>,
    pub grade: usize,
    pub log_series: Vec<String>,
    pub partition_polynomial: Vec<String>,
    pub residuals: Vec<String>,
}

/// Checks `exp(mayer_log_series) = Z_r` grade by grade.
pub fn verify_mayer(gas: &PolymerGas<Rational>, grade: usize) -> Result<MayerReport> {
    let (log, z, residual) = mayer_residuals(gas, grade)?;
    if let Some(k) = residual.iter().position(|r| !r.is_zero()) {
        return Err(Error::IdentityFailure {
            check: "mayer exp(log) = Z_r",
            order: k,
            detail: format!(
                "Z_r coefficient {}, exp(log) coefficient {}",
                format_rational(&z[k]),
                format_rational(&(&z[k] - &residual[k]))
            ),
        });
    }
    let strings = |v: &[Rational]| v.iter().map(format_rational).collect();
    Ok(MayerReport {
        boxes: gas.boxes,
        polymers: gas.polymers.clone(),
        grade,
        log_series: strings(&log),
        partition_polynomial: strings(&z),
        residuals: strings(&residual),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PressureReport {
    pub boxes: usize,
    /// `(1/n)(Σ_b log A({b}) + log Z_r)` with `log Z_r` from the Mayer series.
    pub via_mayer: FormalSeries,
    /// `(1/n) log Z` from the partition series directly.
    pub direct: FormalSeries,
}

/// Finite-volume pressure of a box model through the polymer gas
/// `A_r(Y) = A(Y) / ∏_{b∈Y} A({b})` and its Mayer series.
pub fn finite_volume_pressure(model: &BoxModel) -> Result<PressureReport> {
    let n = model.boxes();
    let p = model.order();
    let singles: Vec<FormalSeries> = (1..=n).map(|b| activity(model, &[b])).collect::<Result<_>>()?;
    let inverses: Vec<FormalSeries> = singles.iter().map(|a| a.inverse()).collect::<Result<_>>()?;
    let mut entries = Vec::new();
    for mask in 1u64..1 << n {
        if mask.count_ones() < 2 {
            continue;
        }
        let polymer = Polymer::from_bits(mask)?;
        let mut a = activity(model, &polymer.boxes())?;
        if a.is_zero() {
            continue;
        }
        for b in polymer.boxes() {
            a = a.mul(&inverses[b - 1]);
        }
        entries.push((polymer, a));
    }
    // A(Y) = O(λ^{|Y|}) with |Y| ≥ 2, so grade k starts at λ^{2k}
    let grade = p / 2;
    let gas = PolymerGas::new(n, entries, FormalSeries::zero(p))?;
    let log_zr = mayer_log_series(&gas, grade)?
        .into_iter()
        .fold(FormalSeries::zero(p), |acc, c| acc.add(&c));
    let mut total = log_zr;
    for a in &singles {
        total = total.add(&a.log()?);
    }
    let inv_n = Rational::new(1.into(), (n as i64).into());
    Ok(PressureReport {
        boxes: n,
        via_mayer: total.scale(&inv_n),
        direct: partition_series(model)?.log()?.scale(&inv_n),
    })
}
