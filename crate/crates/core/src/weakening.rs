//! Weakening factors for the symmetric and rooted interpolation rules,
//! weakening matrices, and exact positivity certificates.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forest::{Forest, Link};
use crate::matrix::{psd_certificate, PsdCertificate, QMatrix};
use crate::rational::Rational;
use crate::symbolic::LinkMask;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Symmetric,
    Rooted,
}

/// Symbolic value of a weakening factor over the forest's link weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WeakeningSymbol {
    Zero,
    One,
    /// `min{w_l : l ∈ mask}` over link positions of the forest.
    Min(LinkMask),
}

impl WeakeningSymbol {
    pub fn evaluate(self, w: &WeightAssignment) -> Rational {
        match self {
            WeakeningSymbol::Zero => Rational::zero(),
            WeakeningSymbol::One => Rational::one(),
            WeakeningSymbol::Min(mask) => (0..w.weights.len())
                .filter(|l| mask >> l & 1 == 1)
                .map(|l| &w.weights[l])
                .min()
                .cloned()
                .expect("nonempty mask"),
        }
    }
}

/// One weight in `[0,1]` per link of a forest, aligned with `forest.links()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightAssignment {
    weights: Vec<Rational>,
}

impl WeightAssignment {
    pub fn new(forest: &Forest, weights: Vec<Rational>) -> Result<Self> {
        if weights.len() != forest.len() {
            return Err(Error::validation(format!(
                "{} weights for a forest with {} links",
                weights.len(),
                forest.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| w.is_negative() || **w > Rational::one()) {
            return Err(Error::validation(format!("weight {w} outside [0,1]")));
        }
        Ok(WeightAssignment { weights })
    }

    pub fn uniform(forest: &Forest, value: Rational) -> Result<Self> {
        Self::new(forest, vec![value; forest.len()])
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn get(&self, forest: &Forest, link: Link) -> Option<&Rational> {
        forest.position(link).map(|p| &self.weights[p])
    }
}

fn check_pair(forest: &Forest, i: usize, j: usize) -> Result<()> {
    let n = forest.n();
    for v in [i, j] {
        if v == 0 || v > n {
            return Err(Error::validation(format!("vertex {v} outside 1..{n}")));
        }
    }
    Ok(())
}

/// Minimum over the connecting path; zero across clusters, one on the diagonal.
pub fn symmetric_symbol(forest: &Forest, i: usize, j: usize) -> Result<WeakeningSymbol> {
    check_pair(forest, i, j)?;
    if i == j {
        return Ok(WeakeningSymbol::One);
    }
    Ok(match forest.path(i, j)? {
        None => WeakeningSymbol::Zero,
        Some(path) => WeakeningSymbol::Min(
            path.iter()
                .map(|l| 1 << forest.position(*l).expect("path link in forest"))
                .fold(0, |a, b| a | b),
        ),
    })
}

/// Layer rule with the least vertex of each cluster as root.
pub fn rooted_symbol(forest: &Forest, layers: &[usize], i: usize, j: usize) -> Result<WeakeningSymbol> {
    check_pair(forest, i, j)?;
    if i == j {
        return Ok(WeakeningSymbol::One);
    }
    if !forest.same_cluster(i, j) {
        return Ok(WeakeningSymbol::Zero);
    }
    let (li, lj) = (layers[i], layers[j]);
    if li == lj {
        return Ok(WeakeningSymbol::One);
    }
    if li.abs_diff(lj) >= 2 {
        return Ok(WeakeningSymbol::Zero);
    }
    let deeper = if li > lj { i } else { j };
    let ancestor = forest
        .ancestor(deeper, layers)
        .expect("non-root vertex has an ancestor");
    let pos = forest
        .position(Link::new(deeper, ancestor)?)
        .expect("ancestor link in forest");
    Ok(WeakeningSymbol::Min(1 << pos))
}

pub fn symmetric_weakening(forest: &Forest, w: &WeightAssignment, i: usize, j: usize) -> Result<Rational> {
    Ok(symmetric_symbol(forest, i, j)?.evaluate(w))
}

pub fn rooted_weakening(forest: &Forest, w: &WeightAssignment, i: usize, j: usize) -> Result<Rational> {
    Ok(rooted_symbol(forest, &forest.layers(), i, j)?.evaluate(w))
}

/// The `n×n` matrix of weakening factors, unit diagonal.
#[derive(Clone, Debug, Serialize)]
pub struct WeakeningMatrix {
    pub rule: Rule,
    pub matrix: QMatrix,
}

impl WeakeningMatrix {
    pub fn build(forest: &Forest, w: &WeightAssignment, rule: Rule) -> Result<Self> {
        let n = forest.n();
        let layers = forest.layers();
        let mut m = QMatrix::zeros(n, n);
        for i in 1..=n {
            for j in i..=n {
                let sym = match rule {
                    Rule::Symmetric => symmetric_symbol(forest, i, j)?,
                    Rule::Rooted => rooted_symbol(forest, &layers, i, j)?,
                };
                let v = sym.evaluate(w);
                m[(i - 1, j - 1)] = v.clone();
                m[(j - 1, i - 1)] = v;
            }
        }
        Ok(WeakeningMatrix { rule, matrix: m })
    }
}

pub fn is_positive_semidefinite(m: &QMatrix) -> Result<PsdCertificate> {
    psd_certificate(m)
}

/// One term `weight · (block indicator)` of a convex decomposition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockTerm {
    #[serde(with = "crate::rational::serde_str")]
    pub weight: Rational,
    /// Partition of `{1..n}` into blocks, singletons included.
    pub blocks: Vec<Vec<usize>>,
}

/// Writes the symmetric weakening matrix as a convex combination of block
/// matrices: for a threshold `t`, the blocks are the clusters of the links
/// with `w_l ≥ t`, and the matrix is the integral over `t ∈ (0,1]` of the
/// block indicator. Distinct weight values split `(0,1]` into intervals.
pub fn convex_block_decomposition(forest: &Forest, w: &WeightAssignment) -> Result<Vec<BlockTerm>> {
    let n = forest.n();
    let mut levels: Vec<Rational> = w.weights().to_vec();
    levels.sort();
    levels.dedup();
    let mut terms = Vec::new();
    let mut lower = Rational::zero();
    for level in levels.iter().chain(std::iter::once(&Rational::one())) {
        if *level <= lower {
            continue;
        }
        let kept: Vec<(usize, usize)> = forest
            .links()
            .iter()
            .zip(w.weights())
            .filter(|(_, wl)| *wl >= level)
            .map(|(l, _)| (l.lo(), l.hi()))
            .collect();
        let sub = Forest::from_pairs(n, &kept)?;
        terms.push(BlockTerm {
            weight: level - &lower,
            blocks: sub.clusters().to_vec(),
        });
        lower = level.clone();
    }
    Ok(terms)
}

/// `Σ weight · (1 on each block)`.
pub fn block_sum(n: usize, terms: &[BlockTerm]) -> QMatrix {
    let mut m = QMatrix::zeros(n, n);
    for t in terms {
        for block in &t.blocks {
            for &i in block {
                for &j in block {
                    m[(i - 1, j - 1)] += &t.weight;
                }
            }
        }
    }
    m
}

pub fn hadamard_product(a: &QMatrix, b: &QMatrix) -> Result<QMatrix> {
    a.hadamard(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::enumerate_forests;
    use crate::rational::{int, rat};

    fn chain() -> (Forest, WeightAssignment) {
        let f = Forest::from_pairs(3, &[(1, 2), (2, 3)]).unwrap();
        let w = WeightAssignment::new(&f, vec![rat(1, 2), rat(1, 4)]).unwrap();
        (f, w)
    }

    #[test]
    fn symmetric_examples() {
        let (f, w) = chain();
        assert_eq!(symmetric_weakening(&f, &w, 1, 3).unwrap(), rat(1, 4));
        assert_eq!(symmetric_weakening(&f, &w, 2, 2).unwrap(), int(1));
        let single = Forest::from_pairs(3, &[(1, 2)]).unwrap();
        let ws = WeightAssignment::new(&single, vec![rat(1, 2)]).unwrap();
        assert_eq!(symmetric_weakening(&single, &ws, 1, 3).unwrap(), int(0));
        assert!(symmetric_weakening(&single, &ws, 1, 4).is_err());
    }

    #[test]
    fn rooted_rules() {
        // root 1; layers: 1:0, 2:1, 3:2, 4:1; links sorted as 1-2, 1-4, 2-3
        let f = Forest::from_pairs(4, &[(1, 2), (2, 3), (1, 4)]).unwrap();
        let w = WeightAssignment::new(&f, vec![rat(1, 2), rat(1, 3), rat(1, 5)]).unwrap();
        assert_eq!(rooted_weakening(&f, &w, 2, 4).unwrap(), int(1)); // same layer
        assert_eq!(rooted_weakening(&f, &w, 1, 3).unwrap(), int(0)); // distant layers
        assert_eq!(rooted_weakening(&f, &w, 3, 4).unwrap(), rat(1, 5)); // w_{2,3}
        for (l, wl) in f.links().iter().zip(w.weights()) {
            assert_eq!(&rooted_weakening(&f, &w, l.lo(), l.hi()).unwrap(), wl);
            assert_eq!(&symmetric_weakening(&f, &w, l.lo(), l.hi()).unwrap(), wl);
        }
    }

    #[test]
    fn weights_validated() {
        let (f, _) = chain();
        assert!(WeightAssignment::new(&f, vec![rat(3, 2), int(0)]).is_err());
        assert!(WeightAssignment::new(&f, vec![int(1)]).is_err());
    }

    #[test]
    fn psd_examples() {
        let empty = Forest::empty(3).unwrap();
        let w0 = WeightAssignment::new(&empty, vec![]).unwrap();
        let m = WeakeningMatrix::build(&empty, &w0, Rule::Symmetric).unwrap();
        assert_eq!(m.matrix, QMatrix::identity(3));
        assert!(is_positive_semidefinite(&m.matrix).unwrap().is_psd);

        let (f, _) = chain();
        let ones = WeightAssignment::uniform(&f, int(1)).unwrap();
        let m = WeakeningMatrix::build(&f, &ones, Rule::Symmetric).unwrap();
        assert!(is_positive_semidefinite(&m.matrix).unwrap().is_psd);

        let (f, w) = chain();
        let m = WeakeningMatrix::build(&f, &w, Rule::Symmetric).unwrap();
        let cert = is_positive_semidefinite(&m.matrix).unwrap();
        assert!(cert.is_psd);
        // [[1,1/2,1/4],[1/2,1,1/4],[1/4,1/4,1]]: minors 1, 3/4, 11/16
        assert_eq!(cert.minors, vec![int(1), rat(3, 4), rat(11, 16)]);
    }

    #[test]
    fn decomposition_examples() {
        let f = Forest::from_pairs(2, &[(1, 2)]).unwrap();
        let w = WeightAssignment::new(&f, vec![int(1)]).unwrap();
        let d = convex_block_decomposition(&f, &w).unwrap();
        assert_eq!(
            d,
            vec![BlockTerm {
                weight: int(1),
                blocks: vec![vec![1, 2]]
            }]
        );

        let w = WeightAssignment::new(&f, vec![rat(1, 3)]).unwrap();
        let d = convex_block_decomposition(&f, &w).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d[0].weight, rat(1, 3));
        assert_eq!(d[0].blocks, vec![vec![1, 2]]);
        assert_eq!(d[1].weight, rat(2, 3));
        assert_eq!(d[1].blocks, vec![vec![1], vec![2]]);

        let (f, w) = chain();
        let d = convex_block_decomposition(&f, &w).unwrap();
        assert_eq!(d.len(), 3);
        let m = WeakeningMatrix::build(&f, &w, Rule::Symmetric).unwrap();
        assert_eq!(block_sum(3, &d), m.matrix);
    }

    #[test]
    fn decomposition_reconstructs_every_forest_n4() {
        let vals = [rat(0, 1), rat(1, 3), rat(1, 2), int(1)];
        for f in enumerate_forests(4).unwrap() {
            let w: Vec<Rational> = (0..f.len()).map(|i| vals[(i * 3 + 1) % 4].clone()).collect();
            let w = WeightAssignment::new(&f, w).unwrap();
            let d = convex_block_decomposition(&f, &w).unwrap();
            let total: Rational = d.iter().map(|t| t.weight.clone()).sum();
            assert_eq!(total, int(1));
            let m = WeakeningMatrix::build(&f, &w, Rule::Symmetric).unwrap();
            assert_eq!(block_sum(4, &d), m.matrix);
        }
    }

    #[test]
    fn hadamard_identities() {
        let (f, w) = chain();
        let a = WeakeningMatrix::build(&f, &w, Rule::Symmetric).unwrap().matrix;
        let id = QMatrix::identity(3);
        assert_eq!(hadamard_product(&a, &id).unwrap(), id);
        let ones = QMatrix::from_fn(3, 3, |_, _| int(1));
        assert_eq!(hadamard_product(&ones, &a).unwrap(), a);
        assert!(hadamard_product(&a, &QMatrix::identity(2)).is_err());
    }
}
