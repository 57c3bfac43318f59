use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::bruteforce::digits;
use super::GrassmannModel;
use crate::combinat::{is_odd, partition_blocks, permutations, set_partitions, UnionFind};
use crate::error::Result;
use crate::forest::{enumerate_trees, Link, Tree};
use crate::rational::{factorial, falling_factorial, Rational};
use crate::symbolic::{integrate_min_expression, FormalSeries, MinExpression};
use crate::weakening::{symmetric_symbol, WeakeningSymbol};

/// Field slot `(vertex, loop)`; vertex 1-based, loop 0 or 1. The vertex
/// `Σ_{a,b} ψ̄_a ψ_a ψ̄_b ψ_b` has loop 0 colored `a` and loop 1 colored `b`.
pub type Slot = (usize, usize);

fn index(slot: Slot) -> usize {
    2 * (slot.0 - 1) + slot.1
}

/// One tree line contracted as `C(x_ψ, x_ψ̄)` between a `ψ` slot and a `ψ̄` slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LineEnds {
    pub psi: Slot,
    pub psibar: Slot,
}

/// A spanning tree with, per line, the arrow and the slots it contracts.
#[derive(Clone, Debug, Serialize)]
pub struct TreeDecoration {
    pub n: usize,
    pub links: Vec<Link>,
    pub lines: Vec<LineEnds>,
}

impl TreeDecoration {
    /// Every choice of arrow and slots using each slot at most once.
    pub fn all(tree: &Tree) -> Vec<TreeDecoration> {
        let n = tree.n();
        let links = tree.links().to_vec();
        let mut out = Vec::new();
        let mut used_psi = vec![false; 2 * n];
        let mut used_bar = vec![false; 2 * n];
        let mut lines = Vec::with_capacity(links.len());
        fn rec(
            links: &[Link],
            n: usize,
            used_psi: &mut [bool],
            used_bar: &mut [bool],
            lines: &mut Vec<LineEnds>,
            out: &mut Vec<TreeDecoration>,
        ) {
            let k = lines.len();
            if k == links.len() {
                out.push(TreeDecoration {
                    n,
                    links: links.to_vec(),
                    lines: lines.clone(),
                });
                return;
            }
            let l = links[k];
            for (p, q) in [(l.lo(), l.hi()), (l.hi(), l.lo())] {
                for a in 0..2 {
                    for b in 0..2 {
                        let (ps, qs) = (index((p, a)), index((q, b)));
                        if used_psi[ps] || used_bar[qs] {
                            continue;
                        }
                        used_psi[ps] = true;
                        used_bar[qs] = true;
                        lines.push(LineEnds {
                            psi: (p, a),
                            psibar: (q, b),
                        });
                        rec(links, n, used_psi, used_bar, lines, out);
                        lines.pop();
                        used_psi[ps] = false;
                        used_bar[qs] = false;
                    }
                }
            }
        }
        rec(&links, n, &mut used_psi, &mut used_bar, &mut lines, &mut out);
        out
    }

    /// `true` where the lower vertex of the link carries the `ψ` end.
    pub fn arrows(&self) -> Vec<bool> {
        self.links
            .iter()
            .zip(&self.lines)
            .map(|(l, e)| e.psi.0 == l.lo())
            .collect()
    }

    /// Uncontracted `ψ` slots, in increasing order.
    pub fn residual_rows(&self) -> Vec<Slot> {
        self.residual(|e| e.psi)
    }

    /// Uncontracted `ψ̄` slots, in increasing order.
    pub fn residual_cols(&self) -> Vec<Slot> {
        self.residual(|e| e.psibar)
    }

    fn residual(&self, end: impl Fn(&LineEnds) -> Slot) -> Vec<Slot> {
        let used: Vec<Slot> = self.lines.iter().map(end).collect();
        (1..=self.n)
            .flat_map(|v| [(v, 0), (v, 1)])
            .filter(|s| !used.contains(s))
            .collect()
    }

    /// `ε`: parity of the permutation sending each line's row to its column
    /// and the remaining rows to the remaining columns in increasing order.
    pub fn sign(&self) -> i8 {
        let mut perm = vec![0usize; 2 * self.n];
        for e in &self.lines {
            perm[index(e.psi)] = index(e.psibar);
        }
        for (r, c) in self.residual_rows().into_iter().zip(self.residual_cols()) {
            perm[index(r)] = index(c);
        }
        if is_odd(&perm) {
            -1
        } else {
            1
        }
    }

    /// Loop-color classes forced equal by the tree lines: a component id per
    /// loop `2(v-1)+λ`, and the number of components (`n + 1`).
    pub fn loop_components(&self) -> (Vec<usize>, usize) {
        let mut uf = UnionFind::new(2 * self.n);
        for e in &self.lines {
            uf.union(index(e.psi), index(e.psibar));
        }
        let mut ids = vec![usize::MAX; 2 * self.n];
        let mut count = 0;
        let mut comp = vec![0; 2 * self.n];
        for (s, c) in comp.iter_mut().enumerate() {
            let root = uf.find(s);
            if ids[root] == usize::MAX {
                ids[root] = count;
                count += 1;
            }
            *c = ids[root];
        }
        (comp, count)
    }
}

/// The `(n+1)×(n+1)` matrix of residual contractions,
/// `[c(r) = c(r')] · C(x_v, x_u) · w_{vu}`, with `w_{vv} = 1`.
#[derive(Clone, Debug)]
pub struct LoopMatrix {
    pub rows: Vec<Slot>,
    pub cols: Vec<Slot>,
    pub entries: Vec<Vec<MinExpression>>,
}

impl LoopMatrix {
    /// `colors` holds a color per loop `2(v-1)+λ`, `sites` a site per vertex.
    pub fn build(
        model: &GrassmannModel,
        tree: &Tree,
        decoration: &TreeDecoration,
        sites: &[usize],
        colors: &[usize],
    ) -> Result<Self> {
        let tau = tree.links().len();
        let rows = decoration.residual_rows();
        let cols = decoration.residual_cols();
        let mut entries = Vec::with_capacity(rows.len());
        for &r in &rows {
            let mut row = Vec::with_capacity(cols.len());
            for &c in &cols {
                let cxy = model.c(sites[r.0 - 1], sites[c.0 - 1]);
                if colors[index(r)] != colors[index(c)] || cxy.is_zero() {
                    row.push(MinExpression::zero(tau));
                    continue;
                }
                row.push(match symmetric_symbol(tree.forest(), r.0, c.0)? {
                    WeakeningSymbol::Zero => MinExpression::zero(tau),
                    WeakeningSymbol::One => MinExpression::constant(tau, cxy.clone()),
                    WeakeningSymbol::Min(mask) => MinExpression::min_of(tau, mask)?.scale(cxy),
                });
            }
            entries.push(row);
        }
        Ok(LoopMatrix { rows, cols, entries })
    }

    pub fn determinant(&self) -> MinExpression {
        loop_determinant(&self.entries)
    }
}

/// Leibniz expansion of a small matrix of min-expressions.
pub fn loop_determinant(m: &[Vec<MinExpression>]) -> MinExpression {
    let size = m.len();
    let tau = m.first().and_then(|r| r.first()).map_or(0, |e| e.tau());
    let mut det = MinExpression::zero(tau);
    if size == 0 {
        return MinExpression::one(tau);
    }
    'perms: for perm in permutations(size) {
        let mut term = MinExpression::one(tau);
        for (i, &j) in perm.iter().enumerate() {
            if m[i][j].is_zero() {
                continue 'perms;
            }
            term = term.mul(&m[i][j]);
        }
        if is_odd(&perm) {
            det = det.sub(&term);
        } else {
            det.add_assign(&term);
        }
    }
    det
}

/// How the colors of the `n + 1` loop components are summed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorSummation {
    /// Every assignment of `N` colors to the `2n` loops.
    Explicit,
    /// One term per set partition of the components into `B ≤ N` blocks,
    /// weighted by `N (N-1) ⋯ (N-B+1)`.
    Partitions,
}

fn decoration_sum(
    model: &GrassmannModel,
    tree: &Tree,
    decoration: &TreeDecoration,
    summation: ColorSummation,
) -> Result<Rational> {
    let n = tree.n();
    let l = model.sites() as u64;
    let nc = model.colors();
    let (comp, ncomp) = decoration.loop_components();
    // (color per loop, multiplicity)
    let colorings: Vec<(Vec<usize>, Rational)> = match summation {
        ColorSummation::Explicit => (0..(nc as u64).pow(2 * n as u32))
            .map(|code| digits(code, nc as u64, 2 * n))
            .filter(|c| decoration.lines.iter().all(|e| c[index(e.psi)] == c[index(e.psibar)]))
            .map(|c| (c, Rational::one()))
            .collect(),
        ColorSummation::Partitions => set_partitions(ncomp)
            .into_iter()
            .filter_map(|labels| {
                let blocks = partition_blocks(&labels).len();
                (blocks <= nc).then(|| {
                    let colors = comp.iter().map(|&c| labels[c]).collect();
                    (colors, Rational::from_integer(falling_factorial(nc, blocks)))
                })
            })
            .collect(),
    };
    let mut total = Rational::zero();
    for code in 0..l.pow(n as u32 - 1) {
        let mut sites = vec![0];
        sites.extend(digits(code, l, n - 1));
        let mut lines = Rational::one();
        for e in &decoration.lines {
            lines *= model.c(sites[e.psi.0 - 1], sites[e.psibar.0 - 1]);
        }
        if lines.is_zero() {
            continue;
        }
        let mut colored = Rational::zero();
        for (colors, weight) in &colorings {
            let m = LoopMatrix::build(model, tree, decoration, &sites, colors)?;
            let det = m.determinant();
            if det.is_zero() {
                continue;
            }
            colored += integrate_min_expression(&det)? * weight;
        }
        total += lines * colored;
    }
    if decoration.sign() < 0 {
        total = -total;
    }
    Ok(total)
}

/// Pressure coefficients from the tree expansion: `λⁿ/(Nⁿ n!)` times the
/// sum over trees, arrows and slots, colors, and sites with vertex 1 at the
/// origin, of `ε ∏_lines C · ∫ dw det(loop matrix)`.
pub fn pressure_series_tree(model: &GrassmannModel) -> Result<FormalSeries> {
    pressure_series_tree_with(model, ColorSummation::Partitions)
}

pub fn pressure_series_tree_with(model: &GrassmannModel, summation: ColorSummation) -> Result<FormalSeries> {
    let mut coeffs = vec![Rational::zero()];
    for n in 1..=model.order() {
        let jobs: Vec<(Tree, TreeDecoration)> = enumerate_trees(n)?
            .into_iter()
            .flat_map(|t| TreeDecoration::all(&t).into_iter().map(move |d| (t.clone(), d)))
            .collect();
        let sum = jobs
            .par_iter()
            .map(|(t, d)| decoration_sum(model, t, d, summation))
            .try_reduce(Rational::zero, |a, b| Ok(a + b))?;
        let norm = Rational::from_integer(factorial(n))
            * Rational::from_integer(num_bigint::BigInt::from(model.colors()).pow(n as u32));
        let mut c = sum / norm;
        if model.order_sign(n) {
            c = -c;
        }
        coeffs.push(c);
    }
    Ok(FormalSeries::new(coeffs))
}

#[derive(Clone, Debug, Serialize)]
pub struct SignAuditRow {
    pub links: Vec<Link>,
    pub arrows: Vec<bool>,
    pub lines: Vec<LineEnds>,
    pub residual_rows: Vec<Slot>,
    pub residual_cols: Vec<Slot>,
    pub sign: i8,
}

/// The sign `ε` of every decoration at order `n`.
pub fn sign_audit(n: usize) -> Result<Vec<SignAuditRow>> {
    Ok(enumerate_trees(n)?
        .iter()
        .flat_map(TreeDecoration::all)
        .map(|d| SignAuditRow {
            arrows: d.arrows(),
            residual_rows: d.residual_rows(),
            residual_cols: d.residual_cols(),
            sign: d.sign(),
            links: d.links.clone(),
            lines: d.lines.clone(),
        })
        .collect())
}
