use serde::Serialize;

use super::bruteforce::digits;
use crate::error::{Error, Result};
use crate::forest::Tree;

/// Two ways of counting colorings compatible with a decorated tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ColoringRule {
    /// Root picks both loop colors, every later vertex inherits one from
    /// its parent line and picks the other.
    LayerClimbing,
    /// All `N^{2n}` loop colorings, kept if every line joins equal colors.
    Filter,
}

/// Arrow choices (`true`: lower vertex is the `ψ` end) leaving at most two
/// `ψ` and two `ψ̄` ends at each vertex.
pub fn valid_arrows(tree: &Tree) -> Vec<Vec<bool>> {
    let links = tree.links();
    (0..1u64 << links.len())
        .map(|code| (0..links.len()).map(|k| code >> k & 1 == 1).collect::<Vec<_>>())
        .filter(|arrows| {
            let mut out = vec![0; tree.n() + 1];
            let mut inn = vec![0; tree.n() + 1];
            for (l, &a) in links.iter().zip(arrows) {
                let (p, q) = if a { (l.lo(), l.hi()) } else { (l.hi(), l.lo()) };
                out[p] += 1;
                inn[q] += 1;
            }
            out.iter().chain(&inn).all(|&c| c <= 2)
        })
        .collect()
}

/// `(ψ end, ψ slot, ψ̄ end, ψ̄ slot)` per line, slots taken in link order.
fn canonical_slots(tree: &Tree, arrows: &[bool]) -> Vec<(usize, usize, usize, usize)> {
    let mut out = vec![0; tree.n() + 1];
    let mut inn = vec![0; tree.n() + 1];
    tree.links()
        .iter()
        .zip(arrows)
        .map(|(l, &a)| {
            let (p, q) = if a { (l.lo(), l.hi()) } else { (l.hi(), l.lo()) };
            let line = (p, out[p], q, inn[q]);
            out[p] += 1;
            inn[q] += 1;
            line
        })
        .collect()
}

/// Loop `2(v-1)+λ` holds `ψ_{v,λ}` and `ψ̄_{v,λ⊕β_v}`.
fn line_loops(lines: &[(usize, usize, usize, usize)], beta: &[usize]) -> Vec<(usize, usize)> {
    lines
        .iter()
        .map(|&(p, s, q, t)| (2 * (p - 1) + s, 2 * (q - 1) + (t ^ beta[q - 1])))
        .collect()
}

/// Colorings of the `2n` loops, over all circulations, in which every tree
/// line joins two loops of the same color.
pub fn coloring_count_for(tree: &Tree, arrows: &[bool], colors: usize, rule: ColoringRule) -> Result<u64> {
    let n = tree.n();
    if arrows.len() != tree.links().len() {
        return Err(Error::validation("one arrow per link"));
    }
    if !valid_arrows(tree).iter().any(|a| a == arrows) {
        return Err(Error::validation("arrows use a slot twice"));
    }
    let lines = canonical_slots(tree, arrows);
    let nc = colors as u64;
    let mut count = 0u64;
    for bcode in 0..1u64 << n {
        let beta = digits(bcode, 2, n);
        let joined = line_loops(&lines, &beta);
        let valid = |c: &[usize]| joined.iter().all(|&(a, b)| c[a] == c[b]);
        match rule {
            ColoringRule::Filter => {
                count += (0..nc.pow(2 * n as u32))
                    .filter(|&code| valid(&digits(code, nc, 2 * n)))
                    .count() as u64;
            }
            ColoringRule::LayerClimbing => {
                let root = tree.root();
                let mut partial = Vec::new();
                for a in 0..colors {
                    for b in 0..colors {
                        let mut c = vec![usize::MAX; 2 * n];
                        c[2 * (root - 1)] = a;
                        c[2 * (root - 1) + 1] = b;
                        partial.push(c);
                    }
                }
                for v in tree.bfs_order().into_iter().filter(|&v| v != root) {
                    let parent = tree.parent(v).expect("non-root vertex");
                    let k = tree
                        .links()
                        .iter()
                        .position(|l| l.contains(v) && l.contains(parent))
                        .expect("parent link");
                    let (x, y) = joined[k];
                    let (inherited, from) = if x / 2 + 1 == v { (x, y) } else { (y, x) };
                    let free = inherited ^ 1;
                    let mut next = Vec::with_capacity(partial.len() * colors);
                    for c in &partial {
                        for f in 0..colors {
                            let mut c = c.clone();
                            c[inherited] = c[from];
                            c[free] = f;
                            next.push(c);
                        }
                    }
                    partial = next;
                }
                debug_assert!(partial.iter().all(|c| valid(c)));
                count += partial.len() as u64;
            }
        }
    }
    Ok(count)
}

/// `2ⁿ N^{n+1}`: circulations times colorings per spanning tree and arrows.
pub fn coloring_count(n: usize, colors: usize) -> u64 {
    (1u64 << n) * (colors as u64).pow(n as u32 + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::enumerate_trees;

    #[test]
    fn arrows_on_a_star() {
        let star = Tree::from_pairs(4, &[(1, 2), (1, 3), (1, 4)]).unwrap();
        // centre may not have three outgoing or three incoming ends
        assert_eq!(valid_arrows(&star).len(), 6);
    }

    #[test]
    fn both_rules_give_closed_form() {
        for n in 1..=4 {
            for colors in 1..=3 {
                for t in enumerate_trees(n).unwrap() {
                    for a in valid_arrows(&t) {
                        let climb = coloring_count_for(&t, &a, colors, ColoringRule::LayerClimbing).unwrap();
                        let filter = coloring_count_for(&t, &a, colors, ColoringRule::Filter).unwrap();
                        assert_eq!(climb, coloring_count(n, colors));
                        assert_eq!(filter, climb);
                    }
                }
            }
        }
    }

    #[test]
    fn invalid_arrows_rejected() {
        let star = Tree::from_pairs(4, &[(1, 2), (1, 3), (1, 4)]).unwrap();
        assert!(coloring_count_for(&star, &[true, true, true], 2, ColoringRule::Filter).is_err());
    }
}
