//! Links, forests and trees on the vertex set `{1..n}`.
//!
//! Vertices are 1-based throughout the public API. Enumerations are
//! canonical: forests and trees come out in lexicographic order of their
//! sorted link lists, with a prefix ordered before its extensions.

use std::collections::VecDeque;
use std::fmt;

use num_bigint::BigInt;
use serde::Serialize;

use crate::combinat::UnionFind;
use crate::error::{Error, Result};
use crate::limits::{self, Limits};
use crate::rational::factorial;

/// An unordered pair `{lo, hi}` with `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Link {
    lo: usize,
    hi: usize,
}

impl Link {
    pub fn new(i: usize, j: usize) -> Result<Self> {
        if i == j || i == 0 || j == 0 {
            return Err(Error::validation(format!("invalid link {{{i},{j}}}")));
        }
        Ok(Link {
            lo: i.min(j),
            hi: i.max(j),
        })
    }

    pub fn lo(self) -> usize {
        self.lo
    }

    pub fn hi(self) -> usize {
        self.hi
    }

    pub fn contains(self, v: usize) -> bool {
        self.lo == v || self.hi == v
    }

    pub fn other(self, v: usize) -> usize {
        if self.lo == v {
            self.hi
        } else {
            self.lo
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lo, self.hi)
    }
}

impl Serialize for Link {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.lo, self.hi].serialize(s)
    }
}

/// All pairs of `{1..n}` in lexicographic order.
pub fn all_links(n: usize) -> Vec<Link> {
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 1..=n {
        for j in i + 1..=n {
            out.push(Link { lo: i, hi: j });
        }
    }
    out
}

/// Position of `link` in [`all_links`]`(n)`.
pub fn link_index(n: usize, link: Link) -> usize {
    let i = link.lo - 1;
    i * (2 * n - i - 1) / 2 + (link.hi - link.lo - 1)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinkSet {
    n: usize,
    links: Vec<Link>,
}

impl LinkSet {
    pub fn new(n: usize, links: impl IntoIterator<Item = Link>) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("vertex count must be at least 1"));
        }
        let mut links: Vec<Link> = links.into_iter().collect();
        if let Some(l) = links.iter().find(|l| l.hi > n) {
            return Err(Error::validation(format!("link {l} outside 1..{n}")));
        }
        links.sort();
        if links.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::validation("duplicate link"));
        }
        Ok(LinkSet { n, links })
    }

    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let links = pairs
            .iter()
            .map(|&(i, j)| Link::new(i, j))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, links)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// `true` when no subset of the links closes a loop.
    pub fn is_loop_free(&self) -> bool {
        let mut uf = UnionFind::new(self.n + 1);
        self.links.iter().all(|l| uf.union(l.lo, l.hi))
    }
}

/// A loop-free link set together with its clusters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Forest {
    links: LinkSet,
    clusters: Vec<Vec<usize>>,
    cluster_of: Vec<usize>,
}

impl Forest {
    pub fn new(links: LinkSet) -> Result<Self> {
        if !links.is_loop_free() {
            return Err(Error::validation("link set contains a loop"));
        }
        let n = links.n;
        let mut uf = UnionFind::new(n + 1);
        for l in &links.links {
            uf.union(l.lo, l.hi);
        }
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        let mut label = vec![usize::MAX; n + 1];
        let mut cluster_of = vec![0; n + 1];
        for v in 1..=n {
            let r = uf.find(v);
            if label[r] == usize::MAX {
                label[r] = clusters.len();
                clusters.push(Vec::new());
            }
            clusters[label[r]].push(v);
            cluster_of[v] = label[r];
        }
        Ok(Forest {
            links,
            clusters,
            cluster_of,
        })
    }

    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::new(LinkSet::from_pairs(n, pairs)?)
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(LinkSet::new(n, [])?)
    }

    pub fn n(&self) -> usize {
        self.links.n
    }

    pub fn links(&self) -> &[Link] {
        &self.links.links
    }

    pub fn link_set(&self) -> &LinkSet {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Connected components, each sorted, ordered by least element.
    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn same_cluster(&self, i: usize, j: usize) -> bool {
        self.cluster_of[i] == self.cluster_of[j]
    }

    pub fn contains(&self, link: Link) -> bool {
        self.links.links.binary_search(&link).is_ok()
    }

    /// Index of `link` in [`Forest::links`].
    pub fn position(&self, link: Link) -> Option<usize> {
        self.links.links.binary_search(&link).ok()
    }

    pub fn neighbours(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.links()
            .iter()
            .filter(move |l| l.contains(v))
            .map(move |l| l.other(v))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.links().iter().filter(|l| l.contains(v)).count()
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v == 0 || v > self.n() {
            Err(Error::validation(format!("vertex {v} outside 1..{}", self.n())))
        } else {
            Ok(())
        }
    }

    /// The unique simple path from `i` to `j`, `None` across clusters.
    pub fn path(&self, i: usize, j: usize) -> Result<Option<Vec<Link>>> {
        self.check_vertex(i)?;
        self.check_vertex(j)?;
        if !self.same_cluster(i, j) {
            return Ok(None);
        }
        let n = self.n();
        let mut prev = vec![0usize; n + 1];
        let mut seen = vec![false; n + 1];
        let mut queue = VecDeque::from([i]);
        seen[i] = true;
        while let Some(v) = queue.pop_front() {
            if v == j {
                break;
            }
            for u in self.neighbours(v) {
                if !seen[u] {
                    seen[u] = true;
                    prev[u] = v;
                    queue.push_back(u);
                }
            }
        }
        let mut path = Vec::new();
        let mut v = j;
        while v != i {
            path.push(Link::new(v, prev[v])?);
            v = prev[v];
        }
        path.reverse();
        Ok(Some(path))
    }

    /// Heights below the least element of each cluster.
    pub fn layers(&self) -> Vec<usize> {
        let n = self.n();
        let mut layer = vec![0usize; n + 1];
        for cluster in &self.clusters {
            let root = cluster[0];
            let mut seen = vec![false; n + 1];
            seen[root] = true;
            let mut queue = VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                for u in self.neighbours(v) {
                    if !seen[u] {
                        seen[u] = true;
                        layer[u] = layer[v] + 1;
                        queue.push_back(u);
                    }
                }
            }
        }
        layer
    }

    /// Neighbour of `v` one layer closer to its cluster root.
    pub fn ancestor(&self, v: usize, layers: &[usize]) -> Option<usize> {
        if layers[v] == 0 {
            return None;
        }
        self.neighbours(v).find(|&u| layers[u] + 1 == layers[v])
    }
}

impl Serialize for Forest {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.links().serialize(s)
    }
}

/// A forest with a single cluster, plus a root and per-vertex layers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tree {
    forest: Forest,
    root: usize,
    layers: Vec<usize>,
}

impl Tree {
    pub fn new(forest: Forest) -> Result<Self> {
        if forest.clusters().len() != 1 {
            return Err(Error::validation("a tree must connect all vertices"));
        }
        let layers = forest.layers();
        Ok(Tree {
            forest,
            root: 1,
            layers,
        })
    }

    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::new(Forest::from_pairs(n, pairs)?)
    }

    /// Re-roots the tree at `root`.
    pub fn rooted_at(mut self, root: usize) -> Result<Self> {
        self.forest.check_vertex(root)?;
        let n = self.n();
        let mut layers = vec![0usize; n + 1];
        let mut seen = vec![false; n + 1];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for u in self.forest.neighbours(v) {
                if !seen[u] {
                    seen[u] = true;
                    layers[u] = layers[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        self.root = root;
        self.layers = layers;
        Ok(self)
    }

    pub fn forest(&self) -> &Forest {
        &self.forest
    }

    pub fn n(&self) -> usize {
        self.forest.n()
    }

    pub fn links(&self) -> &[Link] {
        self.forest.links()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Layer of vertex `v` (index 0 unused).
    pub fn layer(&self, v: usize) -> usize {
        self.layers[v]
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.forest.ancestor(v, &self.layers)
    }

    /// Vertices in breadth-first order from the root.
    pub fn bfs_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (1..=self.n()).collect();
        order.sort_by_key(|&v| (self.layers[v], v));
        order
    }
}

impl Serialize for Tree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.links().serialize(s)
    }
}

fn check_enumeration_size(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::validation("vertex count must be at least 1"));
    }
    Limits::check("vertices", n, limits::current().max_vertices)
}

/// Every forest on `{1..n}`, the empty forest first.
pub fn enumerate_forests(n: usize) -> Result<Vec<Forest>> {
    check_enumeration_size(n)?;
    let all = all_links(n);
    let mut out = Vec::new();
    let mut current = Vec::new();
    let comp: Vec<usize> = (0..=n).collect();
    forests_rec(n, &all, 0, &mut current, comp, &mut out)?;
    Ok(out)
}

fn forests_rec(
    n: usize,
    all: &[Link],
    start: usize,
    current: &mut Vec<Link>,
    comp: Vec<usize>,
    out: &mut Vec<Forest>,
) -> Result<()> {
    out.push(Forest::new(LinkSet {
        n,
        links: current.clone(),
    })?);
    for (idx, &l) in all.iter().enumerate().skip(start) {
        let (a, b) = (comp[l.lo], comp[l.hi]);
        if a == b {
            continue;
        }
        let merged: Vec<usize> = comp.iter().map(|&c| if c == b { a } else { c }).collect();
        current.push(l);
        forests_rec(n, all, idx + 1, current, merged, out)?;
        current.pop();
    }
    Ok(())
}

/// Decodes a Prüfer sequence (entries in `1..=n`, length `n - 2`).
pub fn tree_from_prufer(n: usize, sequence: &[usize]) -> Result<Tree> {
    if n < 2 || sequence.len() != n - 2 {
        return Err(Error::validation("Prüfer sequence must have length n - 2"));
    }
    if sequence.iter().any(|&v| v == 0 || v > n) {
        return Err(Error::validation("Prüfer entry outside 1..n"));
    }
    let mut degree = vec![1usize; n + 1];
    for &v in sequence {
        degree[v] += 1;
    }
    let mut links = Vec::with_capacity(n - 1);
    for &v in sequence {
        let leaf = (1..=n).find(|&u| degree[u] == 1).unwrap();
        links.push(Link::new(leaf, v)?);
        degree[leaf] -= 1;
        degree[v] -= 1;
    }
    let rest: Vec<usize> = (1..=n).filter(|&u| degree[u] == 1).collect();
    links.push(Link::new(rest[0], rest[1])?);
    Tree::new(Forest::new(LinkSet::new(n, links)?)?)
}

/// All labeled trees on `{1..n}` in canonical order. For `n = 1` this is
/// the single empty tree.
pub fn enumerate_trees(n: usize) -> Result<Vec<Tree>> {
    check_enumeration_size(n)?;
    if n == 1 {
        return Ok(vec![Tree::new(Forest::empty(1)?)?]);
    }
    let len = n - 2;
    let total = n.pow(len as u32);
    let mut trees = Vec::with_capacity(total);
    let mut seq = vec![1usize; len];
    for code in 0..total {
        let mut c = code;
        for slot in seq.iter_mut().rev() {
            *slot = c % n + 1;
            c /= n;
        }
        trees.push(tree_from_prufer(n, &seq)?);
    }
    trees.sort_by(|a, b| a.links().cmp(b.links()));
    Ok(trees)
}

/// `tree_path` with the forest's vertex checks.
pub fn tree_path(forest: &Forest, i: usize, j: usize) -> Result<Option<Vec<Link>>> {
    forest.path(i, j)
}

/// Number of labeled trees on `{1..n}` where vertex `i` has degree
/// `degrees[i-1]`: `(n-2)! / prod (d_i - 1)!`.
pub fn count_trees_by_degree(n: usize, degrees: &[usize]) -> Result<BigInt> {
    if n < 2 {
        return Err(Error::validation("degree counts need n >= 2"));
    }
    if degrees.len() != n {
        return Err(Error::validation(format!(
            "expected {n} degrees, got {}",
            degrees.len()
        )));
    }
    if degrees.contains(&0) {
        return Err(Error::validation("every degree must be at least 1"));
    }
    let sum: usize = degrees.iter().sum();
    if sum != 2 * (n - 1) {
        return Err(Error::validation(format!(
            "degree sum {sum} differs from 2(n-1) = {}",
            2 * (n - 1)
        )));
    }
    let denom = degrees.iter().fold(BigInt::from(1), |acc, &d| acc * factorial(d - 1));
    Ok(factorial(n - 2) / denom)
}

/// All valid degree sequences for trees on `n >= 2` vertices.
pub fn degree_sequences(n: usize) -> Vec<Vec<usize>> {
    crate::combinat::compositions(n - 2, n)
        .into_iter()
        .map(|excess| excess.into_iter().map(|e| e + 1).collect())
        .collect()
}
