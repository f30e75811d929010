//! Rooted unit-edge trees, Gromov products at the root, annuli and the
//! annulus refinement that turns radial bands into bounded separated pieces.

use std::collections::HashMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::family::{is_r_disjoint, CoverWitness, MeshBound, PointSet, SubsetFamily};
use crate::metric::Metric;
use crate::rational::{ceil_int, int, Rational};
use crate::union_find::UnionFind;

/// A finite rooted tree with unit edges.
///
/// Vertex 0 is always the root.
#[derive(Debug, Clone, PartialEq)]
pub struct RootedTree {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    parent: Vec<usize>,
    depth: Vec<usize>,
}

impl RootedTree {
    /// Builds a tree from `(parent, child)` label pairs.
    pub fn from_edges<S: AsRef<str>>(root: &str, edges: &[(S, S)]) -> Result<Self> {
        let mut labels = vec![root.to_string()];
        let mut index = HashMap::from([(root.to_string(), 0usize)]);
        let mut intern = |label: &str, labels: &mut Vec<String>| -> usize {
            *index.entry(label.to_string()).or_insert_with(|| {
                labels.push(label.to_string());
                labels.len() - 1
            })
        };
        let mut parent_of: Vec<Option<usize>> = vec![None];
        for (p, c) in edges {
            let p = intern(p.as_ref(), &mut labels);
            let c = intern(c.as_ref(), &mut labels);
            parent_of.resize(labels.len(), None);
            if c == 0 {
                return Err(Error::InvalidTree(format!("the root `{root}` cannot be a child")));
            }
            if p == c {
                return Err(Error::InvalidTree(format!("self-loop at `{}`", labels[c])));
            }
            if let Some(existing) = parent_of[c] {
                if existing != p {
                    return Err(Error::InvalidTree(format!("`{}` has two parents", labels[c])));
                }
            }
            parent_of[c] = Some(p);
        }
        let mut parent = Vec::with_capacity(labels.len());
        for (v, p) in parent_of.iter().enumerate() {
            match (v, p) {
                (0, _) => parent.push(0),
                (_, Some(p)) => parent.push(*p),
                (_, None) => {
                    return Err(Error::InvalidTree(format!("`{}` has no parent", labels[v])));
                }
            }
        }
        Self::from_parents(labels, parent)
    }

    /// Builds a tree from a parent array; `parent[0]` must be `0` (the root).
    pub fn from_parents(labels: Vec<String>, parent: Vec<usize>) -> Result<Self> {
        let n = labels.len();
        if n == 0 || parent.len() != n {
            return Err(Error::InvalidTree("parent array must match a nonempty label list".into()));
        }
        if parent[0] != 0 {
            return Err(Error::InvalidTree("vertex 0 must be the root".into()));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::InvalidTree(format!("duplicate vertex `{l}`")));
            }
        }
        // Depth by memoized parent walks; a walk longer than n means a cycle.
        let mut depth: Vec<Option<usize>> = vec![None; n];
        depth[0] = Some(0);
        for start in 0..n {
            let mut chain = Vec::new();
            let mut v = start;
            while depth[v].is_none() {
                if parent[v] >= n {
                    return Err(Error::InvalidTree(format!("`{}` has an out-of-range parent", labels[v])));
                }
                chain.push(v);
                if chain.len() > n {
                    return Err(Error::InvalidTree(format!("cycle through `{}`", labels[start])));
                }
                v = parent[v];
            }
            let mut d = depth[v].expect("loop exit");
            for &u in chain.iter().rev() {
                d += 1;
                depth[u] = Some(d);
            }
        }
        Ok(Self {
            labels,
            index,
            parent,
            depth: depth.into_iter().map(|d| d.expect("all set")).collect(),
        })
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn parent(&self, v: usize) -> usize {
        self.parent[v]
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    pub fn max_depth(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vertex(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// `(parent, child)` label pairs in vertex order.
    pub fn edges(&self) -> Vec<(String, String)> {
        (1..self.len())
            .map(|v| (self.labels[self.parent[v]].clone(), self.labels[v].clone()))
            .collect()
    }

    pub fn lca(&self, mut u: usize, mut v: usize) -> usize {
        while self.depth[u] > self.depth[v] {
            u = self.parent[u];
        }
        while self.depth[v] > self.depth[u] {
            v = self.parent[v];
        }
        while u != v {
            u = self.parent[u];
            v = self.parent[v];
        }
        u
    }

    /// The same tree with an extra leaf under the root when it has a single vertex.
    ///
    /// Returns whether padding happened.
    pub fn padded(&self) -> (RootedTree, bool) {
        if self.len() >= 2 {
            return (self.clone(), false);
        }
        let mut labels = self.labels.clone();
        let mut pad = format!("{}'pad", self.labels[0]);
        while self.index.contains_key(&pad) {
            pad.push('\'');
        }
        labels.push(pad);
        let tree = Self::from_parents(labels, vec![0, 0]).expect("two-vertex tree");
        (tree, true)
    }
}

impl Metric for RootedTree {
    fn len(&self) -> usize {
        self.labels.len()
    }

    fn dist(&self, i: usize, j: usize) -> Rational {
        let l = self.lca(i, j);
        int((self.depth[i] + self.depth[j] - 2 * self.depth[l]) as i64)
    }

    fn label(&self, i: usize) -> String {
        self.labels[i].clone()
    }

    fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }
}

/// `(x|y)_e = (d(x,e) + d(y,e) - d(x,y)) / 2` at the root `e`.
pub fn gromov_product(tree: &RootedTree, x: usize, y: usize) -> Result<Rational> {
    let n = tree.len();
    for v in [x, y] {
        if v >= n {
            return Err(Error::PointOutOfRange { index: v, len: n });
        }
    }
    let e = tree.root();
    Ok((tree.dist(x, e) + tree.dist(y, e) - tree.dist(x, y)) / int(2))
}

/// Radial band `{ v : a <= d(v,e) < b }`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Annulus {
    pub a: Rational,
    pub b: Rational,
}

impl Annulus {
    pub fn new(a: Rational, b: Rational) -> Result<Self> {
        if a < Rational::zero() || a >= b {
            return Err(Error::InvalidAnnulus { a, b });
        }
        Ok(Self { a, b })
    }

    pub fn width(&self) -> Rational {
        self.b - self.a
    }

    pub fn contains_depth(&self, depth: usize) -> bool {
        let d = int(depth as i64);
        self.a <= d && d < self.b
    }
}

pub fn annulus_points(tree: &RootedTree, annulus: &Annulus) -> PointSet {
    (0..tree.len())
        .filter(|&v| annulus.contains_depth(tree.depth(v)))
        .collect()
}

/// Splits one annulus into the classes of `x ~ y iff (x|y)_e >= a - R`.
///
/// Annuli with `a <= R` come back whole. Classes are ordered by their
/// smallest vertex label.
pub fn refine_annulus(tree: &RootedTree, annulus: &Annulus, separation: Rational) -> Vec<PointSet> {
    let points = annulus_points(tree, annulus);
    if points.is_empty() {
        return Vec::new();
    }
    if annulus.a <= separation {
        return vec![points];
    }
    let threshold = annulus.a - separation;
    let mut uf = UnionFind::new(points.len());
    for (i, &x) in points.iter().enumerate() {
        for (j, &y) in points.iter().enumerate().skip(i + 1) {
            let lca_depth = int(tree.depth(tree.lca(x, y)) as i64);
            if lca_depth >= threshold {
                uf.union(i, j);
            }
        }
    }
    let mut classes: Vec<PointSet> = uf
        .classes()
        .into_iter()
        .map(|c| c.into_iter().map(|i| points[i]).collect())
        .collect();
    sort_by_min_label(tree, &mut classes);
    classes
}

fn sort_by_min_label(tree: &RootedTree, sets: &mut [PointSet]) {
    sets.sort_by_cached_key(|s| s.iter().map(|&v| tree.labels[v].clone()).min());
}

/// Uniformly bounded `R`-disjoint refinement of an `R`-disjoint annulus family.
///
/// The returned family claims separation `R` and mesh `2w + 2R`, where `w` is
/// the largest input width.
pub fn refine_annuli(tree: &RootedTree, annuli: &[Annulus], separation: Rational) -> Result<SubsetFamily> {
    if separation <= Rational::zero() {
        return Err(Error::Precondition("refinement separation must be positive".into()));
    }
    let bands: Vec<PointSet> = annuli
        .iter()
        .map(|a| annulus_points(tree, a))
        .filter(|s| !s.is_empty())
        .collect();
    let check = is_r_disjoint(tree, &bands, separation);
    if !check.passed() {
        let v = &check.violations()[0];
        return Err(Error::Precondition(format!(
            "annuli are not {separation}-disjoint: two bands are at distance {}",
            v.measured.unwrap_or_default()
        )));
    }
    let width = annuli
        .iter()
        .map(Annulus::width)
        .max()
        .unwrap_or_else(Rational::zero);
    let mut sets: Vec<PointSet> = annuli
        .iter()
        .flat_map(|a| refine_annulus(tree, a, separation))
        .collect();
    sort_by_min_label(tree, &mut sets);
    SubsetFamily::new(
        sets,
        separation,
        MeshBound::Bounded(int(2) * width + int(2) * separation),
    )
}

/// Two `R`-disjoint families of bounded pieces covering the tree, with
/// disjoint unions: even and odd bands of width `ceil(R)`, each refined.
pub fn tree_asdim1_witness(tree: &RootedTree, separation: Rational) -> Result<CoverWitness> {
    if separation <= Rational::zero() {
        return Err(Error::Precondition("separation must be positive".into()));
    }
    let block = ceil_int(&separation);
    let max_depth = tree.max_depth() as i64;
    let mut even = Vec::new();
    let mut odd = Vec::new();
    let mut start = 0i64;
    let mut parity = 0;
    while start <= max_depth {
        let band = Annulus::new(int(start), int(start + block))?;
        if parity == 0 {
            even.push(band);
        } else {
            odd.push(band);
        }
        start += block;
        parity ^= 1;
    }
    let mesh = MeshBound::Bounded(int(2 * block) + int(2) * separation);
    let mut v0 = refine_annuli(tree, &even, separation)?;
    let mut v1 = refine_annuli(tree, &odd, separation)?;
    v0.mesh_bound = mesh;
    v1.mesh_bound = mesh;
    let v1 = remove_covered(v1, &v0);
    Ok(CoverWitness::new(vec![v0, v1]))
}

/// Replaces each member of `later` by its part outside `∪ earlier`, dropping empties.
pub fn remove_covered(later: SubsetFamily, earlier: &SubsetFamily) -> SubsetFamily {
    let covered = earlier.union();
    let separation = later.separation;
    let bound = later.mesh_bound;
    let sets = later
        .into_sets()
        .into_iter()
        .map(|s| crate::family::difference(&s, &covered))
        .collect();
    SubsetFamily::dropping_empty(sets, separation, bound)
}
