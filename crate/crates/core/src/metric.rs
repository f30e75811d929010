//! Finite metric spaces and the set-level distance primitives.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Anything that can report exact distances between indexed points.
///
/// Implemented by explicit distance matrices, rooted trees, lazy sup
/// products and finite samples of restricted products, so verification
/// never needs to materialize a product matrix.
pub trait Metric: Sync {
    fn len(&self) -> usize;

    fn dist(&self, i: usize, j: usize) -> Rational;

    fn label(&self, i: usize) -> String;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn index_of(&self, label: &str) -> Option<usize> {
        (0..self.len()).find(|&i| self.label(i) == label)
    }
}

impl<M: Metric + ?Sized> Metric for &M {
    fn len(&self) -> usize {
        (**self).len()
    }
    fn dist(&self, i: usize, j: usize) -> Rational {
        (**self).dist(i, j)
    }
    fn label(&self, i: usize) -> String {
        (**self).label(i)
    }
    fn index_of(&self, label: &str) -> Option<usize> {
        (**self).index_of(label)
    }
}

impl<M: Metric + ?Sized> Metric for Box<M> {
    fn len(&self) -> usize {
        (**self).len()
    }
    fn dist(&self, i: usize, j: usize) -> Rational {
        (**self).dist(i, j)
    }
    fn label(&self, i: usize) -> String {
        (**self).label(i)
    }
    fn index_of(&self, label: &str) -> Option<usize> {
        (**self).index_of(label)
    }
}

/// A finite metric space stored as a dense exact distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    dist: Vec<Rational>,
}

/// Weighted undirected edge between two labelled points.
#[derive(Debug, Clone)]
pub struct Edge {
    pub u: String,
    pub v: String,
    pub weight: Rational,
}

impl Edge {
    pub fn new(u: impl Into<String>, v: impl Into<String>, weight: Rational) -> Self {
        Self {
            u: u.into(),
            v: v.into(),
            weight,
        }
    }
}

fn label_index(labels: &[String]) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(labels.len());
    for (i, label) in labels.iter().enumerate() {
        if index.insert(label.clone(), i).is_some() {
            return Err(Error::InvalidMetric(format!("duplicate label `{label}`")));
        }
    }
    Ok(index)
}

impl MetricSpace {
    /// Shortest-path metric of a connected graph with positive edge weights.
    pub fn from_graph(labels: Vec<String>, edges: &[Edge]) -> Result<Self> {
        let index = label_index(&labels)?;
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidMetric("a metric space needs at least one point".into()));
        }
        let mut adjacency: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n];
        for edge in edges {
            if !edge.weight.is_positive() {
                return Err(Error::NonpositiveWeight {
                    u: edge.u.clone(),
                    v: edge.v.clone(),
                    weight: edge.weight,
                });
            }
            let u = *index
                .get(&edge.u)
                .ok_or_else(|| Error::UnknownLabel(edge.u.clone()))?;
            let v = *index
                .get(&edge.v)
                .ok_or_else(|| Error::UnknownLabel(edge.v.clone()))?;
            if u == v {
                continue;
            }
            adjacency[u].push((v, edge.weight));
            adjacency[v].push((u, edge.weight));
        }

        let mut dist = vec![Rational::zero(); n * n];
        for source in 0..n {
            let row = dijkstra(&adjacency, source);
            if let Some(missing) = row.iter().position(Option::is_none) {
                let component = component_of(&adjacency, missing)
                    .into_iter()
                    .map(|i| labels[i].clone())
                    .collect();
                return Err(Error::Disconnected {
                    component,
                    other: labels[source].clone(),
                });
            }
            for (target, d) in row.into_iter().enumerate() {
                dist[source * n + target] = d.expect("checked above");
            }
        }
        Ok(Self { labels, index, dist })
    }

    /// Wraps an explicit distance matrix after checking every metric axiom exactly.
    pub fn from_matrix(labels: Vec<String>, rows: Vec<Vec<Rational>>) -> Result<Self> {
        let space = Self::from_matrix_unchecked(labels, rows)?;
        space.check_axioms()?;
        Ok(space)
    }

    pub(crate) fn from_matrix_unchecked(labels: Vec<String>, rows: Vec<Vec<Rational>>) -> Result<Self> {
        let index = label_index(&labels)?;
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidMetric("a metric space needs at least one point".into()));
        }
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMetric(format!("distance matrix must be {n}x{n}")));
        }
        let dist = rows.into_iter().flatten().collect();
        Ok(Self { labels, index, dist })
    }

    /// Copies any [`Metric`] into a dense matrix.
    pub fn materialize<M: Metric + ?Sized>(metric: &M) -> Result<Self> {
        let n = metric.len();
        let labels: Vec<String> = (0..n).map(|i| metric.label(i)).collect();
        let rows = (0..n)
            .map(|i| (0..n).map(|j| metric.dist(i, j)).collect())
            .collect();
        Self::from_matrix_unchecked(labels, rows)
    }

    fn check_axioms(&self) -> Result<()> {
        let n = self.len();
        for x in 0..n {
            if !self.dist(x, x).is_zero() {
                return Err(Error::InvalidMetric(format!("d({0},{0}) is not zero", self.labels[x])));
            }
            for y in 0..n {
                let d = self.dist(x, y);
                if d != self.dist(y, x) {
                    return Err(Error::InvalidMetric(format!(
                        "d({},{}) is not symmetric",
                        self.labels[x], self.labels[y]
                    )));
                }
                if x != y && !d.is_positive() {
                    return Err(Error::InvalidMetric(format!(
                        "distinct points {} and {} are at distance {d}",
                        self.labels[x], self.labels[y]
                    )));
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                let dxy = self.dist(x, y);
                for z in 0..n {
                    if self.dist(x, z) > dxy + self.dist(y, z) {
                        return Err(Error::InvalidMetric(format!(
                            "triangle inequality fails for {}, {}, {}",
                            self.labels[x], self.labels[y], self.labels[z]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        let n = self.len();
        &self.dist[i * n..(i + 1) * n]
    }

    /// Restriction of the metric to the given points, in the given order.
    pub fn subspace(&self, points: &[usize]) -> Result<Self> {
        let labels = points.iter().map(|&p| self.labels[p].clone()).collect();
        let rows = points
            .iter()
            .map(|&p| points.iter().map(|&q| self.dist(p, q)).collect())
            .collect();
        Self::from_matrix_unchecked(labels, rows)
    }

    /// Resolves labels to indices.
    pub fn indices<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        labels
            .iter()
            .map(|l| {
                self.index
                    .get(l.as_ref())
                    .copied()
                    .ok_or_else(|| Error::UnknownLabel(l.as_ref().to_string()))
            })
            .collect()
    }
}

impl Metric for MetricSpace {
    fn len(&self) -> usize {
        self.labels.len()
    }

    fn dist(&self, i: usize, j: usize) -> Rational {
        self.dist[i * self.labels.len() + j]
    }

    fn label(&self, i: usize) -> String {
        self.labels[i].clone()
    }

    fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }
}

fn dijkstra(adjacency: &[Vec<(usize, Rational)>], source: usize) -> Vec<Option<Rational>> {
    let mut best: Vec<Option<Rational>> = vec![None; adjacency.len()];
    let mut heap = BinaryHeap::new();
    best[source] = Some(Rational::zero());
    heap.push(Reverse((Rational::zero(), source)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if best[u].is_some_and(|b| b < d) {
            continue;
        }
        for &(v, w) in &adjacency[u] {
            let candidate = d + w;
            if best[v].is_none_or(|b| candidate < b) {
                best[v] = Some(candidate);
                heap.push(Reverse((candidate, v)));
            }
        }
    }
    best
}

fn component_of(adjacency: &[Vec<(usize, Rational)>], start: usize) -> Vec<usize> {
    let mut seen = vec![false; adjacency.len()];
    let mut stack = vec![start];
    seen[start] = true;
    let mut out = Vec::new();
    while let Some(u) = stack.pop() {
        out.push(u);
        for &(v, _) in &adjacency[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    out.sort_unstable();
    out
}

/// `d(A,B)`, the minimum distance over all pairs. Both sets must be nonempty.
pub fn set_distance<M: Metric + ?Sized>(space: &M, a: &[usize], b: &[usize]) -> Result<Rational> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet("set_distance needs two nonempty sets".into()));
    }
    let mut best: Option<Rational> = None;
    for &x in a {
        for &y in b {
            let d = space.dist(x, y);
            if best.is_none_or(|b| d < b) {
                best = Some(d);
                if d.is_zero() {
                    return Ok(d);
                }
            }
        }
    }
    Ok(best.expect("nonempty"))
}

/// Largest pairwise distance within `set`; zero for singletons and the empty set.
pub fn diameter<M: Metric + ?Sized>(space: &M, set: &[usize]) -> Rational {
    let mut best = Rational::zero();
    for (k, &x) in set.iter().enumerate() {
        for &y in &set[k + 1..] {
            let d = space.dist(x, y);
            if d > best {
                best = d;
            }
        }
    }
    best
}

/// Diameter of the whole space.
pub fn space_diameter<M: Metric + ?Sized>(space: &M) -> Rational {
    let all: Vec<usize> = (0..space.len()).collect();
    diameter(space, &all)
}

/// Path graph `p0 - p1 - ... - p{n-1}` with unit edges.
pub fn path_space(n: usize) -> Result<MetricSpace> {
    let labels: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let edges: Vec<Edge> = (1..n)
        .map(|i| Edge::new(labels[i - 1].clone(), labels[i].clone(), Rational::from_integer(1)))
        .collect();
    MetricSpace::from_graph(labels, &edges)
}
