#![allow(dead_code)]

use std::collections::VecDeque;

use coarse_covers::rational::{int, Rational};
use coarse_covers::{Edge, Metric, MetricSpace, RootedTree};
use rand::Rng;

pub fn labels(n: usize, prefix: &str) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn path_tree(n: usize) -> RootedTree {
    RootedTree::from_parents(labels(n, "v"), (0..n).map(|i: usize| i.saturating_sub(1)).collect()).unwrap()
}

/// Root `c` with `legs` paths of `len` vertices each.
pub fn star(legs: usize, len: usize) -> RootedTree {
    let mut parent = vec![0];
    for _ in 0..legs {
        let start = parent.len();
        for j in 0..len {
            parent.push(if j == 0 { 0 } else { start + j - 1 });
        }
    }
    RootedTree::from_parents(labels(parent.len(), "s"), parent).unwrap()
}

/// Root with `root_children` children, every other internal vertex with `children`, down to `depth`.
pub fn regular_tree(root_children: usize, children: usize, depth: usize) -> RootedTree {
    let mut parent = vec![0usize];
    let mut frontier = vec![0usize];
    for d in 0..depth {
        let mut next = Vec::new();
        for &v in &frontier {
            let count = if d == 0 { root_children } else { children };
            for _ in 0..count {
                parent.push(v);
                next.push(parent.len() - 1);
            }
        }
        frontier = next;
    }
    RootedTree::from_parents(labels(parent.len(), "t"), parent).unwrap()
}

pub fn random_tree<R: Rng>(rng: &mut R, n: usize) -> RootedTree {
    coarse_covers::gen::random_tree_with(rng, n).unwrap()
}

/// Tree whose vertices mostly extend the previous one, so depth grows roughly linearly.
pub fn deep_random_tree<R: Rng>(rng: &mut R, n: usize) -> RootedTree {
    let parent = (0..n)
        .map(|i| match i {
            0 => 0,
            _ if rng.gen_bool(0.7) => i - 1,
            _ => rng.gen_range(0..i),
        })
        .collect();
    RootedTree::from_parents(labels(n, "d"), parent).unwrap()
}

/// Connected random graph with integer weights in `1..=max_w`.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, extra: usize, max_w: i64) -> (Vec<String>, Vec<Edge>) {
    let names = labels(n, "x");
    let mut edges = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.push(Edge::new(names[i].as_str(), names[j].as_str(), int(rng.gen_range(1..=max_w))));
    }
    for _ in 0..extra {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            edges.push(Edge::new(names[a].as_str(), names[b].as_str(), int(rng.gen_range(1..=max_w))));
        }
    }
    (names, edges)
}

pub fn random_space<R: Rng>(rng: &mut R, n: usize) -> MetricSpace {
    let (names, edges) = random_graph(rng, n, n / 2, 4);
    MetricSpace::from_graph(names, &edges).unwrap()
}

/// All-pairs shortest paths by Floyd-Warshall, independent of the library.
pub fn floyd_warshall(n: usize, edges: &[(usize, usize, Rational)]) -> Vec<Vec<Option<Rational>>> {
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(int(0));
    }
    for &(a, b, w) in edges {
        for (x, y) in [(a, b), (b, a)] {
            if d[x][y].is_none_or(|v| w < v) {
                d[x][y] = Some(w);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|v| a + b < v) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

/// Unweighted BFS distances from `source`.
pub fn bfs(n: usize, adj: &[(usize, usize)], source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; n];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for &(a, b) in adj {
            for (x, y) in [(a, b), (b, a)] {
                if x == u && dist[y].is_none() {
                    dist[y] = Some(dist[u].unwrap() + 1);
                    queue.push_back(y);
                }
            }
        }
    }
    dist
}

/// Ancestors of `v` including itself.
pub fn ancestors(tree: &RootedTree, mut v: usize) -> Vec<usize> {
    let mut out = vec![v];
    while v != tree.root() {
        v = tree.parent(v);
        out.push(v);
    }
    out
}

/// LCA depth by intersecting ancestor sets.
pub fn lca_depth_oracle(tree: &RootedTree, x: usize, y: usize) -> usize {
    let ax = ancestors(tree, x);
    let ay: std::collections::HashSet<usize> = ancestors(tree, y).into_iter().collect();
    ax.into_iter().filter(|a| ay.contains(a)).map(|a| tree.depth(a)).max().unwrap()
}

pub fn min_pair<M: Metric>(space: &M, a: &[usize], b: &[usize]) -> Rational {
    a.iter().flat_map(|&x| b.iter().map(move |&y| space.dist(x, y))).min().unwrap()
}

pub fn max_pair<M: Metric>(space: &M, a: &[usize]) -> Rational {
    a.iter().flat_map(|&x| a.iter().map(move |&y| space.dist(x, y))).max().unwrap_or(int(0))
}

/// Exhaustive ball-cover decision: some set of at most `balls` centers in the
/// space covers `targets` with open balls of `radius`.
pub fn brute_ball_cover<M: Metric>(space: &M, targets: &[usize], radius: Rational, balls: usize) -> bool {
    if targets.is_empty() {
        return true;
    }
    let n = space.len();
    let mut centers = Vec::new();
    fn rec<M: Metric>(space: &M, targets: &[usize], r: Rational, left: usize, start: usize, centers: &mut Vec<usize>, n: usize) -> bool {
        if targets.iter().all(|&t| centers.iter().any(|&c| space.dist(c, t) < r)) {
            return true;
        }
        if left == 0 {
            return false;
        }
        for c in start..n {
            centers.push(c);
            if rec(space, targets, r, left - 1, c + 1, centers, n) {
                return true;
            }
            centers.pop();
        }
        false
    }
    rec(space, targets, radius, balls, 0, &mut centers, n)
}

/// Oracle for (N, r)-doubling of `set` at every radius in `radii`.
pub fn brute_lsd<M: Metric>(space: &M, set: &[usize], balls: usize, radii: &[Rational]) -> bool {
    radii.iter().all(|&r| {
        (0..space.len()).all(|x| {
            let inside: Vec<usize> = set.iter().copied().filter(|&u| space.dist(x, u) < r * int(2)).collect();
            brute_ball_cover(space, &inside, r, balls)
        })
    })
}

/// Strictly increasing schedule `R_0..R_{k2^k}` with `R_0 < k` and `R_{k2^k} < m`,
/// chosen with small odd denominators so the band arithmetic hits integer depths.
pub fn restricted_radii<R: Rng>(rng: &mut R, k: usize, m: usize) -> Vec<Rational> {
    let big = k << k;
    let q = [3i64, 5, 7][rng.gen_range(0..3)];
    let top = (k.min(m) as i64) * q;
    let r0 = coarse_covers::rational::ratio(rng.gen_range(1..top.max(2)), q).min(coarse_covers::rational::ratio(top - 1, q));
    let span = int(m as i64) - r0;
    (0..=big).map(|i| r0 + span * coarse_covers::rational::ratio(i as i64, big as i64 + 1)).collect()
}

/// Random injective factor maps: factor `i` is a random tree embedded as the
/// first coordinate of its block, with random values on the other block trees.
pub fn random_embedding<R: Rng>(
    rng: &mut R,
    factors: usize,
    max_tree: usize,
    max_block: usize,
) -> (Vec<RootedTree>, Vec<usize>, Vec<coarse_covers::FactorEmbedding>) {
    let mut trees = Vec::new();
    let mut sizes = Vec::new();
    let mut maps = Vec::new();
    for _ in 0..factors {
        let width = rng.gen_range(1..=max_block);
        let block: Vec<RootedTree> = (0..width)
            .map(|_| {
                let n = rng.gen_range(2..=max_tree);
                random_tree(rng, n)
            })
            .collect();
        let images = (0..block[0].len())
            .map(|v| {
                std::iter::once(v)
                    .chain(block[1..].iter().map(|t| if v == 0 { 0 } else { rng.gen_range(0..t.len()) }))
                    .collect()
            })
            .collect();
        maps.push(coarse_covers::FactorEmbedding {
            domain: MetricSpace::materialize(&block[0]).unwrap(),
            base: 0,
            images,
        });
        sizes.push(width);
        trees.extend(block);
    }
    (trees, sizes, maps)
}

/// Distinct random points of the domain product, each supported on at most `support` coordinates.
pub fn random_domain_points<R: Rng>(
    rng: &mut R,
    domain: &coarse_covers::RestrictedProduct<'_>,
    sizes: &[usize],
    count: usize,
    support: usize,
) -> Vec<coarse_covers::RestrictedPoint> {
    let mut out = std::collections::BTreeSet::new();
    for _ in 0..count * 10 {
        if out.len() == count {
            break;
        }
        let entries: std::collections::BTreeMap<usize, usize> = (0..rng.gen_range(0..=support))
            .map(|_| {
                let c = rng.gen_range(0..sizes.len());
                (c + 1, rng.gen_range(0..sizes[c]))
            })
            .collect();
        out.insert(domain.point(entries).unwrap());
    }
    out.into_iter().collect()
}
