//! Seeded random instances. The same seed always yields the same instance.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::{Edge, Metric, MetricSpace};
use crate::product::{RestrictedPoint, RestrictedProduct};
use crate::rational::int;
use crate::tree::RootedTree;

/// Largest tree or path a generator will produce.
pub const MAX_SIZE: usize = 100_000;
/// Largest restricted sample a generator will produce.
pub const MAX_POINTS: usize = 10_000;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check_size(size: usize, max: usize) -> Result<()> {
    if size == 0 {
        return Err(Error::Budget("size must be at least 1".into()));
    }
    if size > max {
        return Err(Error::Budget(format!("size {size} exceeds the limit of {max}")));
    }
    Ok(())
}

/// Random recursive tree on `size` vertices `v0..`, rooted at `v0`.
pub fn random_tree_with<R: Rng>(rng: &mut R, size: usize) -> Result<RootedTree> {
    check_size(size, MAX_SIZE)?;
    let labels = (0..size).map(|i| format!("v{i}")).collect();
    let parent = (0..size).map(|i| if i == 0 { 0 } else { rng.gen_range(0..i) }).collect();
    RootedTree::from_parents(labels, parent)
}

pub fn random_tree(seed: u64, size: usize) -> Result<RootedTree> {
    random_tree_with(&mut rng(seed), size)
}

/// Path `p0 - p1 - ...` with integer edge weights in `1..=max_weight`.
pub fn random_path(seed: u64, size: usize, max_weight: i64) -> Result<MetricSpace> {
    check_size(size, MAX_SIZE)?;
    let mut r = rng(seed);
    let labels: Vec<String> = (0..size).map(|i| format!("p{i}")).collect();
    let edges: Vec<Edge> = labels
        .windows(2)
        .map(|w| Edge::new(w[0].as_str(), w[1].as_str(), int(r.gen_range(1..=max_weight.max(1)))))
        .collect();
    MetricSpace::from_graph(labels, &edges)
}

/// `factors` random trees of `tree_size` vertices and up to `points` distinct
/// restricted points, each supported on at most `max_support` coordinates.
pub fn random_restricted_points(
    seed: u64,
    factors: usize,
    tree_size: usize,
    points: usize,
    max_support: usize,
) -> Result<(Vec<RootedTree>, Vec<RestrictedPoint>)> {
    check_size(factors, 64)?;
    check_size(points, MAX_POINTS)?;
    let mut r = rng(seed);
    let trees = (0..factors)
        .map(|_| random_tree_with(&mut r, tree_size))
        .collect::<Result<Vec<_>>>()?;
    let product = RestrictedProduct::of_trees(&trees);
    let mut out: Vec<RestrictedPoint> = Vec::with_capacity(points);
    let mut seen = std::collections::HashSet::new();
    let max_support = max_support.clamp(1, factors);
    // Bounded retries: tiny products may have fewer distinct points than requested.
    for _ in 0..points * 20 {
        if out.len() == points {
            break;
        }
        let size = r.gen_range(0..=max_support);
        let coords = sample(&mut r, factors, size);
        let entries: Vec<(usize, usize)> = coords
            .iter()
            .map(|c| (c + 1, r.gen_range(0..trees[c].len())))
            .collect();
        let p = product.point(entries)?;
        if seen.insert(p.clone()) {
            out.push(p);
        }
    }
    Ok((trees, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::TreeFile;

    #[test]
    fn deterministic() {
        let a = TreeFile::from_tree(&random_tree(7, 40).unwrap());
        let b = TreeFile::from_tree(&random_tree(7, 40).unwrap());
        assert_eq!(a, b);
        assert_eq!(random_tree(1, 1).unwrap().len(), 1);
        assert!(random_tree(1, 0).is_err());
    }

    #[test]
    fn restricted_points_are_valid() {
        let (trees, points) = random_restricted_points(3, 4, 6, 30, 2).unwrap();
        let product = RestrictedProduct::of_trees(&trees);
        for p in &points {
            product.validate(p).unwrap();
            assert!(p.support().len() <= 2);
        }
    }
}
