mod common;

use std::collections::BTreeMap;

use coarse_covers::embed::{check_domination, sample_rho_minus, weighted_minus};
use coarse_covers::metric::path_space;
use coarse_covers::product::restricted_metric;
use coarse_covers::rational::{int, Rational};
use coarse_covers::{
    append_embedding, empirical_envelope, inequality_chain, pullback_witness, rho_minus_min, rho_plus_bound,
    tree_asdim1_witness, verify_cover_witness, BlockPartition, CoverWitness, EmbeddingSpec, Error, FactorEmbedding,
    MeshBound, Metric, MetricSpace, RestrictedPoint, RootedTree, SubsetFamily,
};
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Raw (min, max) image distance per realized domain distance.
fn pair_scan<X: Metric, Y: Metric>(x: &X, y: &Y, image: &[usize]) -> BTreeMap<Rational, (Rational, Rational)> {
    let mut out: BTreeMap<Rational, (Rational, Rational)> = BTreeMap::new();
    for a in 0..x.len() {
        for b in a..x.len() {
            let (d, fd) = (x.dist(a, b), y.dist(image[a], image[b]));
            out.entry(d).and_modify(|e| *e = (e.0.min(fd), e.1.max(fd))).or_insert((fd, fd));
        }
    }
    out
}

#[test]
fn identity_envelope() {
    let x = path_space(8).unwrap();
    let image: Vec<usize> = (0..8).collect();
    let env = empirical_envelope(&x, &x, &image).unwrap();
    for t in 0..8 {
        assert_eq!(env.rho_minus(int(t)), int(t));
        assert_eq!(env.rho_plus(int(t)), int(t));
    }
    assert!(env.check_sandwich(&x, &x, &image).passed());
}

#[test]
fn constant_envelope_is_flagged() {
    let x = path_space(5).unwrap();
    let y = path_space(3).unwrap();
    let image = vec![1; 5];
    let env = empirical_envelope(&x, &y, &image).unwrap();
    for t in 0..5 {
        assert_eq!(env.rho_minus(int(t)), int(0));
        assert_eq!(env.rho_plus(int(t)), int(0));
    }
    assert!(!env.exceeds_at_max(int(0)));
}

#[test]
fn doubling_map_envelope_matches_pair_scan() {
    let x = path_space(12).unwrap();
    let y = path_space(23).unwrap();
    let image: Vec<usize> = (0..12).map(|i| 2 * i).collect();
    let env = empirical_envelope(&x, &y, &image).unwrap();
    for (t, (lo, hi)) in pair_scan(&x, &y, &image) {
        assert_eq!(lo, t * int(2));
        assert_eq!(hi, t * int(2));
        assert_eq!(env.rho_minus(t), t * int(2));
        assert_eq!(env.rho_plus(t), t * int(2));
    }
}

#[test]
fn empty_domain_rejected() {
    let x = MetricSpace::from_matrix(vec![], vec![]);
    if let Ok(x) = x {
        assert!(empirical_envelope(&x, &x, &[]).is_err());
    }
}

#[test]
fn pullback_identity_and_inclusion() {
    let t = path_tree(30);
    let image: Vec<usize> = (0..30).collect();
    let env = empirical_envelope(&t, &t, &image).unwrap();
    let w = tree_asdim1_witness(&t, int(3)).unwrap();
    let back = pullback_witness(&t, &t, &image, &env, &w, &[int(3), int(3)]).unwrap();
    assert_eq!(back.all_sets(), w.all_sets());
    assert!(verify_cover_witness(&t, &back).passed());

    let sub = path_space(20).unwrap();
    let image: Vec<usize> = (5..25).collect();
    let env = empirical_envelope(&sub, &t, &image).unwrap();
    let back = pullback_witness(&sub, &t, &image, &env, &w, &[int(3), int(3)]).unwrap();
    let shifted: Vec<Vec<usize>> = w
        .restrict_to(&image)
        .all_sets()
        .into_iter()
        .map(|s| s.into_iter().map(|p| p - 5).collect())
        .collect();
    assert_eq!(back.all_sets(), shifted);
    assert!(verify_cover_witness(&sub, &back).passed());
}

#[test]
fn pullback_along_doubling_map() {
    let x = path_space(20).unwrap();
    let y = path_tree(39);
    let image: Vec<usize> = (0..20).map(|i| 2 * i).collect();
    let env = empirical_envelope(&x, &y, &image).unwrap();
    for r in 1..4 {
        let w = tree_asdim1_witness(&y, int(2 * r)).unwrap();
        let back = pullback_witness(&x, &y, &image, &env, &w, &[int(r), int(r)]).unwrap();
        assert!(verify_cover_witness(&x, &back).passed());
        let err = pullback_witness(&x, &y, &image, &env, &w, &[int(r), int(r + 1)]).unwrap_err();
        assert!(matches!(err, Error::SeparationTooSmall { index: 1, .. }), "{err}");
    }
}

#[test]
fn pullback_refuses_unbounded_preimages() {
    let x = path_space(6).unwrap();
    let y = path_space(2).unwrap();
    let image = vec![0; 6];
    let env = empirical_envelope(&x, &y, &image).unwrap();
    let w = CoverWitness::new(vec![SubsetFamily::new(vec![vec![0, 1]], int(1), MeshBound::Bounded(int(1))).unwrap()]);
    let err = pullback_witness(&x, &y, &image, &env, &w, &[int(1)]).unwrap_err();
    assert!(matches!(err, Error::PreimageMesh(_)));
}

fn manual_spec(trees: &[RootedTree]) -> EmbeddingSpec<'_> {
    let factors = vec![
        FactorEmbedding {
            domain: path_space(4).unwrap(),
            base: 0,
            images: (0..4).map(|i| vec![i]).collect(),
        },
        FactorEmbedding {
            domain: path_space(3).unwrap(),
            base: 0,
            images: vec![vec![0, 0], vec![1, 2], vec![2, 1]],
        },
    ];
    EmbeddingSpec::new(trees, BlockPartition::from_sizes(&[1, 2], 64).unwrap(), factors).unwrap()
}

#[test]
fn append_examples() {
    let trees = vec![path_tree(4), path_tree(3), path_tree(3)];
    let spec = manual_spec(&trees);
    assert_eq!(append_embedding(&spec, &RestrictedPoint::base()).unwrap(), RestrictedPoint::base());

    let domain = spec.domain().unwrap();
    let x = domain.point([(1, 3), (2, 1)]).unwrap();
    let fx = append_embedding(&spec, &x).unwrap();
    // Block 1 is {1}, block 2 is {2, 3}: f_2(1) = (1, 2) lands on coordinates 2 and 3.
    let expected: BTreeMap<usize, usize> = [(1, 3), (2, 1), (3, 2)].into_iter().collect();
    assert_eq!(fx.support(), &expected);

    let only_two = domain.point([(2, 2)]).unwrap();
    let f = append_embedding(&spec, &only_two).unwrap();
    assert!(f.support().keys().all(|k| (2..=3).contains(k)));

    let outside = RestrictedPoint::base();
    let bad = spec.target().point([(1, 1)]).unwrap();
    assert_ne!(outside, bad);
    let three = coarse_covers::RestrictedProduct::new(vec![
        (&spec.factor(1).domain as &dyn Metric, 0),
        (&spec.factor(2).domain, 0),
        (&spec.factor(2).domain, 0),
    ])
    .unwrap();
    let missing = three.point([(3, 1)]).unwrap();
    assert!(append_embedding(&spec, &missing).is_err());
}

#[test]
fn single_block_locality() {
    let trees = vec![path_tree(4), path_tree(4)];
    let factors = vec![FactorEmbedding {
        domain: path_space(4).unwrap(),
        base: 0,
        images: (0..4).map(|i| vec![i, i]).collect(),
    }];
    let spec = EmbeddingSpec::new(&trees, BlockPartition::from_sizes(&[2], 16).unwrap(), factors).unwrap();
    let x = spec.domain().unwrap().point([(1, 2)]).unwrap();
    let f = append_embedding(&spec, &x).unwrap();
    assert!(f.support().keys().all(|k| *k <= 2));
}

#[test]
fn spec_validation() {
    let trees = vec![path_tree(3)];
    let not_injective = vec![FactorEmbedding {
        domain: path_space(3).unwrap(),
        base: 0,
        images: vec![vec![0], vec![1], vec![1]],
    }];
    assert!(EmbeddingSpec::new(&trees, BlockPartition::from_sizes(&[1], 8).unwrap(), not_injective).is_err());
    let wrong_base = vec![FactorEmbedding {
        domain: path_space(3).unwrap(),
        base: 0,
        images: vec![vec![1], vec![0], vec![2]],
    }];
    assert!(EmbeddingSpec::new(&trees, BlockPartition::from_sizes(&[1], 8).unwrap(), wrong_base).is_err());
    assert!(BlockPartition::new(vec![1, 1]).is_err());
    assert!(BlockPartition::new(vec![2, 3]).is_err());
}

#[test]
fn bound_examples() {
    let trees = vec![path_tree(4), path_tree(3), path_tree(3)];
    let spec = manual_spec(&trees);
    assert_eq!(rho_plus_bound(&spec, int(0)).unwrap(), int(0));
    // K(1) = 1, K(2) = 2, K(3) = 4, then singletons: M = K(t + 1).
    for t in 1..6i64 {
        let m = spec.blocks().at(t as usize + 1).unwrap();
        let expected = int(m as i64).pow(3) * spec.envelope(m).rho_plus(int(t));
        assert_eq!(rho_plus_bound(&spec, int(t)).unwrap(), expected);
    }
    let identity_k = BlockPartition::new((1..=20).collect()).unwrap();
    let one = vec![FactorEmbedding {
        domain: path_space(4).unwrap(),
        base: 0,
        images: (0..4).map(|i| vec![i]).collect(),
    }];
    let single = vec![path_tree(4)];
    let spec = EmbeddingSpec::new(&single, identity_k, one).unwrap();
    for t in 0..4i64 {
        assert_eq!(rho_plus_bound(&spec, int(t)).unwrap(), int(t + 1).pow(3) * int(t));
    }
    assert!(matches!(rho_plus_bound(&spec, int(25)), Err(Error::BlockIndex(_))));
}

#[test]
fn rho_minus_min_examples() {
    let trees = vec![path_tree(4), path_tree(3), path_tree(3)];
    let spec = manual_spec(&trees);
    let domain = spec.domain().unwrap();
    let sample: Vec<RestrictedPoint> =
        (0..4).flat_map(|a| (0..3).map(move |b| (a, b))).map(|(a, b)| domain.point([(1, a), (2, b)]).unwrap()).collect();
    let all_min = (0..sample.len())
        .flat_map(|i| (i + 1..sample.len()).map(move |j| (i, j)))
        .map(|(i, j)| weighted_minus(&spec, &domain, &sample[i], &sample[j]))
        .min()
        .unwrap();
    assert_eq!(rho_minus_min(&spec, &sample, int(0)).unwrap(), all_min);
    assert!(all_min >= int(0));
    assert!(rho_minus_min(&spec, &sample, int(1000)).is_err());

    let single: Vec<RestrictedPoint> = (0..4).map(|a| domain.point([(1, a)]).unwrap()).collect();
    for t in 1..4 {
        let expected = (1..4).filter(|d| *d >= t).map(|d| spec.envelope(1).rho_minus(int(d))).min().unwrap();
        assert_eq!(rho_minus_min(&spec, &single, int(t)).unwrap(), expected);
    }
    assert!(check_domination(&spec, &sample).unwrap().passed());
}

#[test]
fn three_factor_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let (trees, sizes, factors) = random_embedding(&mut rng, 3, 5, 2);
    let domain_sizes: Vec<usize> = factors.iter().map(|f| f.domain.len()).collect();
    let spec = EmbeddingSpec::new(&trees, BlockPartition::from_sizes(&sizes, 128).unwrap(), factors).unwrap();
    let domain = spec.domain().unwrap();
    let sample = random_domain_points(&mut rng, &domain, &domain_sizes, 25, 3);
    let d = |a: &RestrictedPoint, b: &RestrictedPoint| restricted_metric(a, b, &domain).unwrap();
    let lower = |a: &RestrictedPoint, b: &RestrictedPoint| -> Rational {
        (1..=3)
            .map(|i| {
                let ai = a.support().get(&i).copied().unwrap_or(0);
                let bi = b.support().get(&i).copied().unwrap_or(0);
                int(i as i64) * spec.envelope(i).rho_minus(spec.factor(i).domain.dist(ai, bi))
            })
            .sum()
    };
    let mut ts: Vec<Rational> = Vec::new();
    for (i, a) in sample.iter().enumerate() {
        for b in &sample[i + 1..] {
            ts.push(d(a, b));
        }
    }
    ts.sort();
    ts.dedup();
    for &t in &ts {
        let mut best: Option<Rational> = None;
        for (i, a) in sample.iter().enumerate() {
            for b in &sample[i + 1..] {
                if d(a, b) >= t {
                    let v = lower(a, b);
                    best = Some(best.map_or(v, |x: Rational| x.min(v)));
                }
            }
        }
        assert_eq!(rho_minus_min(&spec, &sample, t).unwrap(), best.unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sandwich_holds_on_random_maps(seed in any::<u64>(), nx in 1usize..20, ny in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_space(&mut rng, nx.max(2));
        let y = random_space(&mut rng, ny.max(2));
        let image: Vec<usize> = (0..x.len()).map(|_| rng.gen_range(0..y.len())).collect();
        let env = empirical_envelope(&x, &y, &image).unwrap();
        prop_assert!(env.check_sandwich(&x, &y, &image).passed());
        for w in env.minus_breakpoints().windows(2) { prop_assert!(w[0].1 <= w[1].1); }
        for w in env.plus_breakpoints().windows(2) { prop_assert!(w[0].1 <= w[1].1); }
        for &(t, _) in env.plus_breakpoints() { prop_assert!(env.rho_minus(t) <= env.rho_plus(t)); }
    }

    #[test]
    fn pullback_preserves_verification(seed in any::<u64>(), n in 2usize..30, r in 1i64..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = random_tree(&mut rng, n + 10);
        let x_points: Vec<usize> = {
            let mut v: Vec<usize> = (0..y.len()).collect();
            v.retain(|_| rng.gen_bool(0.5));
            if v.is_empty() { v.push(0); }
            v
        };
        let x = MetricSpace::materialize(&y).unwrap().subspace(&x_points).unwrap();
        let env = empirical_envelope(&x, &y, &x_points).unwrap();
        let sep = env.rho_plus(int(r));
        let w = tree_asdim1_witness(&y, sep.max(int(1))).unwrap();
        match pullback_witness(&x, &y, &x_points, &env, &w, &[int(r), int(r)]) {
            Ok(back) => prop_assert!(verify_cover_witness(&x, &back).passed()),
            Err(e) => prop_assert!(matches!(e, Error::PreimageMesh(_)), "{}", e),
        }
    }

    #[test]
    fn appended_embedding_is_injective(seed in any::<u64>(), factors in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (trees, sizes, maps) = random_embedding(&mut rng, factors, 5, 3);
        let domain_sizes: Vec<usize> = maps.iter().map(|f| f.domain.len()).collect();
        let spec = EmbeddingSpec::new(&trees, BlockPartition::from_sizes(&sizes, 256).unwrap(), maps).unwrap();
        let domain = spec.domain().unwrap();
        let sample = random_domain_points(&mut rng, &domain, &domain_sizes, 20, factors);
        let images: Vec<RestrictedPoint> = sample.iter().map(|p| append_embedding(&spec, p).unwrap()).collect();
        let limit = spec.blocks().at(factors + 1).unwrap();
        for img in &images {
            prop_assert!(img.support().keys().all(|&k| k < limit));
        }
        let distinct: std::collections::BTreeSet<&RestrictedPoint> = images.iter().collect();
        prop_assert_eq!(distinct.len(), images.len());
        for (i, a) in sample.iter().enumerate() {
            for b in &sample[i + 1..] {
                let chain = inequality_chain(&spec, a, b).unwrap();
                prop_assert!(chain.holds(), "{:?}", chain.first_failure());
            }
        }
    }

    #[test]
    fn sample_lower_control_is_monotone(seed in any::<u64>(), factors in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (trees, sizes, maps) = random_embedding(&mut rng, factors, 5, 2);
        let domain_sizes: Vec<usize> = maps.iter().map(|f| f.domain.len()).collect();
        let spec = EmbeddingSpec::new(&trees, BlockPartition::from_sizes(&sizes, 256).unwrap(), maps).unwrap();
        let domain = spec.domain().unwrap();
        let sample = random_domain_points(&mut rng, &domain, &domain_sizes, 15, factors);
        prop_assume!(sample.len() >= 2);
        let curve = sample_rho_minus(&spec, &sample).unwrap();
        for w in curve.windows(2) { prop_assert!(w[0].1 <= w[1].1); }
        let mut prev = int(0);
        for &(t, v) in &curve {
            let direct = rho_minus_min(&spec, &sample, t).unwrap();
            prop_assert_eq!(direct, v);
            prop_assert!(direct >= prev);
            prev = direct;
        }
        prop_assert!(check_domination(&spec, &sample).unwrap().passed());
    }

    #[test]
    fn far_coordinates_force_large_lower_control(seed in any::<u64>(), factors in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (trees, sizes, maps) = random_embedding(&mut rng, factors, 4, 1);
        let spec = EmbeddingSpec::new(&trees, BlockPartition::from_sizes(&sizes, 256).unwrap(), maps).unwrap();
        let domain = spec.domain().unwrap();
        let m = factors - 1;
        let i = factors;
        let a = domain.point([(i, 1)]).unwrap();
        let b = RestrictedPoint::base();
        let w = weighted_minus(&spec, &domain, &a, &b);
        prop_assert!(w >= int(i as i64) && w > int(m as i64));
        prop_assert!(spec.envelope(i).rho_minus(int(1)) >= int(1));
    }
}
