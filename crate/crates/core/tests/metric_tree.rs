mod common;

use coarse_covers::family::{check_mesh, normalize};
use coarse_covers::metric::path_space;
use coarse_covers::rational::{int, ratio};
use coarse_covers::tree::remove_covered;
use coarse_covers::{
    annulus_points, diameter, gromov_product, is_r_disjoint, mesh, refine_annuli, set_distance, tree_asdim1_witness,
    verify_cover_witness, Annulus, CoverWitness, Edge, Error, MeshBound, Metric, MetricSpace, RootedTree, SubsetFamily,
    ViolationKind,
};
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn abc() -> MetricSpace {
    path_space(4).unwrap()
}

#[test]
fn graph_ingestion() {
    let l = labels(3, "p");
    let edges = [Edge::new("p0", "p1", int(1)), Edge::new("p1", "p2", int(1))];
    let s = MetricSpace::from_graph(l, &edges).unwrap();
    assert_eq!(s.dist(0, 2), int(2));

    let one = MetricSpace::from_graph(vec!["a".into()], &[]).unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!(one.dist(0, 0), int(0));

    let cycle = [(0, 1), (1, 2), (2, 3), (3, 0)];
    let edges: Vec<Edge> = cycle.iter().map(|&(a, b)| Edge::new(format!("c{a}"), format!("c{b}"), int(1))).collect();
    let s = MetricSpace::from_graph(labels(4, "c"), &edges).unwrap();
    for src in 0..4 {
        let oracle = bfs(4, &cycle, src);
        for t in 0..4 {
            assert_eq!(s.dist(src, t), int(oracle[t].unwrap() as i64));
        }
    }
    assert_eq!(s.dist(0, 2), int(2));
}

#[test]
fn ingestion_errors() {
    let err = MetricSpace::from_graph(labels(3, "p"), &[Edge::new("p0", "p1", int(1))]).unwrap_err();
    match err {
        Error::Disconnected { component, .. } => assert!(!component.is_empty()),
        other => panic!("unexpected {other}"),
    }
    let err = MetricSpace::from_graph(labels(2, "p"), &[Edge::new("p0", "p1", int(0))]).unwrap_err();
    assert!(matches!(err, Error::NonpositiveWeight { .. }));
    let bad = vec![vec![int(0), int(1), int(5)], vec![int(1), int(0), int(1)], vec![int(5), int(1), int(0)]];
    assert!(matches!(MetricSpace::from_matrix(labels(3, "m"), bad), Err(Error::InvalidMetric(_))));
}

#[test]
fn graph_metric_matches_floyd_warshall() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let n = rng.gen_range(2..25);
        let (names, edges) = random_graph(&mut rng, n, n, 5);
        let space = MetricSpace::from_graph(names.clone(), &edges).unwrap();
        let idx = |l: &str| names.iter().position(|x| x == l).unwrap();
        let raw: Vec<(usize, usize, coarse_covers::Rational)> = edges.iter().map(|e| (idx(&e.u), idx(&e.v), e.weight)).collect();
        let oracle = floyd_warshall(n, &raw);
        for i in 0..n {
            for j in 0..n {
                assert_eq!(space.dist(i, j), oracle[i][j].unwrap());
            }
        }
    }
}

#[test]
fn set_distance_examples() {
    let s = abc();
    assert_eq!(set_distance(&s, &[0], &[0]).unwrap(), int(0));
    assert_eq!(set_distance(&s, &[0], &[2, 3]).unwrap(), int(2));
    assert!(matches!(set_distance(&s, &[], &[1]), Err(Error::EmptySet(_))));

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let space = random_space(&mut rng, 20);
    for _ in 0..50 {
        let a: Vec<usize> = normalize((0..rng.gen_range(1..6)).map(|_| rng.gen_range(0..20)).collect());
        let b: Vec<usize> = normalize((0..rng.gen_range(1..6)).map(|_| rng.gen_range(0..20)).collect());
        assert_eq!(set_distance(&space, &a, &b).unwrap(), min_pair(&space, &a, &b));
    }
}

#[test]
fn mesh_examples() {
    let s = path_space(3).unwrap();
    assert_eq!(mesh(&s, &[vec![0], vec![1], vec![2]]), int(0));
    assert_eq!(mesh(&s, &[vec![0, 2]]), int(2));
    assert_eq!(mesh(&s, &[]), int(0));

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let space = random_space(&mut rng, 30);
    let sets: Vec<Vec<usize>> = (0..10)
        .map(|_| normalize((0..rng.gen_range(1..8)).map(|_| rng.gen_range(0..30)).collect()))
        .collect();
    let oracle = sets.iter().map(|s| max_pair(&space, s)).max().unwrap();
    assert_eq!(mesh(&space, &sets), oracle);
}

#[test]
fn disjointness_is_strict() {
    let s = path_space(3).unwrap();
    assert!(is_r_disjoint(&s, &[vec![0, 1, 2]], int(100)).passed());
    let report = is_r_disjoint(&s, &[vec![0], vec![2]], int(2));
    assert!(!report.passed());
    let v = &report.violations()[0];
    assert_eq!(v.kind, ViolationKind::NotRDisjoint);
    assert_eq!(v.measured, Some(int(2)));
    assert!(is_r_disjoint(&s, &[vec![0], vec![2]], ratio(3, 2)).passed());
}

#[test]
fn empty_members_rejected_empty_family_allowed() {
    assert!(SubsetFamily::new(vec![vec![]], int(1), MeshBound::Bounded(int(0))).is_err());
    let s = path_space(2).unwrap();
    let empty = SubsetFamily::empty(int(1));
    assert!(is_r_disjoint(&s, empty.sets(), int(1)).passed());
    assert_eq!(mesh(&s, empty.sets()), int(0));
}

#[test]
fn cover_witness_examples() {
    let s = path_space(5).unwrap();
    let singletons: Vec<Vec<usize>> = (0..5).map(|i| vec![i]).collect();
    let w = CoverWitness::new(vec![SubsetFamily::new(singletons, ratio(1, 2), MeshBound::Bounded(int(0))).unwrap()]);
    assert!(verify_cover_witness(&s, &w).passed());

    let partial = CoverWitness::new(vec![SubsetFamily::new(vec![vec![0, 1], vec![3, 4]], int(1), MeshBound::Bounded(int(1))).unwrap()]);
    let report = verify_cover_witness(&s, &partial);
    let missing: Vec<&ViolationKind> = report.violations().iter().map(|v| &v.kind).collect();
    assert!(missing.contains(&&ViolationKind::Uncovered));
    let v = report.violations().iter().find(|v| v.kind == ViolationKind::Uncovered).unwrap();
    assert_eq!(v.points, vec!["p2".to_string()]);

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let tree = random_tree(&mut rng, 100);
    assert!(verify_cover_witness(&tree, &tree_asdim1_witness(&tree, int(3)).unwrap()).passed());
}

#[test]
fn decreasing_schedule_rejected() {
    let s = path_space(3).unwrap();
    let w = CoverWitness::new(vec![
        SubsetFamily::new(vec![vec![0, 1, 2]], int(2), MeshBound::Bounded(int(2))).unwrap(),
        SubsetFamily::empty(int(1)),
    ]);
    let report = verify_cover_witness(&s, &w);
    assert!(report.violations().iter().any(|v| v.kind == ViolationKind::Schedule));
}

#[test]
fn mesh_claim_checked() {
    let s = path_space(4).unwrap();
    assert!(!check_mesh(&s, &[vec![0, 3]], MeshBound::Bounded(int(2))).passed());
    assert!(check_mesh(&s, &[vec![0, 3]], MeshBound::Unbounded).passed());
}

#[test]
fn gromov_examples() {
    let t = path_tree(4);
    for v in 0..4 {
        assert_eq!(gromov_product(&t, v, v).unwrap(), int(t.depth(v) as i64));
    }
    assert_eq!(gromov_product(&t, 2, 3).unwrap(), int(2));

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let n = rng.gen_range(1..500);
        let tree = random_tree(&mut rng, n);
        for _ in 0..200 {
            let (x, y) = (rng.gen_range(0..tree.len()), rng.gen_range(0..tree.len()));
            assert_eq!(gromov_product(&tree, x, y).unwrap(), int(lca_depth_oracle(&tree, x, y) as i64));
            let (dx, dy) = (tree.depth(x) as i64, tree.depth(y) as i64);
            assert_eq!(tree.dist(x, y), int(dx + dy - 2 * lca_depth_oracle(&tree, x, y) as i64));
        }
    }
}

#[test]
fn tree_errors() {
    assert!(matches!(RootedTree::from_edges("r", &[("r", "a"), ("a", "r")]), Err(Error::InvalidTree(_))));
    assert!(matches!(RootedTree::from_edges("r", &[("x", "y")]), Err(Error::InvalidTree(_))));
    assert!(Annulus::new(int(2), int(2)).is_err());
}

#[test]
fn annulus_examples() {
    let t = regular_tree(2, 2, 4);
    assert_eq!(annulus_points(&t, &Annulus::new(int(0), int(1)).unwrap()), vec![0]);
    let far = Annulus::new(int(t.max_depth() as i64 + 1), int(t.max_depth() as i64 + 2)).unwrap();
    assert!(annulus_points(&t, &far).is_empty());
    let got = annulus_points(&t, &Annulus::new(int(2), int(4)).unwrap());
    let oracle: Vec<usize> = (0..t.len()).filter(|&v| (2..4).contains(&t.depth(v))).collect();
    assert_eq!(got, oracle);
    assert_eq!(got.len(), 4 + 8);
}

#[test]
fn refinement_on_star() {
    let t = star(3, 5);
    let fam = refine_annuli(&t, &[Annulus::new(int(3), int(5)).unwrap()], int(1)).unwrap();
    assert_eq!(fam.len(), 3);
    for c in fam.sets() {
        assert_eq!(c.len(), 2);
        assert_eq!(max_pair(&t, c), int(1));
        assert!(max_pair(&t, c) < int(6));
    }
    for (i, a) in fam.sets().iter().enumerate() {
        for b in &fam.sets()[i + 1..] {
            let d = min_pair(&t, a, b);
            assert!(d >= int(6) && d > int(2));
        }
    }
}

#[test]
fn refinement_degenerate_cases() {
    let t = star(2, 3);
    let fam = refine_annuli(&t, &[Annulus::new(int(0), int(1)).unwrap()], int(1)).unwrap();
    assert_eq!(fam.sets(), &[vec![0]]);
    let p = path_tree(10);
    let fam = refine_annuli(&p, &[Annulus::new(int(5), int(7)).unwrap()], int(1)).unwrap();
    assert_eq!(fam.sets(), &[vec![5, 6]]);
}

#[test]
fn asdim1_examples() {
    let single = RootedTree::from_edges::<&str>("r", &[]).unwrap();
    let w = tree_asdim1_witness(&single, int(1)).unwrap();
    assert_eq!(w.families[0].sets(), &[vec![0]]);
    assert!(w.families[1].is_empty());

    let p = path_tree(10);
    let w = tree_asdim1_witness(&p, int(2)).unwrap();
    assert_eq!(w.families[0].sets(), &[vec![0, 1], vec![4, 5], vec![8, 9]]);
    assert_eq!(w.families[1].sets(), &[vec![2, 3], vec![6, 7]]);
    assert!(verify_cover_witness(&p, &w).passed());

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let t = random_tree(&mut rng, 200);
    let w = tree_asdim1_witness(&t, int(5)).unwrap();
    assert!(verify_cover_witness(&t, &w).passed());
    assert!(mesh(&t, &w.all_sets()) <= int(20));
    assert_eq!(w.mesh_bound(), MeshBound::Bounded(int(20)));
}

#[test]
fn remove_covered_keeps_unions_disjoint() {
    let p = path_tree(12);
    let a = SubsetFamily::new(vec![vec![0, 1, 2]], int(1), MeshBound::Bounded(int(2))).unwrap();
    let b = SubsetFamily::new(vec![vec![2, 3], vec![7]], int(1), MeshBound::Bounded(int(1))).unwrap();
    let out = remove_covered(b, &a);
    assert_eq!(out.sets(), &[vec![3], vec![7]]);
    assert!(is_r_disjoint(&p, out.sets(), int(1)).passed());
}

fn arb_space() -> impl Strategy<Value = MetricSpace> {
    (2usize..16, any::<u64>()).prop_map(|(n, seed)| random_space(&mut ChaCha8Rng::seed_from_u64(seed), n))
}

fn arb_subset(n: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(0..n, 1..6).prop_map(normalize)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_axioms(space in arb_space()) {
        let n = space.len();
        for x in 0..n {
            prop_assert_eq!(space.dist(x, x), int(0));
            for y in 0..n {
                prop_assert_eq!(space.dist(x, y), space.dist(y, x));
                if x != y { prop_assert!(space.dist(x, y) > int(0)); }
                for z in 0..n {
                    prop_assert!(space.dist(x, z) <= space.dist(x, y) + space.dist(y, z));
                }
            }
        }
    }

    #[test]
    fn coarse_triangle((space, a, b, c) in arb_space().prop_flat_map(|s| {
        let n = s.len();
        (Just(s), arb_subset(n), arb_subset(n), arb_subset(n))
    })) {
        let lhs = set_distance(&space, &a, &c).unwrap();
        let rhs = set_distance(&space, &a, &b).unwrap() + diameter(&space, &b) + set_distance(&space, &b, &c).unwrap();
        prop_assert!(lhs <= rhs);
    }

    #[test]
    fn disjointness_antitone((space, sets, r) in arb_space().prop_flat_map(|s| {
        let n = s.len();
        (Just(s), proptest::collection::vec(arb_subset(n), 1..4), 1i64..6)
    })) {
        if is_r_disjoint(&space, &sets, int(r)).passed() {
            for smaller in [int(r) - ratio(1, 2), int(r - 1), ratio(1, 3)] {
                if smaller > int(0) {
                    prop_assert!(is_r_disjoint(&space, &sets, smaller).passed());
                }
            }
        }
    }

    #[test]
    fn witnesses_are_hereditary(seed in any::<u64>(), n in 2usize..60, r in 1i64..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tree = random_tree(&mut rng, n);
        let w = tree_asdim1_witness(&tree, int(r)).unwrap();
        prop_assert!(verify_cover_witness(&tree, &w).passed());
        let subset: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if subset.is_empty() { return Ok(()); }
        let sub = MetricSpace::materialize(&tree).unwrap().subspace(&subset).unwrap();
        let pos: std::collections::HashMap<usize, usize> = subset.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let restricted = CoverWitness::new(w.restrict_to(&subset).families.into_iter().map(|f| {
            let sets = f.sets().iter().map(|s| s.iter().map(|p| pos[p]).collect()).collect();
            SubsetFamily::dropping_empty(sets, f.separation, f.mesh_bound)
        }).collect());
        prop_assert!(verify_cover_witness(&sub, &restricted).passed());
    }

    #[test]
    fn refinement_never_raises_mesh(seed in any::<u64>(), n in 2usize..80, r in 1i64..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tree = random_tree(&mut rng, n);
        let coarse = vec![(0..n).collect::<Vec<_>>()];
        let fine = tree_asdim1_witness(&tree, int(r)).unwrap().all_sets();
        prop_assert!(mesh(&tree, &fine) <= mesh(&tree, &coarse));
    }

    #[test]
    fn e_relation_is_an_equivalence(seed in any::<u64>(), n in 5usize..60, a in 2i64..6, r in 1i64..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tree = random_tree(&mut rng, n);
        prop_assume!(a > r);
        let ann = Annulus::new(int(a), int(a + 3)).unwrap();
        let pts = annulus_points(&tree, &ann);
        let related = |x: usize, y: usize| gromov_product(&tree, x, y).unwrap() >= int(a - r);
        for &x in &pts {
            prop_assert!(related(x, x));
            for &y in &pts {
                prop_assert_eq!(related(x, y), related(y, x));
                for &z in &pts {
                    if related(x, y) && related(y, z) { prop_assert!(related(x, z)); }
                }
            }
        }
        let fam = refine_annuli(&tree, &[ann], int(r)).unwrap();
        for c in fam.sets() {
            for &x in c { for &y in c { prop_assert!(related(x, y)); } }
        }
    }
}
