//! Cover of a finite sample of a restricted product of trees.

use coarse_covers::rational::ratio;
use coarse_covers::restricted::sample_space;
use coarse_covers::{
    is_r_disjoint, restricted_tree_cover, verify_cover_witness, RestrictedPoint, RestrictedProduct, RootedTree, TreeProductSchedule,
};

fn path_tree(n: usize) -> RootedTree {
    let labels = (0..n).map(|i| format!("v{i}")).collect();
    RootedTree::from_parents(labels, (0..n).map(|i: usize| i.saturating_sub(1)).collect()).expect("path")
}

fn main() -> coarse_covers::Result<()> {
    let trees = vec![path_tree(12), path_tree(12)];
    let product = RestrictedProduct::of_trees(&trees);
    let points: Vec<RestrictedPoint> = (0..12)
        .flat_map(|a| (0..12).map(move |b| (a, b)))
        .map(|(a, b)| product.point([(1, a), (2, b)]))
        .collect::<coarse_covers::Result<_>>()?;

    // k = m = 1: R_0 < 1 and R_2 < 1. Depth bands repeat with period 6/5.
    let schedule = TreeProductSchedule::new(vec![ratio(1, 2), ratio(3, 5), ratio(7, 10)], 1, 1, None, None)?;
    let cover = restricted_tree_cover(&trees, &schedule, &points)?;

    let sample = sample_space(&product, &points)?;
    for (j, family) in cover.witness.families.iter().enumerate() {
        let at = if j == 0 { schedule.r0() } else { schedule.big() };
        println!(
            "U_{j}: {} sets covering {} points, {at}-disjoint: {:?}",
            family.len(),
            family.union().len(),
            is_r_disjoint(&sample, family.sets(), at).verdict()
        );
    }
    println!("claimed mesh: {}", cover.witness.mesh_bound());
    println!("witness on {} points: {:?}", points.len(), verify_cover_witness(&sample, &cover.witness).verdict());
    Ok(())
}
