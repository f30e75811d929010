//! Exact large-scale doubling checks, per member and for finite unions.

use coarse_covers::gen::random_tree;
use coarse_covers::metric::path_space;
use coarse_covers::rational::int;
use coarse_covers::{is_lsd_subset, is_uniformly_lsd, DoublingParams, RGrid};

fn main() -> coarse_covers::Result<()> {
    let path = path_space(40)?;
    let all: Vec<usize> = (0..40).collect();
    for n in [1, 2, 3] {
        let params = DoublingParams::new(n, int(1))?;
        let report = is_lsd_subset(&path, &all, &params, &RGrid::Exhaustive)?;
        println!("path, N = {n}: {:?}", report.verdict());
    }

    let tree = random_tree(4, 60)?;
    let params = DoublingParams::new(3, int(2))?;
    let halves = vec![(0..30).collect::<Vec<_>>(), (30..60).collect()];
    let lsd = is_uniformly_lsd(&tree, &halves, &params, 2, &RGrid::Geometric)?;
    println!("tree halves: {:?}", lsd.report.verdict());
    for u in &lsd.unions {
        match u.scale {
            Some(s) => println!("  union {:?}: doubling from R' = {s}", u.members),
            None => println!("  union {:?}: no doubling scale found", u.members),
        }
    }
    Ok(())
}
