//! Weighted graphs as metric spaces, set distances, and strict disjointness.

use coarse_covers::rational::{int, ratio};
use coarse_covers::{diameter, is_r_disjoint, set_distance, Edge, MetricSpace};

fn main() -> coarse_covers::Result<()> {
    let labels: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
    let edges = [
        Edge::new("a", "b", int(1)),
        Edge::new("b", "c", ratio(3, 2)),
        Edge::new("c", "d", int(1)),
        Edge::new("d", "a", int(4)),
    ];
    let space = MetricSpace::from_graph(labels, &edges)?;
    let ab = space.indices(&["a", "b"])?;
    let cd = space.indices(&["c", "d"])?;

    println!("d(a, d) = {}", space.row(0)[3]);
    println!("diam {{a, b}} = {}", diameter(&space, &ab));
    let gap = set_distance(&space, &ab, &cd)?;
    println!("d({{a, b}}, {{c, d}}) = {gap}");

    for r in [int(1), gap] {
        let report = is_r_disjoint(&space, &[ab.clone(), cd.clone()], r);
        println!("{r}-disjoint: {:?}", report.verdict());
    }
    Ok(())
}
