//! Splitting depth bands of a rooted tree into bounded, well separated pieces.

use coarse_covers::gen::random_tree;
use coarse_covers::rational::int;
use coarse_covers::{annulus_points, is_r_disjoint, mesh, refine_annuli, Annulus};

fn main() -> coarse_covers::Result<()> {
    let tree = random_tree(11, 200)?;
    let r = int(2);
    let annuli = [Annulus::new(int(0), int(3))?, Annulus::new(int(6), int(9))?];
    let family = refine_annuli(&tree, &annuli, r)?;

    println!("tree: {} vertices, depth {}", tree.labels().len(), tree.max_depth());
    for a in &annuli {
        println!("annulus [{}, {}): {} vertices", a.a, a.b, annulus_points(&tree, a).len());
    }
    println!("classes: {}", family.len());
    println!("mesh {} (claimed {})", mesh(&tree, family.sets()), family.mesh_bound);
    println!("{r}-disjoint: {:?}", is_r_disjoint(&tree, family.sets(), r).verdict());

    // Bands closer than R are rejected.
    let close = [Annulus::new(int(0), int(3))?, Annulus::new(int(4), int(6))?];
    println!("bands 1 apart at R = 2: {}", refine_annuli(&tree, &close, r).unwrap_err());
    Ok(())
}
