//! Two-family cover of a tree at any separation, checked by the verifier.

use coarse_covers::gen::random_tree;
use coarse_covers::rational::int;
use coarse_covers::{tree_asdim1_witness, verify_cover_witness};

fn main() -> coarse_covers::Result<()> {
    let tree = random_tree(3, 500)?;
    for r in [1, 3, 8] {
        let witness = tree_asdim1_witness(&tree, int(r))?;
        let sizes: Vec<usize> = witness.families.iter().map(|f| f.len()).collect();
        let report = verify_cover_witness(&tree, &witness);
        println!("R = {r}: family sizes {sizes:?}, mesh {}, {:?}", witness.mesh_bound(), report.verdict());
    }
    Ok(())
}
