//! Decomposition chains from an asdim witness and from a doubling cover.

use coarse_covers::family::{CoverWitness, MeshBound, SubsetFamily};
use coarse_covers::metric::path_space;
use coarse_covers::rational::int;
use coarse_covers::sfdc::{asdim_from_cover, RestrictingProvider};
use coarse_covers::{asdim_to_sfdc_chain, hpc_to_sfdc_chain, tree_asdim1_witness, verify_sfdc_chain, DoublingParams, RGrid, RootedTree};

fn main() -> coarse_covers::Result<()> {
    let n = 100;
    let labels = (0..n).map(|i| format!("p{i}")).collect();
    let tree = RootedTree::from_parents(labels, (0..n).map(|i: usize| i.saturating_sub(1)).collect())?;
    let all: Vec<usize> = (0..n).collect();

    let schedule = [int(2), int(5)];
    let cover = tree_asdim1_witness(&tree, schedule[1])?;
    let asdim = asdim_from_cover(&cover, cover.mesh_bound().value().expect("bounded"))?;
    let chain = asdim_to_sfdc_chain(&tree, std::slice::from_ref(&all), &asdim, &schedule)?;
    for (k, step) in chain.steps.iter().enumerate() {
        println!("step {k} at R = {}: {} sets", step.separation, step.target.len());
    }
    println!("asdim chain: {:?}, terminal mesh {}", verify_sfdc_chain(&tree, &chain).verdict(), chain.terminal_mesh);

    // Blocks of 10 with gaps of 2 are 1-disjoint; the gaps form a second family.
    let path = path_space(60)?;
    let blocks = (0..5).map(|b| (b * 12..b * 12 + 10).collect()).collect();
    let gaps = (0..5).map(|b| (b * 12 + 10..b * 12 + 12).collect()).collect();
    let witness = CoverWitness::new(vec![
        SubsetFamily::new(blocks, int(1), MeshBound::Unbounded)?,
        SubsetFamily::new(gaps, int(1), MeshBound::Unbounded)?,
    ]);
    let params = DoublingParams::new(3, int(1))?;
    let path_tree = RootedTree::from_parents((0..60).map(|i| format!("p{i}")).collect(), (0..60).map(|i: usize| i.saturating_sub(1)).collect())?;
    let provider = RestrictingProvider::tree(&path_tree);
    let chain = hpc_to_sfdc_chain(&path, &witness, Some((&params, &RGrid::Exhaustive)), &[int(3), int(4)], Some(&provider))?;
    println!(
        "hyperbolic chain: {} steps, {:?}, terminal mesh {}",
        chain.steps.len(),
        verify_sfdc_chain(&path, &chain).verdict(),
        chain.terminal_mesh
    );
    Ok(())
}
