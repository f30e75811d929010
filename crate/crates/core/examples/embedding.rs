//! Distortion envelopes, pulling covers back, and the appended embedding bound.

use coarse_covers::embed::{check_domination, sample_rho_minus};
use coarse_covers::metric::path_space;
use coarse_covers::rational::int;
use coarse_covers::{
    append_embedding, empirical_envelope, inequality_chain, pullback_witness, tree_asdim1_witness, verify_cover_witness,
    BlockPartition, EmbeddingSpec, FactorEmbedding, RestrictedPoint, RootedTree,
};

fn path_tree(n: usize, prefix: &str) -> RootedTree {
    let labels = (0..n).map(|i| format!("{prefix}{i}")).collect();
    RootedTree::from_parents(labels, (0..n).map(|i: usize| i.saturating_sub(1)).collect()).expect("path")
}

fn main() -> coarse_covers::Result<()> {
    // n -> 2n between integer paths.
    let x = path_space(10)?;
    let y = path_tree(19, "y");
    let image: Vec<usize> = (0..10).map(|i| 2 * i).collect();
    let env = empirical_envelope(&x, &y, &image)?;
    println!("rho_plus(3) = {}, rho_minus(3) = {}", env.rho_plus(int(3)), env.rho_minus(int(3)));

    let on_y = tree_asdim1_witness(&y, int(4))?;
    let on_x = pullback_witness(&x, &y, &image, &env, &on_y, &[int(2), int(2)])?;
    println!("pulled back: {:?}", verify_cover_witness(&x, &on_x).verdict());
    println!("asking for R = 3: {}", pullback_witness(&x, &y, &image, &env, &on_y, &[int(2), int(3)]).unwrap_err());

    // Factor 1 embeds a 4-path into one tree; factor 2 a 3-path diagonally into two trees.
    let trees = vec![path_tree(4, "a"), path_tree(3, "b"), path_tree(3, "c")];
    let blocks = BlockPartition::from_sizes(&[1, 2], 40)?;
    let factors = vec![
        FactorEmbedding {
            domain: path_space(4)?,
            base: 0,
            images: (0..4).map(|i| vec![i]).collect(),
        },
        FactorEmbedding {
            domain: path_space(3)?,
            base: 0,
            images: (0..3).map(|i| vec![i, i]).collect(),
        },
    ];
    let spec = EmbeddingSpec::new(&trees, blocks, factors)?;
    let domain = spec.domain()?;
    let x = domain.point([(1, 3), (2, 2)])?;
    let fx = append_embedding(&spec, &x)?;
    println!("F(x) = {}", spec.target().label(&fx));

    let chain = inequality_chain(&spec, &RestrictedPoint::base(), &x)?;
    for (name, value) in chain.links() {
        println!("  {name:>22}: {value}");
    }
    let sample: Vec<RestrictedPoint> = (0..4)
        .flat_map(|a| (0..3).map(move |b| (a, b)))
        .map(|(a, b)| domain.point([(1, a), (2, b)]))
        .collect::<coarse_covers::Result<_>>()?;
    let lower: Vec<String> = sample_rho_minus(&spec, &sample)?.iter().map(|(t, v)| format!("{t}->{v}")).collect();
    println!("sample lower control: {}", lower.join(" "));
    println!("domination: {:?}", check_domination(&spec, &sample)?.verdict());
    Ok(())
}
