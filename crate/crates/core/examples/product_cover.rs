//! Combining covers of two factors into a cover of their sup-metric product.

use coarse_covers::gen::{random_path, random_tree};
use coarse_covers::product::{BoundedProvider, TreeProvider};
use coarse_covers::rational::int;
use coarse_covers::{combine_product_covers, verify_cover_witness, ExtendedSchedule, Metric, Reindex, SupProduct};

fn main() -> coarse_covers::Result<()> {
    let x = random_path(1, 12, 2)?;
    let y = random_tree(2, 15)?;
    let schedule = ExtendedSchedule::new([1, 2, 2, 3, 5, 8].map(int).to_vec())?;
    let combined = combine_product_covers(&x, &y, &schedule, &Reindex::Cantor, &BoundedProvider(&x), &TreeProvider(&y))?;

    let xs: Vec<String> = combined.x_schedule.iter().map(|r| r.to_string()).collect();
    println!("schedule handed to the first factor: [{}]", xs.join(", "));
    for p in &combined.placements {
        println!("W({}, {}) placed at position {}", p.m, p.n, p.position);
    }
    let product = SupProduct::new(vec![&x, &y])?;
    let report = verify_cover_witness(&product, &combined.witness);
    println!("{} product points, {} families: {:?}", product.len(), combined.witness.families.len(), report.verdict());
    Ok(())
}
