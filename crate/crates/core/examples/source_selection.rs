// Greedy source-category selection against several targets.
//
// A combined source is formed from two disjoint label spaces. One subset
// takes the top 200 categories for each of seven targets and removes
// duplicates; another uses a different `k` per target.
//
// ```bash
// cargo run -p domsim --example source_selection
// ```

use std::error::Error;

use domsim::{merge_domains, select_union, subset_domain, Domain, SimilarityConfig, TargetSpec};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn clustered(rng: &mut StdRng, prefix: &str, categories: usize, centers: &[Vec<f64>]) -> Result<Domain, domsim::Error> {
    let dim = centers[0].len();
    Domain::from_parts(
        dim,
        (0..categories).map(|i| {
            let c = &centers[i % centers.len()];
            let mean = c.iter().map(|x| x + rng.gen_range(-4.0..4.0)).collect();
            (format!("{prefix}{i:04}"), mean, rng.gen_range(5..1300))
        }),
    )
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = StdRng::seed_from_u64(2017);
    let dim = 12;
    let centers: Vec<Vec<f64>> = (0..20)
        .map(|_| (0..dim).map(|_| rng.gen_range(-30.0..30.0)).collect())
        .collect();

    let objects = clustered(&mut rng, "objects/", 1000, &centers[..10])?;
    let species = clustered(&mut rng, "species/", 5089, &centers[8..])?;
    let source = merge_domains(&objects, &species)?;
    println!("combined source: {} categories", source.len());

    let names = ["birds", "flowers", "cars", "aircraft", "food", "dogs", "nabirds"];
    let targets: Vec<Domain> = names
        .iter()
        .enumerate()
        .map(|(t, name)| clustered(&mut rng, &format!("{name}/"), 100 + 20 * t, &centers[2 * t..2 * t + 3]))
        .collect::<Result<_, _>>()?;

    let cfg = SimilarityConfig::default();
    let uniform: Vec<TargetSpec<'_>> = names
        .iter()
        .zip(&targets)
        .map(|(id, domain)| TargetSpec { id, domain, k: 200 })
        .collect();
    let a = select_union(&source, &uniform, &cfg)?;
    println!("top-200 per target, deduplicated: {} categories", a.categories.len());
    for r in &a.reports {
        let best = &r.ranked[0];
        println!("  {:<9} best {:<16} sim {:.6}", r.target_id, best.category_id, best.similarity);
    }

    let ks = [400, 100, 50, 50, 100, 100, 400];
    let tailored: Vec<TargetSpec<'_>> = names
        .iter()
        .zip(&targets)
        .zip(ks)
        .map(|((id, domain), k)| TargetSpec { id, domain, k })
        .collect();
    let b = select_union(&source, &tailored, &cfg)?;
    println!("per-target k {ks:?}: {} categories", b.categories.len());

    let pretrain = subset_domain(&source, &b.categories)?;
    println!(
        "pre-training domain: {} categories, {} images",
        pretrain.len(),
        pretrain.total_count()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
