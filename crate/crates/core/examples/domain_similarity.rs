// Compare target datasets against a source by EMD over category
// centroids and map the distance to a similarity.
//
// ```bash
// cargo run -p domsim --example domain_similarity
// ```

use std::error::Error;

use domsim::similarity::domain_distance_with_plan;
use domsim::{Domain, SimilarityConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn synthetic(rng: &mut StdRng, prefix: &str, categories: usize, center: f64) -> Result<Domain, domsim::Error> {
    Domain::from_parts(
        16,
        (0..categories).map(|i| {
            let mean = (0..16).map(|_| center + rng.gen_range(-10.0..10.0)).collect();
            (format!("{prefix}{i:03}"), mean, rng.gen_range(20..400))
        }),
    )
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = StdRng::seed_from_u64(3);
    let cfg = SimilarityConfig::default();
    let source = synthetic(&mut rng, "src", 120, 0.0)?;
    let targets = [
        ("close", synthetic(&mut rng, "a", 30, 2.0)?),
        ("shifted", synthetic(&mut rng, "b", 30, 25.0)?),
        ("remote", synthetic(&mut rng, "c", 30, 80.0)?),
    ];

    println!("gamma = {}", cfg.gamma());
    println!("{:<8} {:>10} {:>10} {:>7}", "target", "distance", "sim", "pivots");
    let mut previous = f64::INFINITY;
    for (name, target) in &targets {
        let (distance, plan) = domain_distance_with_plan(&source, target)?;
        let sim = cfg.similarity(distance);
        println!("{name:<8} {distance:>10.4} {sim:>10.6} {:>7}", plan.pivots);
        assert!(sim < previous);
        previous = sim;
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
