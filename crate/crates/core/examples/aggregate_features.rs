// Turn per-image features into a domain of category centroids and move
// the data through every file format.
//
// ```bash
// cargo run -p domsim --example aggregate_features
// ```

use std::error::Error;

use domsim::io::{load_centroids, load_features, save_centroids, save_features, FeatureFormat};
use domsim::{build_domain, FeatureRecord};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = StdRng::seed_from_u64(17);
    let dir = tempfile::tempdir()?;

    // 300 images over 6 categories, 8-dimensional embeddings clustered
    // around a per-category center. Values are rounded to f32 so the CSV
    // and binary encodings hold identical data.
    let centers: Vec<Vec<f64>> = (0..6)
        .map(|_| (0..8).map(|_| rng.gen_range(-3.0..3.0)).collect())
        .collect();
    let records: Vec<FeatureRecord> = (0..300)
        .map(|k| {
            let c = (k * k) % 6;
            let v = centers[c]
                .iter()
                .map(|x| (x + rng.gen_range(-0.5..0.5)) as f32 as f64)
                .collect();
            FeatureRecord::new(format!("img{k:04}"), format!("species_{c}"), v)
        })
        .collect::<Result<_, _>>()?;

    let csv = dir.path().join("features.csv");
    let bin = dir.path().join("features.bin");
    save_features(&csv, &records, FeatureFormat::Csv)?;
    save_features(&bin, &records, FeatureFormat::Binary)?;
    let from_csv = load_features(&csv, FeatureFormat::Auto)?;
    let from_bin = load_features(&bin, FeatureFormat::Auto)?;
    assert_eq!(from_csv, from_bin);
    println!(
        "{} records: {} bytes as CSV, {} bytes as binary",
        records.len(),
        std::fs::metadata(&csv)?.len(),
        std::fs::metadata(&bin)?.len()
    );

    let domain = build_domain(&from_bin)?;
    println!("{:<12} {:>6} {:>8}", "category", "count", "weight");
    for c in domain.centroids() {
        println!("{:<12} {:>6} {:>8.4}", c.category_id, c.count, c.weight);
    }

    let centroids = dir.path().join("domain.dcen");
    save_centroids(&domain, &centroids)?;
    assert_eq!(load_centroids(&centroids)?, domain);
    println!("centroid file round-trips bit-exactly");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
