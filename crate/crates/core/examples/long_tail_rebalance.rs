// Summarise a long-tailed label distribution and cap it into a more
// balanced subset for a second fine-tuning stage.
//
// ```bash
// cargo run -p domsim --example long_tail_rebalance
// ```

use std::error::Error;

use domsim::{balanced_subset, imbalance_ratio, partition_head_tail, CategoryCounts};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // Zipf-shaped counts: a handful of categories with thousands of images
    // and a long tail with a few each.
    let pairs: Vec<(String, String)> = (0..400)
        .flat_map(|c| {
            let n = ((3000.0 / (1.0 + c as f64).powf(1.05)) as usize).max(7);
            (0..n).map(move |i| (format!("taxon{c:03}"), format!("taxon{c:03}/img{i:05}")))
        })
        .collect();
    let counts = CategoryCounts::from_images(pairs)?;
    let split = partition_head_tail(&counts, 100)?;
    println!(
        "{} images in {} categories; head (>= 100 images): {}, tail: {}",
        counts.total(),
        counts.len(),
        split.head.len(),
        split.tail.len()
    );
    println!("imbalance ratio {:.1}", imbalance_ratio(&counts)?);

    for cap in [400, 100, 30] {
        let manifest = balanced_subset(&counts, cap, 2017)?;
        let retained = manifest.retained_counts();
        println!(
            "cap {cap:>4}: keep {:>6} images, imbalance ratio {:>6.1}",
            manifest.len(),
            imbalance_ratio(&retained)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
