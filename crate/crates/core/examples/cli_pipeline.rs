// Drive the `domsim` command line end to end from a feature CSV to a
// selection report, in a scratch directory.
//
// ```bash
// cargo run -p domsim --example cli_pipeline
// ```

use std::error::Error;
use std::path::Path;

use domsim::cli::run_cli;
use domsim::io::{save_features, FeatureFormat};
use domsim::FeatureRecord;

fn features(path: &Path, prefix: &str, offset: f64) -> Result<(), Box<dyn Error>> {
    let records: Vec<FeatureRecord> = (0..60)
        .map(|k| {
            let c = k % 5;
            let v = vec![offset + c as f64, (k % 7) as f64 * 0.25, -(c as f64)];
            FeatureRecord::new(format!("{prefix}{k:03}"), format!("{prefix}cat{c}"), v)
        })
        .collect::<Result<_, _>>()?;
    save_features(path, &records, FeatureFormat::Csv)?;
    Ok(())
}

fn run(args: &[&str]) -> Result<String, Box<dyn Error>> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["domsim"];
    argv.extend_from_slice(args);
    let code = run_cli(argv, &mut out, &mut err);
    if code != 0 {
        return Err(format!("{args:?} exited {code}: {}", String::from_utf8_lossy(&err)).into());
    }
    Ok(String::from_utf8(out)?)
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();

    features(dir.path().join("source.csv").as_path(), "src", 0.0)?;
    features(dir.path().join("target.csv").as_path(), "tgt", 1.5)?;

    print!("{}", run(&["aggregate", "--features", &p("source.csv"), "--out", &p("source.dcen")])?);
    print!("{}", run(&["aggregate", "--features", &p("target.csv"), "--out", &p("target.dcen")])?);
    print!("{}", run(&["emd", "--source", &p("source.dcen"), "--target", &p("target.dcen"), "--flows", &p("flows.csv")])?);
    run(&["select", "--source", &p("source.dcen"), "--target", &p("target.dcen"), "--k", "2", "--out", &p("report.json")])?;
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p("report.json"))?)?;
    println!("selected {}", report["selected"]);
    print!("{}", run(&["report", "--centroids", &p("source.dcen"), "--index", &p("source.csv")])?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
