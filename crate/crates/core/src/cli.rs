//! Command-line surface. [`run_cli`] parses argv, runs one subcommand and
//! returns the process exit status: 0 on success, 1 for usage errors, 2 for
//! data errors. Every file output is written atomically.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::domain::build_domain;
use crate::error::Error;
use crate::io::{
    load_centroids, load_features, load_index, save_centroids, write_atomic, write_manifest_csv,
    FeatureFormat,
};
use crate::rebalance::{balanced_subset, imbalance_ratio, partition_head_tail};
use crate::selection::{select_top_k, select_union, TargetSpec};
use crate::similarity::{domain_distance_with_plan, domain_problem, SimilarityConfig, DEFAULT_GAMMA};

/// Flows below this are left out of flow dumps.
pub const FLOW_DUMP_EPSILON: f64 = 1e-12;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "domsim", version, about = "Domain similarity via Earth Mover's Distance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Auto,
    Csv,
    Binary,
}

impl From<FormatArg> for FeatureFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Auto => FeatureFormat::Auto,
            FormatArg::Csv => FeatureFormat::Csv,
            FormatArg::Binary => FeatureFormat::Binary,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Aggregate a feature table into a centroid file.
    Aggregate {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        format: FormatArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Domain distance and similarity between two centroid files.
    Emd {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long, default_value_t = DEFAULT_GAMMA)]
        gamma: f64,
        /// Optional CSV dump of the optimal flow.
        #[arg(long)]
        flows: Option<PathBuf>,
    },
    /// Rank source categories against one target and keep the top k.
    Select {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_GAMMA)]
        gamma: f64,
        /// Label recorded in the report; defaults to the target file stem.
        #[arg(long)]
        target_id: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Union of per-target top-k selections. `--target` and `--k` pair up in order.
    SelectMulti {
        #[arg(long)]
        source: PathBuf,
        #[arg(long = "target", required = true)]
        targets: Vec<PathBuf>,
        #[arg(long = "k", required = true)]
        ks: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_GAMMA)]
        gamma: f64,
        #[arg(long)]
        out: PathBuf,
        /// Optional JSON array with every per-target report.
        #[arg(long)]
        reports: Option<PathBuf>,
    },
    /// Cap every category at N images with a seeded draw.
    Rebalance {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        cap: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Partition categories into head (count >= threshold) and tail.
    Split {
        #[arg(long)]
        index: PathBuf,
        #[arg(long, default_value_t = 100)]
        threshold: u64,
        #[arg(long)]
        head_out: Option<PathBuf>,
        #[arg(long)]
        tail_out: Option<PathBuf>,
    },
    /// JSON summary of feature tables, centroid files and an index.
    Report {
        #[arg(long)]
        features: Vec<PathBuf>,
        #[arg(long)]
        centroids: Vec<PathBuf>,
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(msg) => Failure::Usage(msg),
            e => Failure::Data(e),
        }
    }
}

/// Runs the tool on `argv` (including the program name).
pub fn run_cli<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_DATA
        }
    }
}

fn write_json<T: Serialize>(w: &mut dyn Write, value: &T) -> crate::error::Result<()> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Error::Io(e.into()))?;
    writeln!(w)?;
    Ok(())
}

fn write_lines<'a>(path: &Path, lines: impl IntoIterator<Item = &'a str>) -> crate::error::Result<()> {
    write_atomic(path, |w| {
        for line in lines {
            writeln!(w, "{line}")?;
        }
        Ok(())
    })
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Aggregate { features, format, out } => {
            let records = load_features(&features, format.into())?;
            let domain = build_domain(&records)?;
            save_centroids(&domain, &out)?;
            writeln!(
                stdout,
                "aggregated {} records into {} categories (dim {})",
                records.len(),
                domain.len(),
                domain.dim()
            )
            .map_err(Error::from)?;
        }
        Command::Emd { source, target, gamma, flows } => {
            let cfg = SimilarityConfig::new(gamma)?;
            let s = load_centroids(&source)?;
            let t = load_centroids(&target)?;
            let (distance, plan) = domain_distance_with_plan(&s, &t)?;
            writeln!(stdout, "distance: {distance:.6}").map_err(Error::from)?;
            writeln!(stdout, "similarity: {:.6}", cfg.similarity(distance)).map_err(Error::from)?;
            if let Some(path) = flows {
                let cost = domain_problem(&s, &t)?.cost().clone();
                write_atomic(&path, |w| {
                    writeln!(w, "source_id,target_id,flow,cost")?;
                    for (i, sc) in s.centroids().iter().enumerate() {
                        for (j, tc) in t.centroids().iter().enumerate() {
                            let f = plan.flow[[i, j]];
                            if f >= FLOW_DUMP_EPSILON {
                                writeln!(
                                    w,
                                    "{},{},{:?},{:?}",
                                    csv_field(&sc.category_id),
                                    csv_field(&tc.category_id),
                                    f,
                                    cost[[i, j]]
                                )?;
                            }
                        }
                    }
                    Ok(())
                })?;
            }
        }
        Command::Select { source, target, k, gamma, target_id, out } => {
            let cfg = SimilarityConfig::new(gamma)?;
            let s = load_centroids(&source)?;
            let t = load_centroids(&target)?;
            let label = target_id.unwrap_or_else(|| stem(&target));
            if k > s.len() {
                let _ = writeln!(
                    stderr,
                    "warning: k = {k} exceeds the {} source categories; reporting the full ranking",
                    s.len()
                );
            }
            let report = select_top_k(&s, &t, &label, k, &cfg)?;
            write_atomic(&out, |w| write_json(w, &report))?;
        }
        Command::SelectMulti { source, targets, ks, gamma, out, reports } => {
            if targets.len() != ks.len() {
                return Err(Failure::Usage(format!(
                    "{} --target values but {} --k values; give one --k per --target",
                    targets.len(),
                    ks.len()
                )));
            }
            let cfg = SimilarityConfig::new(gamma)?;
            let s = load_centroids(&source)?;
            let domains = targets.iter().map(|p| load_centroids(p)).collect::<Result<Vec<_>, _>>()?;
            let labels: Vec<String> = targets.iter().map(|p| stem(p)).collect();
            for (label, &k) in labels.iter().zip(&ks) {
                if k > s.len() {
                    let _ = writeln!(stderr, "warning: k = {k} for `{label}` exceeds the {} source categories", s.len());
                }
            }
            let specs: Vec<TargetSpec<'_>> = domains
                .iter()
                .zip(&labels)
                .zip(&ks)
                .map(|((domain, id), &k)| TargetSpec { id, domain, k })
                .collect();
            let union = select_union(&s, &specs, &cfg)?;
            write_lines(&out, union.categories.iter().map(String::as_str))?;
            if let Some(path) = reports {
                write_atomic(&path, |w| write_json(w, &union.reports))?;
            }
            writeln!(stdout, "selected {} categories", union.categories.len()).map_err(Error::from)?;
        }
        Command::Rebalance { index, cap, seed, out } => {
            let counts = load_index(&index)?;
            let manifest = balanced_subset(&counts, cap, seed)?;
            write_atomic(&out, |w| write_manifest_csv(w, &manifest))?;
            writeln!(
                stdout,
                "retained {} of {} images across {} categories",
                manifest.len(),
                counts.total(),
                manifest.entries.len()
            )
            .map_err(Error::from)?;
        }
        Command::Split { index, threshold, head_out, tail_out } => {
            let counts = load_index(&index)?;
            let split = partition_head_tail(&counts, threshold)?;
            for id in &split.head {
                writeln!(stdout, "head\t{id}").map_err(Error::from)?;
            }
            for id in &split.tail {
                writeln!(stdout, "tail\t{id}").map_err(Error::from)?;
            }
            if let Some(p) = head_out {
                write_lines(&p, split.head.iter().map(String::as_str))?;
            }
            if let Some(p) = tail_out {
                write_lines(&p, split.tail.iter().map(String::as_str))?;
            }
        }
        Command::Report { features, centroids, index, out } => {
            if features.is_empty() && centroids.is_empty() && index.is_none() {
                return Err(Failure::Usage(
                    "report needs at least one of --features, --centroids, --index".into(),
                ));
            }
            let report = build_report(&features, &centroids, index.as_deref())?;
            match out {
                Some(p) => write_atomic(&p, |w| write_json(w, &report))?,
                None => write_json(stdout, &report)?,
            }
        }
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Summary printed by `report`. Key set is fixed; absent inputs serialize
/// as empty arrays or `null`.
#[derive(Debug, Serialize)]
pub struct Report {
    pub features: Vec<FeatureSummary>,
    pub centroids: Vec<DomainSummary>,
    pub index: Option<IndexSummary>,
}

#[derive(Debug, Serialize)]
pub struct FeatureSummary {
    pub path: String,
    pub records: usize,
    pub categories: usize,
    pub dim: usize,
    pub imbalance_ratio: f64,
}

#[derive(Debug, Serialize)]
pub struct DomainSummary {
    pub path: String,
    pub categories: usize,
    pub dim: usize,
    pub total_count: u64,
    pub dropped_zero_weight: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct IndexSummary {
    pub path: String,
    pub categories: usize,
    pub images: u64,
    pub has_image_ids: bool,
    /// Over non-empty categories; `null` when none remain.
    pub imbalance_ratio: Option<f64>,
    pub dropped_zero_weight: Vec<String>,
}

fn build_report(
    features: &[PathBuf],
    centroids: &[PathBuf],
    index: Option<&Path>,
) -> crate::error::Result<Report> {
    let features = features
        .iter()
        .map(|p| {
            let records = load_features(p, FeatureFormat::Auto)?;
            let domain = build_domain(&records)?;
            let counts = crate::rebalance::CategoryCounts::from_counts(
                domain.centroids().iter().map(|c| (c.category_id.clone(), c.count)),
            )?;
            Ok(FeatureSummary {
                path: p.display().to_string(),
                records: records.len(),
                categories: domain.len(),
                dim: domain.dim(),
                imbalance_ratio: imbalance_ratio(&counts)?,
            })
        })
        .collect::<crate::error::Result<Vec<_>>>()?;
    let centroids = centroids
        .iter()
        .map(|p| {
            let d = load_centroids(p)?;
            Ok(DomainSummary {
                path: p.display().to_string(),
                categories: d.len(),
                dim: d.dim(),
                total_count: d.total_count(),
                dropped_zero_weight: d.dropped_categories().to_vec(),
            })
        })
        .collect::<crate::error::Result<Vec<_>>>()?;
    let index = index
        .map(|p| {
            let counts = load_index(p)?;
            let nonempty = counts.without_empty();
            Ok::<_, Error>(IndexSummary {
                path: p.display().to_string(),
                categories: counts.len(),
                images: counts.total(),
                has_image_ids: counts.has_images(),
                imbalance_ratio: imbalance_ratio(&nonempty).ok(),
                dropped_zero_weight: counts.zero_count_categories(),
            })
        })
        .transpose()?;
    Ok(Report {
        features,
        centroids,
        index,
    })
}
