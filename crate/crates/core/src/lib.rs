//! Dataset domain similarity by Earth Mover's Distance.
//!
//! Labeled feature datasets are reduced to [`Domain`]s of weighted category
//! centroids. The distance between two domains is the optimal transport
//! cost between their centroids under the Euclidean ground distance,
//! computed by an exact transportation solver, and similarity is
//! `exp(-gamma · distance)` with `gamma = 0.01` by default. Source
//! categories can be ranked greedily against target domains to pick
//! pre-training subsets, and long-tailed label distributions can be
//! summarised and capped for a more balanced fine-tuning set.
//!
//! ```
//! use domsim::{build_domain, domain_similarity, FeatureRecord, SimilarityConfig};
//!
//! let records = vec![
//!     FeatureRecord::new("a1", "cat", vec![0.0, 1.0]).unwrap(),
//!     FeatureRecord::new("a2", "dog", vec![4.0, 1.0]).unwrap(),
//! ];
//! let d = build_domain(&records).unwrap();
//! let sim = domain_similarity(&d, &d, &SimilarityConfig::default()).unwrap();
//! assert_eq!(sim, 1.0);
//! ```
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod cli;
pub mod domain;
pub mod emd;
pub mod error;
pub mod io;
pub mod rebalance;
pub mod selection;
pub mod similarity;

pub use domain::{build_domain, merge_domains, subset_domain, CategoryCentroid, Domain, FeatureRecord};
pub use emd::{emd_value, solve_transport, validate_plan, PlanCheck, TransportPlan, TransportProblem};
pub use error::{Error, Position, Result};
pub use rebalance::{
    balanced_subset, imbalance_ratio, partition_head_tail, CategoryCounts, HeadTail, SubsetManifest,
};
pub use selection::{
    rank_source_categories, select_top_k, select_union, RankedCategory, SelectionReport, TargetSpec,
    UnionSelection,
};
pub use similarity::{
    category_distance, cost_matrix, domain_distance, domain_similarity, singleton_similarity,
    SimilarityConfig, DEFAULT_GAMMA,
};
