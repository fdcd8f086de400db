//! Greedy source-category selection.
//!
//! Every source category is scored by the similarity of the weight-one
//! domain `{(s, 1)}` to the target, and the `k` best are kept. Ordering is
//! similarity descending, then distance ascending, then category id
//! ascending, so equal scores always resolve the same way.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::similarity::{singleton_distance, SimilarityConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCategory {
    pub category_id: String,
    pub similarity: f64,
    pub distance: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub target_id: String,
    pub k: usize,
    pub gamma: f64,
    pub selected: Vec<String>,
    pub ranked: Vec<RankedCategory>,
}

fn ranking_order(a: &RankedCategory, b: &RankedCategory) -> Ordering {
    b.similarity
        .total_cmp(&a.similarity)
        .then_with(|| a.distance.total_cmp(&b.distance))
        .then_with(|| a.category_id.cmp(&b.category_id))
}

/// Scores and orders every source category against `target`.
pub fn rank_source_categories(
    source: &Domain,
    target: &Domain,
    cfg: &SimilarityConfig,
) -> Result<Vec<RankedCategory>> {
    if source.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: source.dim(),
            found: target.dim(),
        });
    }
    let mut ranked = source
        .centroids()
        .par_iter()
        .map(|c| {
            let distance = singleton_distance(c, target)?;
            Ok(RankedCategory {
                category_id: c.category_id.clone(),
                similarity: cfg.similarity(distance),
                distance,
                count: c.count,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(ranking_order);
    Ok(ranked)
}

/// Keeps the `k` most similar source categories. `k` larger than the
/// source truncates to the whole ranking.
pub fn select_top_k(
    source: &Domain,
    target: &Domain,
    target_id: &str,
    k: usize,
    cfg: &SimilarityConfig,
) -> Result<SelectionReport> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let ranked = rank_source_categories(source, target, cfg)?;
    let selected = ranked.iter().take(k).map(|r| r.category_id.clone()).collect();
    Ok(SelectionReport {
        target_id: target_id.to_string(),
        k,
        gamma: cfg.gamma(),
        selected,
        ranked,
    })
}

/// One target of a multi-target selection.
#[derive(Debug, Clone, Copy)]
pub struct TargetSpec<'a> {
    pub id: &'a str,
    pub domain: &'a Domain,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnionSelection {
    /// Deduplicated union of every target's selection, sorted by id.
    pub categories: Vec<String>,
    pub reports: Vec<SelectionReport>,
}

/// Selects top-k categories per target and returns their deduplicated union.
pub fn select_union(
    source: &Domain,
    targets: &[TargetSpec<'_>],
    cfg: &SimilarityConfig,
) -> Result<UnionSelection> {
    if targets.is_empty() {
        return Err(Error::EmptyInput("no targets given"));
    }
    let reports = targets
        .par_iter()
        .map(|t| select_top_k(source, t.domain, t.id, t.k, cfg))
        .collect::<Result<Vec<_>>>()?;
    let categories: BTreeSet<&str> = reports
        .iter()
        .flat_map(|r| r.selected.iter().map(String::as_str))
        .collect();
    Ok(UnionSelection {
        categories: categories.into_iter().map(str::to_string).collect(),
        reports,
    })
}
