//! Feature records and weight-normalized category-centroid domains.
//!
//! A [`Domain`] abstracts a labeled dataset as one centroid per category:
//! the mean feature vector of the category's images and the category's
//! share of the domain's images. Centroids are kept sorted by category id
//! so every downstream result (cost matrices, plans, rankings) is
//! deterministic.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// One image: identifier, category label and feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub image_id: String,
    pub category_id: String,
    pub vector: Vec<f64>,
}

impl FeatureRecord {
    pub fn new(
        image_id: impl Into<String>,
        category_id: impl Into<String>,
        vector: Vec<f64>,
    ) -> Result<Self> {
        let record = FeatureRecord {
            image_id: image_id.into(),
            category_id: category_id.into(),
            vector,
        };
        record.validate()?;
        Ok(record)
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.image_id.is_empty() {
            return Err(Error::InvalidRecord("empty image_id".into()));
        }
        if self.category_id.is_empty() {
            return Err(Error::InvalidRecord(format!(
                "empty category_id for image `{}`",
                self.image_id
            )));
        }
        if self.vector.is_empty() {
            return Err(Error::InvalidRecord(format!(
                "empty feature vector for image `{}`",
                self.image_id
            )));
        }
        if let Some(k) = self.vector.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                context: format!("image `{}` component {k}", self.image_id),
            });
        }
        Ok(())
    }
}

/// A category's mean feature, image count and normalized weight.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryCentroid {
    pub category_id: String,
    pub mean: Vec<f64>,
    pub count: u64,
    pub weight: f64,
}

impl CategoryCentroid {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Ordered, weight-normalized collection of category centroids.
///
/// Immutable once built. Weights are `count / total_count`, so they sum to
/// one up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    centroids: Vec<CategoryCentroid>,
    dim: usize,
    total_count: u64,
    dropped: Vec<String>,
}

impl Domain {
    /// Assembles a domain from `(category_id, mean, count)` triples.
    ///
    /// Zero-count categories are excluded and remembered in
    /// [`Domain::dropped_categories`]. The remaining centroids are sorted by
    /// category id and their weights renormalized.
    pub fn from_parts<I>(dim: usize, parts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Vec<f64>, u64)>,
    {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimensionality must be positive".into()));
        }
        let mut kept = Vec::new();
        let mut dropped = Vec::new();
        for (category_id, mean, count) in parts {
            if category_id.is_empty() {
                return Err(Error::InvalidRecord("empty category_id".into()));
            }
            if mean.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: mean.len(),
                });
            }
            if mean.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue {
                    context: format!("mean of category `{category_id}`"),
                });
            }
            if count == 0 {
                dropped.push(category_id);
            } else {
                kept.push((category_id, mean, count));
            }
        }
        dropped.sort();
        Self::assemble(dim, kept, dropped)
    }

    fn assemble(dim: usize, mut kept: Vec<(String, Vec<f64>, u64)>, dropped: Vec<String>) -> Result<Self> {
        if kept.is_empty() {
            return Err(Error::EmptyInput("domain has no non-empty categories"));
        }
        kept.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = kept.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateCategory(w[0].0.clone()));
        }
        let total_count: u64 = kept.iter().map(|k| k.2).sum();
        let total = total_count as f64;
        let centroids = kept
            .into_iter()
            .map(|(category_id, mean, count)| CategoryCentroid {
                category_id,
                mean,
                count,
                weight: count as f64 / total,
            })
            .collect();
        Ok(Domain {
            centroids,
            dim,
            total_count,
            dropped,
        })
    }

    pub fn centroids(&self) -> &[CategoryCentroid] {
        &self.centroids
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.centroids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centroids.is_empty()
    }

    pub fn total_count(&self) -> u64 {
        self.total_count
    }

    /// Categories excluded at construction because they had no images.
    pub fn dropped_categories(&self) -> &[String] {
        &self.dropped
    }

    pub fn weights(&self) -> Vec<f64> {
        self.centroids.iter().map(|c| c.weight).collect()
    }

    pub fn category_ids(&self) -> impl Iterator<Item = &str> {
        self.centroids.iter().map(|c| c.category_id.as_str())
    }

    pub fn get(&self, category_id: &str) -> Option<&CategoryCentroid> {
        self.centroids
            .binary_search_by(|c| c.category_id.as_str().cmp(category_id))
            .ok()
            .map(|i| &self.centroids[i])
    }

    fn parts(&self) -> impl Iterator<Item = (String, Vec<f64>, u64)> + '_ {
        self.centroids
            .iter()
            .map(|c| (c.category_id.clone(), c.mean.clone(), c.count))
    }
}

/// Aggregates labeled feature records into a domain of category centroids.
///
/// Members of each category are summed in a canonical order (image id, then
/// the bit patterns of the vector) so the result does not depend on record
/// order.
pub fn build_domain(records: &[FeatureRecord]) -> Result<Domain> {
    let first = records.first().ok_or(Error::EmptyInput("no feature records"))?;
    let dim = first.dim();
    for r in records {
        r.validate()?;
        if r.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: r.dim(),
            });
        }
    }

    let mut order: Vec<&FeatureRecord> = records.iter().collect();
    order.sort_by(|a, b| {
        a.category_id
            .cmp(&b.category_id)
            .then_with(|| a.image_id.cmp(&b.image_id))
            .then_with(|| {
                let ab = a.vector.iter().map(|v| v.to_bits());
                let bb = b.vector.iter().map(|v| v.to_bits());
                ab.cmp(bb)
            })
    });

    let mut parts: Vec<(String, Vec<f64>, u64)> = Vec::new();
    for group in order.chunk_by(|a, b| a.category_id == b.category_id) {
        let mut sum = vec![0.0f64; dim];
        for r in group {
            for (s, v) in sum.iter_mut().zip(&r.vector) {
                *s += v;
            }
        }
        let n = group.len() as f64;
        sum.iter_mut().for_each(|s| *s /= n);
        parts.push((group[0].category_id.clone(), sum, group.len() as u64));
    }
    Domain::assemble(dim, parts, Vec::new())
}

/// Pools two domains over disjoint label spaces; weights are renormalized
/// over the combined image count.
pub fn merge_domains(a: &Domain, b: &Domain) -> Result<Domain> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    if let Some(dup) = a.category_ids().find(|id| b.get(id).is_some()) {
        return Err(Error::DuplicateCategory(dup.to_string()));
    }
    let mut dropped: Vec<String> = a.dropped.iter().chain(&b.dropped).cloned().collect();
    dropped.sort();
    Domain::assemble(a.dim, a.parts().chain(b.parts()).collect(), dropped)
}

/// Restricts a domain to the given categories, renormalizing weights.
pub fn subset_domain<S: AsRef<str>>(d: &Domain, ids: &[S]) -> Result<Domain> {
    if ids.is_empty() {
        return Err(Error::EmptyInput("no category ids to keep"));
    }
    let mut keep = BTreeSet::new();
    for id in ids {
        let id = id.as_ref();
        if d.get(id).is_none() {
            return Err(Error::UnknownCategory(id.to_string()));
        }
        keep.insert(id);
    }
    let parts = d
        .centroids
        .iter()
        .filter(|c| keep.contains(c.category_id.as_str()))
        .map(|c| (c.category_id.clone(), c.mean.clone(), c.count))
        .collect();
    Domain::assemble(d.dim, parts, d.dropped.clone())
}

/// Image counts per category, as seen by [`build_domain`].
pub fn category_counts(records: &[FeatureRecord]) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for r in records {
        *counts.entry(r.category_id.clone()).or_insert(0) += 1;
    }
    counts
}
