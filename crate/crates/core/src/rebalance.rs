//! Long-tail utilities: head/tail partition, imbalance ratio and capped,
//! seeded per-category subsampling for a more balanced fine-tuning set.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Name of the deterministic sampler; bump the suffix if the draw changes.
pub const SAMPLER_VERSION: &str = "chacha8-sha256-fisher-yates-v1";

/// Per-category image counts, optionally with the image ids themselves.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CategoryCounts {
    counts: BTreeMap<String, u64>,
    images: Option<BTreeMap<String, Vec<String>>>,
}

impl CategoryCounts {
    /// Counts only; sampling is unavailable.
    pub fn from_counts<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut counts = BTreeMap::new();
        for (id, count) in entries {
            let id = id.into();
            if id.is_empty() {
                return Err(Error::InvalidRecord("empty category_id".into()));
            }
            if counts.insert(id.clone(), count).is_some() {
                return Err(Error::DuplicateCategory(id));
            }
        }
        Ok(CategoryCounts { counts, images: None })
    }

    /// Builds counts from `(category_id, image_id)` pairs. Image ids are kept
    /// sorted so results do not depend on input order.
    pub fn from_images<I, S, T>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        let mut images: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (category, image) in pairs {
            let (category, image) = (category.into(), image.into());
            if category.is_empty() || image.is_empty() {
                return Err(Error::InvalidRecord("empty category_id or image_id".into()));
            }
            images.entry(category).or_default().push(image);
        }
        for (category, list) in images.iter_mut() {
            list.sort();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::DuplicateImageId {
                    category_id: category.clone(),
                    image_id: w[0].clone(),
                });
            }
        }
        let counts = images.iter().map(|(k, v)| (k.clone(), v.len() as u64)).collect();
        Ok(CategoryCounts {
            counts,
            images: Some(images),
        })
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn has_images(&self) -> bool {
        self.images.is_some()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn zero_count_categories(&self) -> Vec<String> {
        self.counts
            .iter()
            .filter(|(_, &c)| c == 0)
            .map(|(id, _)| id.clone())
            .collect()
    }

    /// Same data without the zero-count categories.
    pub fn without_empty(&self) -> CategoryCounts {
        CategoryCounts {
            counts: self.counts.iter().filter(|(_, &c)| c > 0).map(|(k, &v)| (k.clone(), v)).collect(),
            images: self.images.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeadTail {
    pub head: Vec<String>,
    pub tail: Vec<String>,
}

/// Splits categories into head (`count >= threshold`) and tail.
pub fn partition_head_tail(counts: &CategoryCounts, threshold: u64) -> Result<HeadTail> {
    if threshold == 0 {
        return Err(Error::InvalidParameter("threshold must be at least 1".into()));
    }
    let (head, tail): (Vec<_>, Vec<_>) = counts.counts.iter().partition(|(_, &c)| c >= threshold);
    Ok(HeadTail {
        head: head.into_iter().map(|(id, _)| id.clone()).collect(),
        tail: tail.into_iter().map(|(id, _)| id.clone()).collect(),
    })
}

/// Largest category count over smallest.
pub fn imbalance_ratio(counts: &CategoryCounts) -> Result<f64> {
    if counts.is_empty() {
        return Err(Error::EmptyInput("no categories"));
    }
    if let Some((id, _)) = counts.counts.iter().find(|(_, &c)| c == 0) {
        return Err(Error::ZeroCount(id.clone()));
    }
    let max = counts.counts.values().copied().max().unwrap();
    let min = counts.counts.values().copied().min().unwrap();
    Ok(max as f64 / min as f64)
}

/// Retained image ids per category after capping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetManifest {
    pub entries: BTreeMap<String, Vec<String>>,
    pub seed: u64,
    pub cap: u64,
}

impl SubsetManifest {
    pub fn retained_counts(&self) -> CategoryCounts {
        CategoryCounts {
            counts: self.entries.iter().map(|(k, v)| (k.clone(), v.len() as u64)).collect(),
            images: Some(self.entries.clone()),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(category_id, image_id)` rows in canonical order.
    pub fn rows(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries
            .iter()
            .flat_map(|(c, ids)| ids.iter().map(move |i| (c.as_str(), i.as_str())))
    }
}

fn category_rng(seed: u64, category_id: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(SAMPLER_VERSION.as_bytes());
    hasher.update(seed.to_le_bytes());
    hasher.update(category_id.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}

/// Uniform integer in `0..bound` by rejection, independent of any library's
/// range-sampling algorithm.
fn below(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let x = rng.next_u64();
        if x < zone {
            return x % bound;
        }
    }
}

fn sample_category(seed: u64, category_id: &str, ids: &[String], cap: u64) -> Vec<String> {
    if ids.len() as u64 <= cap {
        return ids.to_vec();
    }
    let mut rng = category_rng(seed, category_id);
    let mut pool: Vec<usize> = (0..ids.len()).collect();
    let keep = cap as usize;
    for i in 0..keep {
        let j = i + below(&mut rng, (pool.len() - i) as u64) as usize;
        pool.swap(i, j);
    }
    let mut chosen = pool[..keep].to_vec();
    chosen.sort_unstable();
    chosen.into_iter().map(|i| ids[i].clone()).collect()
}

/// Keeps `min(count, cap)` images per category, drawn without replacement
/// by a generator seeded from `(seed, category_id)`.
pub fn balanced_subset(counts: &CategoryCounts, cap: u64, seed: u64) -> Result<SubsetManifest> {
    if cap == 0 {
        return Err(Error::InvalidParameter("cap must be at least 1".into()));
    }
    let images = counts.images.as_ref().ok_or(Error::MissingImageIds)?;
    let entries = images
        .par_iter()
        .map(|(category, ids)| (category.clone(), sample_category(seed, category, ids, cap)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect();
    Ok(SubsetManifest { entries, seed, cap })
}
