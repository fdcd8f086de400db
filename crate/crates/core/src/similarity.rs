//! Centroid distances, domain EMD and the exponential similarity map.

use ndarray::Array2;
use rayon::prelude::*;

use crate::domain::{CategoryCentroid, Domain};
use crate::emd::{emd_value, solve_transport, TransportPlan, TransportProblem};
use crate::error::{Error, Result};

/// Default decay rate of `sim = exp(-gamma · d)`.
pub const DEFAULT_GAMMA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityConfig {
    gamma: f64,
}

impl SimilarityConfig {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
        }
        Ok(SimilarityConfig { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Maps a domain distance to a similarity in (0, 1].
    pub fn similarity(&self, distance: f64) -> f64 {
        (-self.gamma * distance).exp()
    }
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig { gamma: DEFAULT_GAMMA }
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Euclidean distance between two category means.
pub fn category_distance(a: &CategoryCentroid, b: &CategoryCentroid) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    Ok(euclidean(&a.mean, &b.mean))
}

/// Ground-distance matrix between the centroids of `source` (rows) and
/// `target` (columns), in each domain's canonical order.
///
/// Rows are filled in parallel; each entry depends only on its own pair so
/// the result is identical to a sequential fill.
pub fn cost_matrix(source: &Domain, target: &Domain) -> Result<Array2<f64>> {
    check_dim(source.dim(), target.dim())?;
    let (m, n) = (source.len(), target.len());
    let mut cost = Array2::<f64>::zeros((m, n));
    cost.as_slice_mut()
        .expect("fresh array is contiguous")
        .par_chunks_mut(n)
        .zip(source.centroids().par_iter())
        .for_each(|(row, s)| {
            for (entry, t) in row.iter_mut().zip(target.centroids()) {
                *entry = euclidean(&s.mean, &t.mean);
            }
        });
    Ok(cost)
}

/// The transport problem whose optimum defines the domain distance.
pub fn domain_problem(source: &Domain, target: &Domain) -> Result<TransportProblem> {
    let cost = cost_matrix(source, target)?;
    TransportProblem::new(source.weights(), target.weights(), cost)
}

/// Domain distance together with the optimal plan behind it.
pub fn domain_distance_with_plan(source: &Domain, target: &Domain) -> Result<(f64, TransportPlan)> {
    let problem = domain_problem(source, target)?;
    let plan = solve_transport(&problem)?;
    Ok((emd_value(&plan)?, plan))
}

/// Earth Mover's Distance between two domains under the Euclidean ground
/// distance of their category means.
pub fn domain_distance(source: &Domain, target: &Domain) -> Result<f64> {
    domain_distance_with_plan(source, target).map(|(d, _)| d)
}

pub fn domain_similarity(source: &Domain, target: &Domain, cfg: &SimilarityConfig) -> Result<f64> {
    Ok(cfg.similarity(domain_distance(source, target)?))
}

/// Distance from a single category, taken as a weight-one domain, to
/// `target`. With one source all mass is forced, so the EMD is the
/// target-weighted mean distance.
pub fn singleton_distance(source: &CategoryCentroid, target: &Domain) -> Result<f64> {
    check_dim(source.dim(), target.dim())?;
    Ok(target
        .centroids()
        .iter()
        .map(|t| t.weight * euclidean(&source.mean, &t.mean))
        .sum())
}

pub fn singleton_similarity(
    source: &CategoryCentroid,
    target: &Domain,
    cfg: &SimilarityConfig,
) -> Result<f64> {
    Ok(cfg.similarity(singleton_distance(source, target)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn centroid(id: &str, mean: &[f64]) -> CategoryCentroid {
        CategoryCentroid {
            category_id: id.into(),
            mean: mean.to_vec(),
            count: 1,
            weight: 1.0,
        }
    }

    fn domain(parts: &[(&str, &[f64], u64)]) -> Domain {
        Domain::from_parts(
            parts[0].1.len(),
            parts.iter().map(|(id, m, c)| (id.to_string(), m.to_vec(), *c)),
        )
        .unwrap()
    }

    #[test]
    fn pythagorean_distance() {
        let a = centroid("a", &[0.0, 0.0]);
        let b = centroid("b", &[3.0, 4.0]);
        assert_eq!(category_distance(&a, &b).unwrap(), 5.0);
        assert_eq!(category_distance(&a, &a).unwrap(), 0.0);
        assert!(matches!(
            category_distance(&a, &centroid("c", &[1.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gamma_default_and_validation() {
        assert_eq!(SimilarityConfig::default().gamma(), 0.01);
        assert!(SimilarityConfig::new(0.0).is_err());
        assert!(SimilarityConfig::new(-1.0).is_err());
        assert!(SimilarityConfig::new(f64::NAN).is_err());
        let cfg = SimilarityConfig::default();
        assert_eq!(cfg.similarity(0.0), 1.0);
        assert!((cfg.similarity(100.0) - (-1.0f64).exp()).abs() <= 1e-12);
    }

    #[test]
    fn self_cost_has_zero_diagonal() {
        let d = domain(&[("a", &[0.0, 1.0], 1), ("b", &[2.0, 1.0], 3), ("c", &[5.0, -1.0], 2)]);
        let c = cost_matrix(&d, &d).unwrap();
        for i in 0..3 {
            assert_eq!(c[[i, i]], 0.0);
        }
        assert!(domain_distance(&d, &d).unwrap().abs() <= 1e-9);
        assert_eq!(domain_similarity(&d, &d, &SimilarityConfig::default()).unwrap(), 1.0);
    }

    #[test]
    fn singleton_closed_form() {
        // Target weights (0.25, 0.75) at distances 2 and 4: d = 3.5.
        let target = domain(&[("t1", &[2.0], 1), ("t2", &[-4.0], 3)]);
        let s = centroid("s", &[0.0]);
        let expected = (-0.035f64).exp();
        let sim = singleton_similarity(&s, &target, &SimilarityConfig::default()).unwrap();
        assert!((sim - expected).abs() < 1e-15);
        assert!((sim - 0.9656054).abs() < 1e-7);

        let single = domain(&[("s", &[0.0], 5)]);
        let via_solver = domain_similarity(&single, &target, &SimilarityConfig::default()).unwrap();
        assert!((via_solver - sim).abs() <= 1e-12);
    }

    #[test]
    fn embedded_two_by_two_instance() {
        // Ground distances [[1, 2], [3, 1]] cannot be realised on a line but
        // can in the plane: s1 = (1, 0), s2 = (17/6, sqrt(35)/6),
        // t1 = (0, 0), t2 = (3, 0).
        let s2 = [17.0 / 6.0, 35f64.sqrt() / 6.0];
        let source = domain(&[("s1", &[1.0, 0.0], 7), ("s2", &s2, 3)]);
        let target = domain(&[("t1", &[0.0, 0.0], 4), ("t2", &[3.0, 0.0], 6)]);
        let c = cost_matrix(&source, &target).unwrap();
        for (got, want) in c.iter().zip([1.0, 2.0, 3.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        let d = domain_distance(&source, &target).unwrap();
        assert!((d - 1.3).abs() < 1e-12);
    }
}
