use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest supported chart dimension.
pub const MAX_DIM: usize = 8;

/// A box-shaped coordinate chart. Dimension 0 is the one-point chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartDomain {
    name: String,
    bounds: Vec<(f64, f64)>,
}

pub type Chart = Arc<ChartDomain>;

impl ChartDomain {
    pub fn new(name: impl Into<String>, bounds: Vec<(f64, f64)>) -> Result<Chart> {
        let name = name.into();
        if bounds.is_empty() || bounds.len() > MAX_DIM {
            return Err(Error::InvalidChart(format!(
                "`{name}`: dimension {} outside 1..={MAX_DIM}",
                bounds.len()
            )));
        }
        for (k, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidChart(format!(
                    "`{name}`: interval {} is [{lo}, {hi}]",
                    k + 1
                )));
            }
        }
        Ok(Arc::new(ChartDomain { name, bounds }))
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(name: impl Into<String>, dim: usize, lo: f64, hi: f64) -> Result<Chart> {
        ChartDomain::new(name, vec![(lo, hi); dim])
    }

    /// The zero-dimensional chart of a single point.
    pub fn point(name: impl Into<String>) -> Chart {
        Arc::new(ChartDomain {
            name: name.into(),
            bounds: Vec::new(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().zip(&self.bounds).all(|(x, &(lo, hi))| *x >= lo && *x <= hi)
    }

    pub fn ensure_contains(&self, p: &[f64]) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::PointOutsideChart {
                chart: self.name.clone(),
                point: p.to_vec(),
            })
        }
    }

    /// Charts are interchangeable when name and box agree.
    pub fn ensure_same(&self, other: &ChartDomain) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ChartMismatch {
                expected: self.name.clone(),
                found: other.name.clone(),
            })
        }
    }

    /// `n` points drawn uniformly from the box, reproducible from `seed`.
    pub fn samples(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                self.bounds
                    .iter()
                    .map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
                    .collect()
            })
            .collect()
    }

    /// The product chart `self × other`, coordinates of `self` first.
    pub fn product(&self, other: &ChartDomain) -> Result<Chart> {
        let mut bounds = self.bounds.clone();
        bounds.extend_from_slice(&other.bounds);
        ChartDomain::new(format!("{}x{}", self.name, other.name), bounds)
    }

    /// Box centre; a convenient base point for pointwise operations.
    pub fn center(&self) -> Vec<f64> {
        self.bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_boxes() {
        assert!(ChartDomain::new("a", vec![]).is_err());
        assert!(ChartDomain::new("a", vec![(1.0, 1.0)]).is_err());
        assert!(ChartDomain::cube("a", 9, -1.0, 1.0).is_err());
        assert!(ChartDomain::cube("a", 8, -1.0, 1.0).is_ok());
    }

    #[test]
    fn sampling_is_seeded_and_inside() {
        let c = ChartDomain::new("a", vec![(-1.0, 1.0), (2.0, 5.0)]).unwrap();
        let s = c.samples(64, 0);
        assert_eq!(s, c.samples(64, 0));
        assert_ne!(s, c.samples(64, 1));
        assert!(s.iter().all(|p| c.contains(p)));
    }
}
