use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// A point of projective space, stored as a unit-norm representative.
#[derive(Clone, Debug, Serialize)]
pub struct ProjectivePoint {
    coords: Vec<Complex64>,
}

impl ProjectivePoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        let norm = coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::BasePointLike);
        }
        Ok(Self { coords: coords.into_iter().map(|c| c / norm).collect() })
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// `min_phi | p - e^{i phi} q |` for unit representatives, computed after aligning phases so it
    /// stays accurate for nearby points.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len());
        let inner: Complex64 = self.coords.iter().zip(&other.coords).map(|(a, b)| b.conj() * a).sum();
        let phase = if inner.norm() > 0.0 { inner / inner.norm() } else { Complex64::new(1.0, 0.0) };
        self.coords.iter().zip(&other.coords).map(|(a, b)| (a - phase * b).norm_sqr()).sum::<f64>().sqrt()
    }

    /// Coordinatewise squares.
    pub fn squared(&self) -> Self {
        Self::new(self.coords.iter().map(|c| c * c).collect()).expect("square of a nonzero point")
    }

    /// `max_{i in idx} |z_i| / max_i |z_i|`.
    pub fn relative_size(&self, idx: &[usize]) -> f64 {
        let all = self.coords.iter().map(|c| c.norm()).fold(0.0, f64::max);
        idx.iter().map(|&i| self.coords[i].norm()).fold(0.0, f64::max) / all
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn point(v: &[(f64, f64)]) -> ProjectivePoint {
        ProjectivePoint::new(v.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap()
    }

    #[test]
    fn scaling_invariance_and_zero() {
        let p = point(&[(1.0, 0.0), (0.0, 2.0)]);
        let q = point(&[(0.0, 3.0), (-6.0, 0.0)]);
        assert!(p.distance(&q) < 1e-15);
        assert!(ProjectivePoint::new(vec![Complex64::new(0.0, 0.0); 3]).is_err());
    }

    proptest! {
        #[test]
        fn metric_axioms(a in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3),
                         b in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3),
                         c in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3)) {
            let nz = |v: &Vec<(f64, f64)>| v.iter().map(|(x, y)| x * x + y * y).sum::<f64>() > 1e-6;
            prop_assume!(nz(&a) && nz(&b) && nz(&c));
            let (p, q, r) = (point(&a), point(&b), point(&c));
            prop_assert!((p.distance(&q) - q.distance(&p)).abs() < 1e-12);
            prop_assert!(p.distance(&r) <= p.distance(&q) + q.distance(&r) + 1e-12);
            prop_assert!(p.distance(&p) < 1e-12);
        }
    }
}
