//! Fixed-dimension embedding vectors and cosine similarity.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A fixed-dimension real vector produced by an embedding provider.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector<T: Real> {
    components: Vec<T>,
}

impl<T: Real> EmbeddingVector<T> {
    /// Builds a vector, rejecting empty or non-finite input.
    pub fn new(components: Vec<T>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("embedding vector must have dim >= 1"));
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("embedding vector has non-finite component"));
        }
        Ok(EmbeddingVector { components })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[T] {
        &self.components
    }

    pub fn into_components(self) -> Vec<T> {
        self.components
    }

    /// Euclidean norm.
    pub fn norm(&self) -> T {
        self.components
            .iter()
            .map(|&c| c * c)
            .fold(T::zero(), |acc, x| acc + x)
            .sqrt()
    }

    /// Returns the unit-norm copy of this vector. The result's norm is
    /// within 1e-9 of 1. Zero vectors are rejected.
    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == T::zero() {
            return Err(Error::invalid("cannot normalize a zero vector"));
        }
        Ok(EmbeddingVector {
            components: self.components.iter().map(|&c| c / norm).collect(),
        })
    }

    /// Rounds every component through `f32`, so the vector survives the
    /// 32-bit on-disk cache format bit-for-bit.
    pub fn quantized_f32(&self) -> Self {
        EmbeddingVector {
            components: self
                .components
                .iter()
                .map(|&c| T::from_f64_const(c.as_f64() as f32 as f64))
                .collect(),
        }
    }

    /// Components as `f32` bit patterns (cache storage form).
    pub fn to_f32_components(&self) -> Vec<f32> {
        self.components.iter().map(|&c| c.as_f64() as f32).collect()
    }

    pub fn from_f32_components(components: &[f32]) -> Result<Self> {
        EmbeddingVector::new(components.iter().map(|&c| T::from_f64_const(c as f64)).collect())
    }
}

/// Cosine similarity of two same-dimension nonzero vectors, clamped to
/// `[-1, 1]` to absorb rounding.
pub fn cosine_similarity<T: Real>(u: &EmbeddingVector<T>, v: &EmbeddingVector<T>) -> Result<T> {
    if u.dim() != v.dim() {
        return Err(Error::invalid(format!(
            "cosine similarity dimension mismatch: {} vs {}",
            u.dim(),
            v.dim()
        )));
    }
    let mut dot = T::zero();
    let mut nu = T::zero();
    let mut nv = T::zero();
    for (&a, &b) in u.components().iter().zip(v.components()) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == T::zero() || nv == T::zero() {
        return Err(Error::invalid("cosine similarity undefined for zero vector"));
    }
    let cos = dot / (nu.sqrt() * nv.sqrt());
    Ok(cos.min(T::one()).max(-T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vec64(components: &[f64]) -> EmbeddingVector<f64> {
        EmbeddingVector::new(components.to_vec()).unwrap()
    }

    #[test]
    fn identical_vectors_have_similarity_one() {
        let u = vec64(&[0.3, -1.2, 4.0]);
        assert!((cosine_similarity(&u, &u).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_vectors_have_similarity_zero() {
        let u = vec64(&[1.0, 0.0]);
        let v = vec64(&[0.0, 1.0]);
        assert_eq!(cosine_similarity(&u, &v).unwrap(), 0.0);
    }

    #[test]
    fn forty_five_degrees() {
        let u = vec64(&[1.0, 1.0]);
        let v = vec64(&[1.0, 0.0]);
        let got = cosine_similarity(&u, &v).unwrap();
        assert!((got - 0.7071067811865475).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_and_zero_vector_are_errors() {
        let u = vec64(&[1.0, 0.0]);
        let v = vec64(&[1.0, 0.0, 0.0]);
        assert!(cosine_similarity(&u, &v).is_err());
        let z = vec64(&[0.0, 0.0]);
        assert!(cosine_similarity(&u, &z).is_err());
    }

    #[test]
    fn normalized_has_unit_norm() {
        let u = vec64(&[3.0, 4.0]);
        assert!((u.normalized().unwrap().norm() - 1.0).abs() < 1e-9);
        assert!(vec64(&[0.0, 0.0]).normalized().is_err());
    }

    #[test]
    fn empty_and_non_finite_rejected() {
        assert!(EmbeddingVector::<f64>::new(vec![]).is_err());
        assert!(EmbeddingVector::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn works_for_f32_too() {
        let u = EmbeddingVector::<f32>::new(vec![1.0, 1.0]).unwrap();
        let v = EmbeddingVector::<f32>::new(vec![1.0, 0.0]).unwrap();
        let got = cosine_similarity(&u, &v).unwrap();
        assert!((got - 0.70710677f32).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn similarity_is_symmetric(
            a in proptest::collection::vec(-10.0f64..10.0, 4),
            b in proptest::collection::vec(-10.0f64..10.0, 4),
        ) {
            prop_assume!(a.iter().any(|&x| x != 0.0) && b.iter().any(|&x| x != 0.0));
            let u = vec64(&a);
            let v = vec64(&b);
            prop_assert_eq!(
                cosine_similarity(&u, &v).unwrap(),
                cosine_similarity(&v, &u).unwrap()
            );
        }

        #[test]
        fn similarity_scale_invariant(
            a in proptest::collection::vec(-10.0f64..10.0, 4),
            c in 0.001f64..1000.0,
        ) {
            prop_assume!(a.iter().any(|&x| x != 0.0));
            let u = vec64(&a);
            let scaled = vec64(&a.iter().map(|&x| x * c).collect::<Vec<_>>());
            let got = cosine_similarity(&u, &scaled).unwrap();
            prop_assert!((got - 1.0).abs() < 1e-12);
        }
    }
}
