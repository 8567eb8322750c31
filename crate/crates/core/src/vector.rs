//! Dense real vectors with a finiteness invariant.

use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point or direction in ℝⁿ. Every stored component is finite and the
/// dimension is fixed at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("vector dimension must be >= 1".into()));
        }
        if let Some((index, &value)) = components.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self(components))
    }

    pub fn zeros(n: usize) -> Self {
        Self::filled(n, 0.0)
    }

    /// # Panics
    /// If `n == 0` or `value` is not finite.
    pub fn filled(n: usize, value: f64) -> Self {
        assert!(n >= 1 && value.is_finite(), "filled({n}, {value})");
        Self(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.len() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                actual: self.len(),
            })
        }
    }

    pub fn dot(&self, other: &DenseVector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    /// Euclidean norm, computed with scaling so tiny or huge entries do not
    /// under- or overflow.
    pub fn norm(&self) -> f64 {
        norm2(&self.0)
    }

    pub fn distance(&self, other: &DenseVector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        let diff: Vec<f64> = self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect();
        norm2(&diff)
    }

    pub fn distance_sq(&self, other: &DenseVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// `self + scale * direction`, rejecting non-finite results.
    pub fn add_scaled(&self, scale: f64, direction: &DenseVector) -> Result<DenseVector> {
        direction.check_dim(self.len())?;
        DenseVector::new(
            self.0
                .iter()
                .zip(&direction.0)
                .map(|(x, d)| x + scale * d)
                .collect(),
        )
    }

    pub fn scaled(&self, factor: f64) -> Result<DenseVector> {
        DenseVector::new(self.0.iter().map(|x| x * factor).collect())
    }

    pub fn sub(&self, other: &DenseVector) -> Result<DenseVector> {
        other.check_dim(self.len())?;
        DenseVector::new(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

/// Euclidean norm of a slice with max-abs scaling.
pub fn norm2(values: &[f64]) -> f64 {
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let sum: f64 = values.iter().map(|v| (v / scale) * (v / scale)).sum();
    scale * sum.sqrt()
}

impl TryFrom<Vec<f64>> for DenseVector {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        DenseVector::new(value)
    }
}

impl From<DenseVector> for Vec<f64> {
    fn from(value: DenseVector) -> Self {
        value.0
    }
}

impl Index<usize> for DenseVector {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

impl<'a> IntoIterator for &'a DenseVector {
    type Item = &'a f64;
    type IntoIter = std::slice::Iter<'a, f64>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}
