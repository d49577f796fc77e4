use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::matcalc::{direct_sum, Matrix};
use crate::scalar::Real;

/// Variable name to matrix map; every matrix has the same dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment<T: Real> {
    dim: usize,
    values: BTreeMap<String, Matrix<T>>,
}

impl<T: Real> Assignment<T> {
    pub fn new(dim: usize) -> Self {
        Assignment { dim, values: BTreeMap::new() }
    }

    /// Every listed variable assigned the zero matrix.
    pub fn zero<'a>(names: impl IntoIterator<Item = &'a str>, dim: usize) -> Self {
        let mut a = Self::new(dim);
        for n in names {
            a.values.insert(n.to_string(), Matrix::zeros(dim));
        }
        a
    }

    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, Matrix<T>)>) -> Result<Self> {
        let mut it = pairs.into_iter().peekable();
        let dim = it.peek().map(|(_, m)| m.dim()).ok_or(Error::EmptyList)?;
        let mut a = Self::new(dim);
        for (n, m) in it {
            a.insert(n, m)?;
        }
        Ok(a)
    }

    pub fn insert(&mut self, name: impl Into<String>, m: Matrix<T>) -> Result<()> {
        if m.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: m.dim() });
        }
        self.values.insert(name.into(), m);
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, name: &str) -> Result<&Matrix<T>> {
        self.values.get(name).ok_or_else(|| Error::Unassigned(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Matrix<T>)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn matrices(&self) -> impl Iterator<Item = &Matrix<T>> {
        self.values.values()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Applies `f` to every matrix.
    pub fn map(&self, mut f: impl FnMut(&Matrix<T>) -> Matrix<T>) -> Self {
        Assignment { dim: self.dim, values: self.values.iter().map(|(k, v)| (k.clone(), f(v))).collect() }
    }

    pub fn try_map(&self, mut f: impl FnMut(&Matrix<T>) -> Result<Matrix<T>>) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (k, v) in &self.values {
            values.insert(k.clone(), f(v)?);
        }
        let dim = values.values().next().map_or(self.dim, Matrix::dim);
        Ok(Assignment { dim, values })
    }

    /// `U a U*` variable-wise.
    pub fn conjugate_by(&self, u: &Matrix<T>) -> Result<Self> {
        if u.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: u.dim() });
        }
        Ok(self.map(|m| m.conjugate_by(u)))
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.map(|m| m.scale_real(s))
    }

    /// Variable-wise direct sum of assignments over the same variables.
    pub fn direct_sum(parts: &[Assignment<T>]) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptyList)?;
        if parts.iter().any(|p| !p.values.keys().eq(first.values.keys())) {
            return Err(Error::VariableSetMismatch);
        }
        let dim = parts.iter().map(|p| p.dim).sum();
        let mut out = Assignment::new(dim);
        for name in first.values.keys() {
            let blocks: Vec<Matrix<T>> = parts.iter().map(|p| p.values[name].clone()).collect();
            out.values.insert(name.clone(), direct_sum(&blocks)?);
        }
        Ok(out)
    }
}
