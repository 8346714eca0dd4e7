use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered tensor factors of a Hilbert space, first factor most significant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsystemLayout {
    factors: Vec<(String, usize)>,
}

impl SubsystemLayout {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let factors: Vec<(String, usize)> =
            factors.into_iter().map(|(l, d)| (l.into(), d)).collect();
        if factors.is_empty() {
            return Err(Error::layout("layout needs at least one factor"));
        }
        for (i, (label, dim)) in factors.iter().enumerate() {
            if *dim == 0 {
                return Err(Error::layout(format!("factor `{label}` has dimension 0")));
            }
            if factors[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::layout(format!("duplicate factor label `{label}`")));
            }
        }
        Ok(SubsystemLayout { factors })
    }

    pub fn factors(&self) -> &[(String, usize)] {
        &self.factors
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|(l, _)| l.as_str())
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Product of factor dimensions; saturates instead of overflowing.
    pub fn dim(&self) -> usize {
        self.factors
            .iter()
            .fold(1usize, |acc, (_, d)| acc.saturating_mul(*d))
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::layout(format!("unknown factor label `{label}`")))
    }

    pub fn factor_dim(&self, label: &str) -> Result<usize> {
        Ok(self.factors[self.position(label)?].1)
    }

    /// Row-major strides of each factor in the full index.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.factors.len()];
        for i in (0..self.factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.factors[i + 1].1;
        }
        strides
    }

    /// Per-factor digits of a full basis index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for i in (0..self.factors.len()).rev() {
            out[i] = index % self.factors[i].1;
            index /= self.factors[i].1;
        }
        out
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(self.factors.iter())
            .fold(0, |acc, (d, (_, dim))| acc * dim + d)
    }

    /// Layout positions of `labels`, sorted into layout order and deduplicated.
    pub fn positions(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut pos = labels
            .iter()
            .map(|l| self.position(l))
            .collect::<Result<Vec<_>>>()?;
        pos.sort_unstable();
        pos.dedup();
        Ok(pos)
    }

    /// The layout restricted to the given positions.
    pub fn sub_layout(&self, positions: &[usize]) -> SubsystemLayout {
        SubsystemLayout {
            factors: positions.iter().map(|&p| self.factors[p].clone()).collect(),
        }
    }

    /// Full-index offsets of every basis state of the factors at `positions`,
    /// enumerated in row-major order of those factors.
    pub(crate) fn offsets(&self, positions: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut offsets = vec![0usize];
        for &p in positions {
            let dim = self.factors[p].1;
            let mut next = Vec::with_capacity(offsets.len() * dim);
            for &o in &offsets {
                for d in 0..dim {
                    next.push(o + d * strides[p]);
                }
            }
            offsets = next;
        }
        offsets
    }

    pub(crate) fn complement(&self, positions: &[usize]) -> Vec<usize> {
        (0..self.factors.len())
            .filter(|p| !positions.contains(p))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_layouts() {
        assert!(SubsystemLayout::new(Vec::<(String, usize)>::new()).is_err());
        assert!(SubsystemLayout::new([("a", 2), ("a", 3)]).is_err());
        assert!(SubsystemLayout::new([("a", 0)]).is_err());
    }

    #[test]
    fn digits_roundtrip() {
        let l = SubsystemLayout::new([("a", 2), ("b", 3), ("c", 4)]).unwrap();
        assert_eq!(l.dim(), 24);
        assert_eq!(l.strides(), vec![12, 4, 1]);
        for i in 0..24 {
            assert_eq!(l.index(&l.digits(i)), i);
        }
        assert_eq!(l.offsets(&[1]), vec![0, 4, 8]);
        assert_eq!(l.complement(&[1]), vec![0, 2]);
    }
}
