use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered tensor-product space. The last factor varies fastest in the
/// flattened basis index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct HilbertSpace {
    dims: Vec<usize>,
}

impl HilbertSpace {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidSpace("no subsystems".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidSpace(format!("subsystem dimension {d} < 2")));
        }
        Ok(Self { dims })
    }

    pub fn qubits(n: usize) -> Self {
        Self::new(vec![2; n]).expect("qubit register needs at least one qubit")
    }

    /// `n` transmons with `levels` levels each followed by one bosonic mode.
    pub fn register_with_mode(n: usize, levels: usize, n_fock: usize) -> Result<Self> {
        let mut dims = vec![levels; n];
        dims.push(n_fock);
        Self::new(dims)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_factors(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.dims.len() {
            return Err(Error::SiteOutOfRange { index: site, len: self.dims.len() });
        }
        Ok(())
    }

    pub fn index_of(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.dims.len() {
            return Err(Error::DimensionMismatch { expected: self.dims.len(), actual: digits.len() });
        }
        let mut idx = 0;
        for (&d, &n) in digits.iter().zip(&self.dims) {
            if d >= n {
                return Err(Error::InvalidParameter(format!("level {d} >= dimension {n}")));
            }
            idx = idx * n + d;
        }
        Ok(idx)
    }

    pub fn digits_of(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            digits[k] = index % self.dims[k];
            index /= self.dims[k];
        }
        digits
    }
}

impl TryFrom<Vec<usize>> for HilbertSpace {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Self::new(dims)
    }
}

impl From<HilbertSpace> for Vec<usize> {
    fn from(space: HilbertSpace) -> Self {
        space.dims
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_factors() {
        assert!(HilbertSpace::new(vec![]).is_err());
        assert!(HilbertSpace::new(vec![2, 1]).is_err());
    }

    #[test]
    fn digits_round_trip() {
        let s = HilbertSpace::new(vec![3, 2, 5]).unwrap();
        assert_eq!(s.dim(), 30);
        assert_eq!(s.strides(), vec![10, 5, 1]);
        for i in 0..s.dim() {
            assert_eq!(s.index_of(&s.digits_of(i)).unwrap(), i);
        }
    }
}
