use nalgebra::SymmetricEigen;

use super::{HilbertSpace, Matrix, Operator, StateVector, Vector, C64};
use crate::error::{Error, Result};

/// `e^{−iHt}` for a time-independent Hermitian `H`, diagonalized once.
#[derive(Clone, Debug)]
pub struct EigenPropagator {
    space: HilbertSpace,
    values: Vec<f64>,
    vectors: Matrix,
}

impl EigenPropagator {
    pub fn new(h: &Operator) -> Result<Self> {
        h.check_hermitian()?;
        // symmetrize so rounding noise cannot leak into the decomposition
        let herm = (h.matrix() + h.matrix().adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::try_new(herm, f64::EPSILON, 0).ok_or(Error::Eigen)?;
        Ok(Self { space: h.space().clone(), values: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    pub fn apply(&self, t: f64, psi: &StateVector) -> Result<StateVector> {
        if psi.space() != &self.space {
            return Err(Error::DimensionMismatch { expected: self.space.dim(), actual: psi.dim() });
        }
        let mut coeffs: Vector = self.vectors.ad_mul(psi.amplitudes());
        for (z, &e) in coeffs.iter_mut().zip(&self.values) {
            *z *= C64::from_polar(1.0, -e * t);
        }
        Ok(StateVector::from_normalized(self.space.clone(), &self.vectors * coeffs))
    }

    pub fn unitary(&self, t: f64) -> Matrix {
        let phases = Vector::from_iterator(self.values.len(), self.values.iter().map(|&e| C64::from_polar(1.0, -e * t)));
        let scaled = Matrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |r, col| self.vectors[(r, col)] * phases[col]);
        scaled * self.vectors.adjoint()
    }
}

/// `e^{−iHt}ψ`, with `H` in rad/s and `t` in seconds.
pub fn expm_apply(h: &Operator, t: f64, psi: &StateVector) -> Result<StateVector> {
    EigenPropagator::new(h)?.apply(t, psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{c, pauli, Pauli};
    use std::f64::consts::{PI, TAU};

    #[test]
    fn zero_time_is_identity() {
        let h = pauli(Pauli::X).scale(c(3.0));
        let space = h.space().clone();
        let psi = StateVector::new(space, Vector::from_vec(vec![c(0.6), C64::new(0.0, 0.8)])).unwrap();
        let out = expm_apply(&h, 0.0, &psi).unwrap();
        assert!((out.amplitudes() - psi.amplitudes()).norm() < 1e-14);
    }

    #[test]
    fn larmor_period_gives_minus_one() {
        let omega = 2.0 * PI * 5e6;
        let h = pauli(Pauli::Z).scale(c(omega / 2.0));
        let psi = StateVector::new(h.space().clone(), Vector::from_vec(vec![c(1.0), c(1.0)])).unwrap();
        let out = expm_apply(&h, TAU / omega, &psi).unwrap();
        for k in 0..2 {
            assert!((out.amplitudes()[k] + psi.amplitudes()[k]).norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let h = pauli(Pauli::Plus);
        let psi = StateVector::basis(h.space(), &[0]).unwrap();
        assert!(matches!(expm_apply(&h, 1.0, &psi), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn unitary_matches_apply() {
        let h = &pauli(Pauli::X) + &pauli(Pauli::Z).scale(c(0.3));
        let prop = EigenPropagator::new(&h).unwrap();
        let u = prop.unitary(0.7);
        let psi = StateVector::basis(h.space(), &[1]).unwrap();
        let out = prop.apply(0.7, &psi).unwrap();
        assert!((&u * psi.amplitudes() - out.amplitudes()).norm() < 1e-13);
    }
}
