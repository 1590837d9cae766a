//! Dense complex operator and state algebra over tensor-product spaces.
//!
//! Qubit factors use the basis `(|↑⟩, |↓⟩)` with `σᶻ|↑⟩ = +|↑⟩`; transmon
//! factors with a third level append `|f⟩` as index 2, so the two-level
//! subspace always occupies indices 0 and 1. Units are `ħ = 1`: Hamiltonians
//! are angular frequencies in rad/s and times are seconds.

mod local;
mod ops;
mod propagate;
mod space;

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use local::LocalOp;
pub use ops::{boson_ops, embed, identity, pauli, transmon_lowering, transmon_number, Pauli};
pub use propagate::{expm_apply, EigenPropagator};
pub use space::HilbertSpace;

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

/// Tolerance on `max|A − A†|`, relative to `max(1, max|A|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub(crate) fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    matrix: Matrix,
}

impl Operator {
    pub fn new(space: HilbertSpace, matrix: Matrix) -> Result<Self> {
        let n = space.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: if matrix.nrows() != n { matrix.nrows() } else { matrix.ncols() },
            });
        }
        Ok(Self { space, matrix })
    }

    /// Operator on a single factor of dimension `matrix.nrows()`.
    pub fn local(matrix: Matrix) -> Result<Self> {
        let space = HilbertSpace::new(vec![matrix.nrows()])?;
        Self::new(space, matrix)
    }

    /// Like [`Operator::new`] but also verifies Hermiticity.
    pub fn hermitian(space: HilbertSpace, matrix: Matrix) -> Result<Self> {
        let op = Self::new(space, matrix)?;
        op.check_hermitian()?;
        Ok(op)
    }

    pub fn zeros(space: &HilbertSpace) -> Self {
        let n = space.dim();
        Self { space: space.clone(), matrix: Matrix::zeros(n, n) }
    }

    pub fn identity(space: &HilbertSpace) -> Self {
        let n = space.dim();
        Self { space: space.clone(), matrix: Matrix::identity(n, n) }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_deviation() <= HERMITIAN_TOL * max_abs(&self.matrix).max(1.0)
    }

    pub fn check_hermitian(&self) -> Result<()> {
        let deviation = self.hermiticity_deviation();
        if deviation > HERMITIAN_TOL * max_abs(&self.matrix).max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(())
    }

    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        self.same_space(other)?;
        let m = &self.matrix * &other.matrix - &other.matrix * &self.matrix;
        Ok(Self { space: self.space.clone(), matrix: m })
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { space: self.space.clone(), matrix: &self.matrix * z }
    }

    pub fn apply(&self, psi: &StateVector) -> Result<Vector> {
        if psi.space() != &self.space {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: psi.dim() });
        }
        Ok(&self.matrix * psi.amplitudes())
    }

    /// `⟨ψ|A|ψ⟩`.
    pub fn expectation(&self, psi: &StateVector) -> Result<C64> {
        let a_psi = self.apply(psi)?;
        Ok(psi.amplitudes().dotc(&a_psi))
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    /// Eigenvalues of a Hermitian operator in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.check_hermitian()?;
        let eig = nalgebra::SymmetricEigen::new(self.matrix.clone());
        let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        Ok(values)
    }

    fn same_space(&self, other: &Operator) -> Result<()> {
        if self.space != other.space {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: other.dim() });
        }
        Ok(())
    }
}

// Arithmetic panics on mismatched spaces, the same way nalgebra panics on
// mismatched shapes. Use the checked methods where mismatch is an input error.
impl Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "operator spaces differ");
        Operator { space: self.space.clone(), matrix: &self.matrix + &rhs.matrix }
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "operator spaces differ");
        Operator { space: self.space.clone(), matrix: &self.matrix - &rhs.matrix }
    }
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "operator spaces differ");
        Operator { space: self.space.clone(), matrix: &self.matrix * &rhs.matrix }
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;

    fn mul(self, rhs: C64) -> Operator {
        self.scale(rhs)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;

    fn mul(self, rhs: f64) -> Operator {
        self.scale(c(rhs))
    }
}

impl Neg for &Operator {
    type Output = Operator;

    fn neg(self) -> Operator {
        self.scale(c(-1.0))
    }
}

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    space: HilbertSpace,
    amplitudes: Vector,
}

pub const NORM_TOL: f64 = 1e-10;

impl StateVector {
    /// Builds a state and normalizes it. Fails on the zero vector.
    pub fn new(space: HilbertSpace, amplitudes: Vector) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), actual: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter("state vector has zero or non-finite norm".into()));
        }
        Ok(Self { space, amplitudes: amplitudes / c(norm) })
    }

    /// Wraps amplitudes that are already normalized (e.g. the output of a
    /// unitary step); only the length is checked.
    pub(crate) fn from_normalized(space: HilbertSpace, amplitudes: Vector) -> Self {
        debug_assert_eq!(amplitudes.len(), space.dim());
        Self { space, amplitudes }
    }

    pub fn basis(space: &HilbertSpace, digits: &[usize]) -> Result<Self> {
        let idx = space.index_of(digits)?;
        let mut v = Vector::zeros(space.dim());
        v[idx] = c(1.0);
        Ok(Self { space: space.clone(), amplitudes: v })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &Vector {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.space != other.space {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: other.dim() });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|⟨self|other⟩|²`, the phase-insensitive overlap.
    pub fn overlap_sq(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn equals_up_to_phase(&self, other: &StateVector, tol: f64) -> bool {
        self.overlap_sq(other).map(|o| o >= 1.0 - tol).unwrap_or(false)
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    pub fn to_density(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix { space: self.space.clone(), matrix: m }
    }
}

/// Mixed state with validated Hermiticity, unit trace and positivity.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    space: HilbertSpace,
    matrix: Matrix,
}

pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-9;

impl DensityMatrix {
    pub fn new(space: HilbertSpace, matrix: Matrix) -> Result<Self> {
        let n = space.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: matrix.nrows() });
        }
        let herm = max_abs(&(&matrix - matrix.adjoint()));
        if herm > NORM_TOL {
            return Err(Error::NotHermitian { deviation: herm });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidParameter(format!("density matrix trace {tr} != 1")));
        }
        let rho = Self { space, matrix };
        let min_eig = rho.min_eigenvalue();
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::InvalidParameter(format!("density matrix eigenvalue {min_eig:e} < 0")));
        }
        Ok(rho)
    }

    /// Skips validation; used for integrator output whose invariants are
    /// monitored separately.
    pub(crate) fn from_raw(space: HilbertSpace, matrix: Matrix) -> Self {
        Self { space, matrix }
    }

    pub fn maximally_mixed(space: &HilbertSpace) -> Self {
        let n = space.dim();
        Self { space: space.clone(), matrix: Matrix::identity(n, n) / c(n as f64) }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * c(0.5);
        let eig = nalgebra::SymmetricEigen::new(herm);
        eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn population(&self, index: usize) -> f64 {
        self.matrix[(index, index)].re
    }

    /// Reduced state on the listed factors (kept in ascending order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let dims = self.space.dims();
        let mut keep: Vec<usize> = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        for &k in &keep {
            self.space.check_site(k)?;
        }
        let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
        let reduced_space = HilbertSpace::new(kept_dims)?;
        let n = self.dim();
        let m = reduced_space.dim();
        let reduced_index = |full: &[usize]| keep.iter().fold(0, |acc, &k| acc * dims[k] + full[k]);
        let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
        let mut out = Matrix::zeros(m, m);
        let digits: Vec<Vec<usize>> = (0..n).map(|i| self.space.digits_of(i)).collect();
        for i in 0..n {
            for j in 0..n {
                if traced.iter().all(|&k| digits[i][k] == digits[j][k]) {
                    out[(reduced_index(&digits[i]), reduced_index(&digits[j]))] += self.matrix[(i, j)];
                }
            }
        }
        Ok(DensityMatrix { space: reduced_space, matrix: out })
    }
}

/// `⟨ψ|ρ|ψ⟩`, clamped to `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, target: &StateVector) -> Result<f64> {
    if rho.space() != target.space() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), actual: target.dim() });
    }
    let v = target.amplitudes();
    let f = v.dotc(&(rho.matrix() * v)).re;
    Ok(f.clamp(0.0, 1.0))
}
