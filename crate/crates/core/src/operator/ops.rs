use serde::{Deserialize, Serialize};

use super::{c, HilbertSpace, Matrix, Operator, I};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
    /// `σ⁺ = |↑⟩⟨↓|`
    Plus,
    /// `σ⁻ = |↓⟩⟨↑|`
    Minus,
}

pub fn pauli(kind: Pauli) -> Operator {
    let z = c(0.0);
    let one = c(1.0);
    let m = match kind {
        Pauli::X => Matrix::from_row_slice(2, 2, &[z, one, one, z]),
        Pauli::Y => Matrix::from_row_slice(2, 2, &[z, -I, I, z]),
        Pauli::Z => Matrix::from_row_slice(2, 2, &[one, z, z, -one]),
        Pauli::Plus => Matrix::from_row_slice(2, 2, &[z, one, z, z]),
        Pauli::Minus => Matrix::from_row_slice(2, 2, &[z, z, one, z]),
    };
    Operator::local(m).expect("2x2 is a valid local operator")
}

pub fn identity(dim: usize) -> Result<Operator> {
    Operator::local(Matrix::identity(dim, dim))
}

/// Truncated ladder operators `(a, a†)` with `a|n⟩ = √n |n−1⟩`.
pub fn boson_ops(n_fock: usize) -> Result<(Operator, Operator)> {
    if n_fock < 2 {
        return Err(Error::InvalidParameter(format!("n_fock = {n_fock} < 2")));
    }
    let mut a = Matrix::zeros(n_fock, n_fock);
    for n in 1..n_fock {
        a[(n - 1, n)] = c((n as f64).sqrt());
    }
    let a = Operator::local(a)?;
    let a_dag = a.adjoint();
    Ok((a, a_dag))
}

/// Transmon lowering operator in the basis `(|e⟩, |g⟩[, |f⟩])`:
/// `|g⟩⟨e| + √2 |e⟩⟨f|`. For two levels this is `σ⁻`.
pub fn transmon_lowering(levels: usize) -> Result<Operator> {
    match levels {
        2 => Ok(pauli(Pauli::Minus)),
        3 => {
            let mut m = Matrix::zeros(3, 3);
            m[(1, 0)] = c(1.0);
            m[(0, 2)] = c(std::f64::consts::SQRT_2);
            Operator::local(m)
        }
        _ => Err(Error::InvalidParameter(format!("transmon with {levels} levels"))),
    }
}

/// Excitation number in the basis `(|e⟩, |g⟩[, |f⟩])`.
pub fn transmon_number(levels: usize) -> Result<Operator> {
    let diag: &[f64] = match levels {
        2 => &[1.0, 0.0],
        3 => &[1.0, 0.0, 2.0],
        _ => return Err(Error::InvalidParameter(format!("transmon with {levels} levels"))),
    };
    let m = Matrix::from_diagonal(&nalgebra::DVector::from_iterator(diag.len(), diag.iter().map(|&x| c(x))));
    Operator::local(m)
}

/// `I ⊗ … ⊗ local ⊗ … ⊗ I` with `local` on factor `site`.
pub fn embed(space: &HilbertSpace, site: usize, local: &Operator) -> Result<Operator> {
    space.check_site(site)?;
    let d = space.dims()[site];
    if local.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, actual: local.dim() });
    }
    let dims = space.dims();
    let left: usize = dims[..site].iter().product();
    let right: usize = dims[site + 1..].iter().product();
    let m = Matrix::identity(left, left).kronecker(local.matrix()).kronecker(&Matrix::identity(right, right));
    Operator::new(space.clone(), m)
}
