use super::{HilbertSpace, Matrix, Operator, C64};
use crate::error::{Error, Result};

/// An operator supported on a few factors of a larger space, applied by
/// strided gather/scatter instead of building the full dense matrix.
///
/// The local matrix acts on the tensor product of `sites` in the listed
/// order. Application costs `dim / local_dim × nnz(local)`.
#[derive(Clone, Debug)]
pub struct LocalOp {
    space: HilbertSpace,
    sites: Vec<usize>,
    local: Matrix,
    entries: Vec<(usize, usize, C64)>,
    offsets: Vec<usize>,
    bases: Vec<usize>,
}

impl LocalOp {
    pub fn new(space: &HilbertSpace, sites: &[usize], local: Matrix) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidParameter("local operator needs at least one site".into()));
        }
        for (k, &s) in sites.iter().enumerate() {
            space.check_site(s)?;
            if sites[..k].contains(&s) {
                return Err(Error::InvalidParameter(format!("site {s} listed twice")));
            }
        }
        let dims = space.dims();
        let local_dim: usize = sites.iter().map(|&s| dims[s]).product();
        if local.nrows() != local_dim || local.ncols() != local_dim {
            return Err(Error::DimensionMismatch { expected: local_dim, actual: local.nrows() });
        }
        let strides = space.strides();

        // offset of each local basis state (digits in `sites` order)
        let mut offsets = Vec::with_capacity(local_dim);
        for a in 0..local_dim {
            let mut rem = a;
            let mut off = 0;
            for &s in sites.iter().rev() {
                off += (rem % dims[s]) * strides[s];
                rem /= dims[s];
            }
            offsets.push(off);
        }

        // every index whose digits on `sites` are all zero
        let others: Vec<usize> = (0..dims.len()).filter(|k| !sites.contains(k)).collect();
        let n_bases: usize = others.iter().map(|&k| dims[k]).product();
        let mut bases = Vec::with_capacity(n_bases);
        for b in 0..n_bases {
            let mut rem = b;
            let mut idx = 0;
            for &k in others.iter().rev() {
                idx += (rem % dims[k]) * strides[k];
                rem /= dims[k];
            }
            bases.push(idx);
        }
        bases.sort_unstable();

        let mut entries = Vec::new();
        for r in 0..local_dim {
            for col in 0..local_dim {
                let v = local[(r, col)];
                if v != C64::new(0.0, 0.0) {
                    entries.push((r, col, v));
                }
            }
        }
        Ok(Self { space: space.clone(), sites: sites.to_vec(), local, entries, offsets, bases })
    }

    /// Single-factor operator from an [`Operator`] on that factor.
    pub fn on_site(space: &HilbertSpace, site: usize, op: &Operator) -> Result<Self> {
        Self::new(space, &[site], op.matrix().clone())
    }

    /// Product `a ⊗ b` of two single-factor operators on distinct sites.
    pub fn on_pair(space: &HilbertSpace, (s1, a): (usize, &Operator), (s2, b): (usize, &Operator)) -> Result<Self> {
        Self::new(space, &[s1, s2], a.matrix().kronecker(b.matrix()))
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn local_matrix(&self) -> &Matrix {
        &self.local
    }

    pub fn adjoint(&self) -> Self {
        Self::new(&self.space, &self.sites, self.local.adjoint()).expect("adjoint keeps the shape")
    }

    /// Product `self · other`; both must act on the same site list.
    pub fn compose(&self, other: &LocalOp) -> Result<Self> {
        if self.sites != other.sites || self.space != other.space {
            return Err(Error::InvalidParameter("compose needs identical supports".into()));
        }
        Self::new(&self.space, &self.sites, &self.local * &other.local)
    }

    /// `out += coeff · A x` for a vector of the full dimension.
    pub fn apply_add(&self, coeff: C64, x: &[C64], out: &mut [C64]) {
        debug_assert_eq!(x.len(), self.space.dim());
        debug_assert_eq!(out.len(), self.space.dim());
        for &base in &self.bases {
            for &(r, col, v) in &self.entries {
                out[base + self.offsets[r]] += coeff * v * x[base + self.offsets[col]];
            }
        }
    }

    /// `out += coeff · A X` column by column for a column-major square matrix.
    pub fn apply_add_columns(&self, coeff: C64, x: &Matrix, out: &mut Matrix) {
        let n = self.space.dim();
        debug_assert_eq!(x.nrows(), n);
        let xs = x.as_slice();
        let os = out.as_mut_slice();
        for col in 0..x.ncols() {
            let range = col * n..(col + 1) * n;
            self.apply_add(coeff, &xs[range.clone()], &mut os[range]);
        }
    }

    pub fn to_operator(&self) -> Operator {
        let n = self.space.dim();
        let mut m = Matrix::zeros(n, n);
        for &base in &self.bases {
            for &(r, col, v) in &self.entries {
                m[(base + self.offsets[r], base + self.offsets[col])] += v;
            }
        }
        Operator::new(self.space.clone(), m).expect("shape matches the space")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{boson_ops, embed, pauli, Pauli, Vector};
    use num_complex::Complex64;

    fn random_vector(n: usize, seed: u64) -> Vector {
        // small LCG; enough to exercise every index
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        Vector::from_iterator(n, (0..n).map(|_| Complex64::new(next(), next())))
    }

    #[test]
    fn single_site_matches_embed() {
        let space = HilbertSpace::new(vec![3, 2, 4]).unwrap();
        let (a, _) = boson_ops(4).unwrap();
        let lop = LocalOp::on_site(&space, 2, &a).unwrap();
        let dense = embed(&space, 2, &a).unwrap();
        assert!(lop.to_operator().max_abs_diff(&dense) < 1e-15);
    }

    #[test]
    fn pair_matches_dense_product_in_either_order() {
        let space = HilbertSpace::new(vec![2, 3, 2]).unwrap();
        let (_, a_dag) = boson_ops(3).unwrap();
        let sm = pauli(Pauli::Minus);
        let dense = &embed(&space, 1, &a_dag).unwrap() * &embed(&space, 2, &sm).unwrap();
        let forward = LocalOp::on_pair(&space, (1, &a_dag), (2, &sm)).unwrap();
        let backward = LocalOp::on_pair(&space, (2, &sm), (1, &a_dag)).unwrap();
        assert!(forward.to_operator().max_abs_diff(&dense) < 1e-15);
        assert!(backward.to_operator().max_abs_diff(&dense) < 1e-15);
    }

    #[test]
    fn apply_matches_dense() {
        let space = HilbertSpace::new(vec![2, 3, 5]).unwrap();
        let (_, a_dag) = boson_ops(5).unwrap();
        let op = LocalOp::on_pair(&space, (2, &a_dag), (0, &pauli(Pauli::Minus))).unwrap();
        let x = random_vector(space.dim(), 7);
        let mut out = vec![Complex64::new(0.0, 0.0); space.dim()];
        op.apply_add(Complex64::new(0.5, -1.0), x.as_slice(), &mut out);
        let expect = op.to_operator().matrix() * &x * Complex64::new(0.5, -1.0);
        for (o, e) in out.iter().zip(expect.iter()) {
            assert!((o - e).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_supports() {
        let space = HilbertSpace::qubits(2);
        let x = pauli(Pauli::X);
        assert!(LocalOp::new(&space, &[0, 0], x.matrix().kronecker(x.matrix())).is_err());
        assert!(LocalOp::new(&space, &[2], x.matrix().clone()).is_err());
        assert!(LocalOp::new(&space, &[0], Matrix::identity(3, 3)).is_err());
    }
}
