//! Gate set of the chiral GHZ circuits.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::chirality::asi_gate_unitary;
use crate::error::{Error, Result};
use crate::operator::{c, DensityMatrix, HilbertSpace, LocalOp, Matrix, Operator, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateKind {
    X,
    /// π/2 rotation about ŷ: `|↓⟩ → (|↓⟩+|↑⟩)/√2`, `|↑⟩ → (|↑⟩−|↓⟩)/√2`.
    Yhalf,
    /// `exp(−iH_ijk T₀)` with `H_ijk` the three-spin ring on the ordered targets.
    Asi,
}

/// A gate on 0-based register sites.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateOp {
    kind: GateKind,
    targets: Vec<usize>,
}

impl GateOp {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Result<Self> {
        let want = if kind == GateKind::Asi { 3 } else { 1 };
        if targets.len() != want {
            return Err(Error::InvalidParameter(format!("{kind:?} takes {want} target(s), got {}", targets.len())));
        }
        for (k, t) in targets.iter().enumerate() {
            if targets[..k].contains(t) {
                return Err(Error::InvalidParameter(format!("repeated target {t}")));
            }
        }
        Ok(Self { kind, targets })
    }

    pub fn x(target: usize) -> Self {
        Self { kind: GateKind::X, targets: vec![target] }
    }

    pub fn yhalf(target: usize) -> Self {
        Self { kind: GateKind::Yhalf, targets: vec![target] }
    }

    pub fn asi(targets: [usize; 3]) -> Result<Self> {
        Self::new(GateKind::Asi, targets.to_vec())
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn asi_targets(&self) -> Option<[usize; 3]> {
        (self.kind == GateKind::Asi).then(|| [self.targets[0], self.targets[1], self.targets[2]])
    }

    fn check(&self, n_sites: usize) -> Result<()> {
        match self.targets.iter().find(|&&t| t >= n_sites) {
            Some(&t) => Err(Error::SiteOutOfRange { index: t, len: n_sites }),
            None => Ok(()),
        }
    }
}

fn single_qubit_matrix(kind: GateKind, levels: usize) -> Matrix {
    let mut m = Matrix::identity(levels, levels);
    let s = c(FRAC_1_SQRT_2);
    let (uu, ud, du, dd) = match kind {
        GateKind::X => (c(0.0), c(1.0), c(1.0), c(0.0)),
        GateKind::Yhalf => (s, s, -s, s),
        GateKind::Asi => unreachable!("not a single-qubit gate"),
    };
    m[(0, 0)] = uu;
    m[(0, 1)] = ud;
    m[(1, 0)] = du;
    m[(1, 1)] = dd;
    m
}

/// The gate as an operator on `space`. Single-qubit gates act on the
/// (↑, ↓) block of their factor; ASI needs a qubit-only register.
pub fn gate_operator(gate: &GateOp, space: &HilbertSpace) -> Result<Operator> {
    gate.check(space.num_factors())?;
    match gate.kind {
        GateKind::Asi => {
            if space.dims().iter().any(|&d| d != 2) {
                return Err(Error::InvalidSpace("instantaneous ASI gate needs a qubit-only register".into()));
            }
            let [i, j, k] = gate.asi_targets().expect("ASI has three targets");
            asi_gate_unitary(space.num_factors(), [i, j, k])
        }
        kind => {
            let t = gate.targets[0];
            let levels = space.dims()[t];
            if !(2..=3).contains(&levels) {
                return Err(Error::InvalidSpace(format!("site {t} is not a transmon ({levels} levels)")));
            }
            Ok(LocalOp::new(space, &[t], single_qubit_matrix(kind, levels))?.to_operator())
        }
    }
}

pub fn apply_gate(psi: &StateVector, gate: &GateOp) -> Result<StateVector> {
    let u = gate_operator(gate, psi.space())?;
    StateVector::new(psi.space().clone(), u.apply(psi)?)
}

pub fn apply_gate_density(rho: &DensityMatrix, gate: &GateOp) -> Result<DensityMatrix> {
    let u = gate_operator(gate, rho.space())?;
    let m = u.matrix() * rho.matrix() * u.matrix().adjoint();
    let herm = (&m + m.adjoint()) * c(0.5);
    DensityMatrix::new(rho.space().clone(), herm)
}

/// GHZ fidelity against `(|↓…↓⟩ + e^{iϕ}|↑…↑⟩)/√2` on the leading `n` transmon factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhzReport {
    pub n_qubits: usize,
    /// Maximized over the relative phase ϕ.
    pub fidelity: f64,
    /// At ϕ = 0.
    pub raw_fidelity: f64,
    pub relative_phase: f64,
    pub threshold: f64,
    pub genuine_entanglement: bool,
    pub leakage: f64,
    pub t0_ns: Option<f64>,
}

pub const GHZ_THRESHOLD: f64 = 0.5;

/// `ρ` is over transmon factors only (resonator already traced out).
pub fn ghz_fidelity(rho: &DensityMatrix) -> Result<(f64, f64, f64)> {
    let space = rho.space();
    let n = space.num_factors();
    let a = space.index_of(&vec![1; n])?;
    let b = space.index_of(&vec![0; n])?;
    let m = rho.matrix();
    let diag = 0.5 * (m[(a, a)].re + m[(b, b)].re);
    let coh = m[(a, b)];
    Ok(((diag + coh.norm()).clamp(0.0, 1.0), (diag + coh.re).clamp(0.0, 1.0), coh.arg()))
}
