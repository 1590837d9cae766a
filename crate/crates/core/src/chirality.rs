//! Chirality operators and the chiral (antisymmetric exchange) Hamiltonian.
//!
//! Spins are 0-based internally. Presets that mirror published cluster
//! wiring are written with 1-based pairs and converted on construction.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{c, embed, pauli, HilbertSpace, Operator, Pauli, StateVector, Vector, C64};

/// Rotation angle of one chiral permutation step, `e^{−iC_zθ/2}`.
pub const THETA: f64 = 4.0 * PI / 3.0;

fn sqrt3() -> f64 {
    3f64.sqrt()
}

fn require_three_qubits(space: &HilbertSpace) -> Result<()> {
    if space.dims() != [2, 2, 2] {
        return Err(Error::InvalidSpace(format!("chirality needs three qubits, got dims {:?}", space.dims())));
    }
    Ok(())
}

fn require_qubits(space: &HilbertSpace) -> Result<()> {
    if space.dims().iter().any(|&d| d != 2) {
        return Err(Error::InvalidSpace(format!("expected a qubit-only space, got dims {:?}", space.dims())));
    }
    Ok(())
}

fn sigma(space: &HilbertSpace, site: usize) -> Result<[Operator; 3]> {
    Ok([embed(space, site, &pauli(Pauli::X))?, embed(space, site, &pauli(Pauli::Y))?, embed(space, site, &pauli(Pauli::Z))?])
}

fn dot(a: &[Operator; 3], b: &[Operator; 3]) -> Operator {
    let mut acc = &a[0] * &b[0];
    acc = &acc + &(&a[1] * &b[1]);
    &acc + &(&a[2] * &b[2])
}

/// `C_z = σ₁·(σ₂×σ₃) / 2√3`.
pub fn chirality_z(space: &HilbertSpace) -> Result<Operator> {
    require_three_qubits(space)?;
    let [s1, s2, s3] = [sigma(space, 0)?, sigma(space, 1)?, sigma(space, 2)?];
    let mut acc = Operator::zeros(space);
    for a in 0..3 {
        let (b, d) = ((a + 1) % 3, (a + 2) % 3);
        let cross = &(&s2[b] * &s3[d]) - &(&s2[d] * &s3[b]);
        acc = &acc + &(&s1[a] * &cross);
    }
    Ok(acc.scale(c(1.0 / (2.0 * sqrt3()))))
}

/// In-plane chirality components, normalized so that `(C_x, C_y, C_z)`
/// obey `[C_i, C_j] = 2i ε_ijk C_k` and have eigenvalues `{−1, 0, +1}`:
///
/// `C_x = (2σ₂·σ₃ − σ₁·σ₂ − σ₃·σ₁)/6`, `C_y = (σ₁·σ₂ − σ₃·σ₁)/2√3`.
pub fn chirality_x_y(space: &HilbertSpace) -> Result<(Operator, Operator)> {
    require_three_qubits(space)?;
    let [s1, s2, s3] = [sigma(space, 0)?, sigma(space, 1)?, sigma(space, 2)?];
    let (d12, d23, d31) = (dot(&s1, &s2), dot(&s2, &s3), dot(&s3, &s1));
    let cx = &(&d23.scale(c(2.0)) - &d12) - &d31;
    let cy = &d12 - &d31;
    Ok((cx.scale(c(1.0 / 6.0)), cy.scale(c(1.0 / (2.0 * sqrt3())))))
}

/// `S_z = Σ σᶻ_j / 2`.
pub fn total_sz(space: &HilbertSpace) -> Result<Operator> {
    require_qubits(space)?;
    let z = pauli(Pauli::Z);
    let mut acc = Operator::zeros(space);
    for j in 0..space.num_factors() {
        acc = &acc + &embed(space, j, &z)?;
    }
    Ok(acc.scale(c(0.5)))
}

/// Directed pairwise chiral couplings. An edge `(i, j)` contributes
/// `D·(σ_i × σ_j)` with `D = κẑ/4√3`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinClusterSpec {
    n_spins: usize,
    edges: Vec<(usize, usize)>,
    kappa: f64,
}

impl SpinClusterSpec {
    /// `edges` are 0-based.
    pub fn new(n_spins: usize, edges: Vec<(usize, usize)>, kappa: f64) -> Result<Self> {
        if n_spins < 3 {
            return Err(Error::InvalidParameter(format!("cluster needs at least 3 spins, got {n_spins}")));
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
        }
        for &(i, j) in &edges {
            if i >= n_spins || j >= n_spins {
                return Err(Error::InvalidParameter(format!("edge ({i}, {j}) outside {n_spins} spins")));
            }
            if i == j {
                return Err(Error::InvalidParameter(format!("self-edge ({i}, {i})")));
            }
        }
        Ok(Self { n_spins, edges, kappa })
    }

    pub fn from_one_based(n_spins: usize, edges: &[(usize, usize)], kappa: f64) -> Result<Self> {
        if edges.iter().any(|&(i, j)| i == 0 || j == 0) {
            return Err(Error::InvalidParameter("1-based edge list contains 0".into()));
        }
        Self::new(n_spins, edges.iter().map(|&(i, j)| (i - 1, j - 1)).collect(), kappa)
    }

    /// Three-spin ring on the ordered triple `(i, j, k)`: edges `(i,j), (j,k), (k,i)`.
    pub fn ring(n_spins: usize, [i, j, k]: [usize; 3], kappa: f64) -> Result<Self> {
        if i == j || j == k || i == k {
            return Err(Error::InvalidParameter(format!("ring sites ({i}, {j}, {k}) not distinct")));
        }
        Self::new(n_spins, vec![(i, j), (j, k), (k, i)], kappa)
    }

    pub fn ring3(kappa: f64) -> Result<Self> {
        Self::ring(3, [0, 1, 2], kappa)
    }

    /// Four-spin cluster: two triangles sharing the 1-3 bond.
    pub fn four_spin(kappa: f64) -> Result<Self> {
        Self::from_one_based(4, &[(2, 1), (4, 1), (1, 3), (3, 2), (3, 4)], kappa)
    }

    /// Five-spin cluster: central spin 1 with four neighbours.
    pub fn five_spin(kappa: f64) -> Result<Self> {
        Self::from_one_based(5, &[(2, 1), (4, 1), (1, 3), (1, 5), (3, 2), (5, 2), (3, 4), (5, 4)], kappa)
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn space(&self) -> HilbertSpace {
        HilbertSpace::qubits(self.n_spins)
    }
}

/// `H = Σ_(i,j) (κ/4√3)(σˣ_i σʸ_j − σʸ_i σˣ_j)` on `n_spins` qubits.
pub fn asi_hamiltonian(spec: &SpinClusterSpec) -> Result<Operator> {
    let space = spec.space();
    let (x, y) = (pauli(Pauli::X), pauli(Pauli::Y));
    let mut acc = Operator::zeros(&space);
    for &(i, j) in spec.edges() {
        let xy = &embed(&space, i, &x)? * &embed(&space, j, &y)?;
        let yx = &embed(&space, i, &y)? * &embed(&space, j, &x)?;
        acc = &acc + &(&xy - &yx);
    }
    Operator::hermitian(space, acc.scale(c(spec.kappa() / (4.0 * sqrt3()))).into_matrix())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sz {
    /// `S_z = −1/2`: one spin up.
    MinusHalf,
    /// `S_z = +1/2`: one spin down.
    PlusHalf,
}

impl Sz {
    pub fn sign(self) -> f64 {
        match self {
            Sz::MinusHalf => -1.0,
            Sz::PlusHalf => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinWaveState {
    k: i8,
    sz: Sz,
}

impl SpinWaveState {
    pub fn new(k: i8, sz: Sz) -> Result<Self> {
        if !(-1..=1).contains(&k) {
            return Err(Error::InvalidParameter(format!("spin-wave momentum k = {k} not in {{-1, 0, 1}}")));
        }
        Ok(Self { k, sz })
    }

    pub fn k(self) -> i8 {
        self.k
    }

    pub fn sz(self) -> Sz {
        self.sz
    }

    /// `λ^±(k) = ±kκ/2` (rad/s).
    pub fn energy(self, kappa: f64) -> f64 {
        self.sz.sign() * f64::from(self.k) * kappa / 2.0
    }
}

/// `|k, S_z⟩` on three qubits: the minority spin sits on site `m` with
/// amplitude `e^{2ikmπ/3}/√3`.
pub fn spin_wave_state(s: SpinWaveState) -> StateVector {
    let space = HilbertSpace::qubits(3);
    let (minority, majority) = match s.sz {
        Sz::MinusHalf => (0, 1),
        Sz::PlusHalf => (1, 0),
    };
    let mut v = Vector::zeros(8);
    for m in 0..3 {
        let mut digits = [majority; 3];
        digits[m] = minority;
        let idx = space.index_of(&digits).expect("valid qubit digits");
        v[idx] = C64::from_polar(1.0, TAU * f64::from(s.k) * m as f64 / 3.0);
    }
    StateVector::new(space, v).expect("non-zero spin wave")
}

/// Group velocity `v_g^± = ±κ/2` (sites per radian of κt).
pub fn group_velocity(sz: Sz, kappa: f64) -> f64 {
    sz.sign() * kappa / 2.0
}

/// One chiral step, `T₀ = 2π/(3|v_g|) = 4π/3κ` (s).
pub fn chiral_step_time(kappa: f64) -> f64 {
    THETA / kappa
}

/// Unitary of the ordered three-spin chiral gate `exp(−iH_ijk T₀)` for a
/// ring on `(i, j, k)` in an `n_spins` register.
pub fn asi_gate_unitary(n_spins: usize, targets: [usize; 3]) -> Result<Operator> {
    // κ cancels against T₀ = θ/κ; use κ = 1.
    let spec = SpinClusterSpec::ring(n_spins, targets, 1.0)?;
    let h = asi_hamiltonian(&spec)?;
    let prop = crate::operator::EigenPropagator::new(&h)?;
    Operator::new(spec.space(), prop.unitary(chiral_step_time(1.0)))
}

/// `e^{−iC_zθ/2}`.
pub fn chiral_permutation(space: &HilbertSpace) -> Result<Operator> {
    let cz = chirality_z(space)?;
    let prop = crate::operator::EigenPropagator::new(&cz)?;
    Operator::new(space.clone(), prop.unitary(THETA / 2.0))
}
