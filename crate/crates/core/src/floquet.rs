//! Bessel-series effective couplings of frequency-modulated transmons and the
//! time-averaged Hamiltonians they produce.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::bessel::bessel_j_all;
use crate::chirality::{chiral_step_time, total_sz};
use crate::error::{Error, Result};
use crate::operator::{embed, pauli, HilbertSpace, Operator, Pauli, I};

/// Series cutoff: stop once `|term| < SERIES_TOL` or after `SERIES_MAX_TERMS`.
pub const SERIES_TOL: f64 = 1e-14;
pub const SERIES_MAX_TERMS: usize = 200;

/// `ω_j(t) = ω₀ + Δ cos(νt − φ_j + φ₀)`; all rates in rad/s.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulationSpec {
    omega0: f64,
    delta: f64,
    nu: f64,
    phases: Vec<f64>,
    phi0: f64,
}

impl ModulationSpec {
    pub fn new(omega0: f64, delta: f64, nu: f64, phases: Vec<f64>, phi0: f64) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::InvalidParameter(format!("modulation frequency must be positive, got {nu}")));
        }
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!("modulation amplitude must be non-negative, got {delta}")));
        }
        if !omega0.is_finite() || !phi0.is_finite() || phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("non-finite modulation parameter".into()));
        }
        Ok(Self { omega0, delta, nu, phases, phi0 })
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    /// Modulation index `f = Δ/ν`.
    pub fn f(&self) -> f64 {
        self.delta / self.nu
    }

    pub fn period(&self) -> f64 {
        TAU / self.nu
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveCouplings {
    pub g0: f64,
    pub beta: f64,
    pub kappa: f64,
    pub t0: f64,
}

/// `Σ_{n≥1} 2 J_n²(f) sin(nx)/n`, truncated per [`SERIES_TOL`].
fn sine_series(f: f64, x: f64) -> f64 {
    let j = bessel_j_all(SERIES_MAX_TERMS, f);
    let mut sum = 0.0;
    let mut small = 0;
    for n in 1..=SERIES_MAX_TERMS {
        let weight = 2.0 * j[n] * j[n] / n as f64;
        sum += weight * (n as f64 * x).sin();
        // sin can vanish by symmetry; stop on the Bessel weight instead
        if weight < SERIES_TOL {
            small += 1;
            if small >= 3 {
                break;
            }
        } else {
            small = 0;
        }
    }
    sum
}

/// `β(f) = Σ 2J_n²(f) sin(2nπ/3)/n`.
pub fn beta_coefficient(f: f64) -> f64 {
    sine_series(f, 2.0 * PI / 3.0)
}

/// Averaged qubit-resonator coupling `g J₀(f)`.
pub fn qubit_resonator_g0(g: f64, f: f64) -> f64 {
    g * bessel_j_all(0, f)[0]
}

/// Resonator-mediated exchange `Σ 2g² J_n²(f) sin(nΔφ)/(nν)`.
pub fn qubit_qubit_geff(g: f64, f: f64, nu: f64, delta_phi: f64) -> f64 {
    g * g / nu * sine_series(f, delta_phi)
}

/// `H_eff = Σ_{i<j} i g_eff(φ_j − φ_i)(σ_i⁺σ_j⁻ − σ_j⁺σ_i⁻)`.
///
/// A phase lead of 2π/3 on `j` relative to `i` reproduces a chiral edge
/// `(i, j)` of strength `κ = 2√3 g² β/ν`.
pub fn effective_cluster_hamiltonian(phases: &[f64], g: f64, f: f64, nu: f64) -> Result<Operator> {
    let n = phases.len();
    if n < 2 {
        return Err(Error::DimensionMismatch { expected: 2, actual: n });
    }
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("modulation frequency must be positive, got {nu}")));
    }
    let space = HilbertSpace::qubits(n);
    let (sp, sm) = (pauli(Pauli::Plus), pauli(Pauli::Minus));
    let plus: Vec<Operator> = (0..n).map(|j| embed(&space, j, &sp)).collect::<Result<_>>()?;
    let minus: Vec<Operator> = (0..n).map(|j| embed(&space, j, &sm)).collect::<Result<_>>()?;
    let mut h = Operator::zeros(&space);
    for i in 0..n {
        for j in i + 1..n {
            let geff = qubit_qubit_geff(g, f, nu, phases[j] - phases[i]);
            if geff == 0.0 {
                continue;
            }
            let hop = &(&plus[i] * &minus[j]) - &(&plus[j] * &minus[i]);
            h = &h + &hop.scale(I * geff);
        }
    }
    Operator::hermitian(space, h.into_matrix())
}

/// All averaged rates for bare coupling `g`, index `f`, frequency `ν`.
pub fn kappa_t0(g: f64, f: f64, nu: f64) -> EffectiveCouplings {
    let beta = beta_coefficient(f);
    let kappa = 2.0 * 3f64.sqrt() * g * g * beta / nu;
    EffectiveCouplings { g0: qubit_resonator_g0(g, f), beta, kappa, t0: chiral_step_time(kappa) }
}

/// `[H, S_z]` magnitude, used by the invariant suite.
pub fn excitation_leak(h: &Operator) -> Result<f64> {
    Ok(h.commutator(&total_sz(h.space())?)?.max_abs())
}
