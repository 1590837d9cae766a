//! Shared fixtures for the criterion benches.

use std::f64::consts::TAU;

use asi_sim::dynamics::{IntegrationConfig, LabFrameHamiltonian, StaticHamiltonian};
use asi_sim::floquet::{effective_cluster_hamiltonian, ModulationSpec};
use asi_sim::operator::{DensityMatrix, StateVector};
use asi_sim::units::mhz;

pub const G_MHZ: f64 = 20.0;
pub const DELTA_MHZ: f64 = 235.0;
pub const NU_MHZ: f64 = 98.8;

/// Phases that make three qubits circulate one excitation.
pub fn chiral_phases(n: usize) -> Vec<f64> {
    (0..n).map(|j| j as f64 * TAU / 3.0).collect()
}

pub fn modulation(n: usize) -> ModulationSpec {
    ModulationSpec::new(0.0, mhz(DELTA_MHZ), mhz(NU_MHZ), chiral_phases(n), 0.0).expect("valid modulation")
}

/// Ideal-frame lab Hamiltonian: `n` qubits on a resonator truncated at `n_fock`.
pub fn lab_frame(n: usize, n_fock: usize) -> LabFrameHamiltonian {
    LabFrameHamiltonian::uniform(n, mhz(G_MHZ), &modulation(n), n_fock).expect("valid Hamiltonian")
}

pub fn effective(n: usize) -> StaticHamiltonian {
    let op = effective_cluster_hamiltonian(&chiral_phases(n), mhz(G_MHZ), DELTA_MHZ / NU_MHZ, mhz(NU_MHZ)).expect("valid cluster");
    StaticHamiltonian::new(op).expect("Hermitian")
}

/// First qubit excited, everything else (including the resonator) in its ground state.
pub fn first_excited(h: &dyn asi_sim::dynamics::Hamiltonian) -> StateVector {
    let dims = h.space().dims().to_vec();
    let mut digits = vec![1; dims.len()];
    digits[0] = 0;
    if dims.len() > 1 && *dims.last().unwrap() > 2 {
        *digits.last_mut().unwrap() = 0;
    }
    StateVector::basis(h.space(), &digits).expect("basis state")
}

pub fn first_excited_density(h: &dyn asi_sim::dynamics::Hamiltonian) -> DensityMatrix {
    first_excited(h).to_density()
}

pub fn grid(duration: f64, samples: usize) -> Vec<f64> {
    (0..samples).map(|k| duration * k as f64 / (samples - 1) as f64).collect()
}

pub fn integration() -> IntegrationConfig {
    IntegrationConfig::default()
}
