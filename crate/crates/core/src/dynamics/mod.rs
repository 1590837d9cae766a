//! Time-dependent transmon-resonator dynamics: the modulated interaction
//! frame, Schrödinger and Lindblad integration, stroboscopic propagators.

mod device;
mod evolve;
mod hamiltonian;
mod integrate;
mod lindblad;

pub use device::{DeviceParams, QubitParams};
pub use evolve::{
    calibrate_kappa, evolve_schrodinger, gate_fidelity, label_probability, populations, propagate_columns, quasienergies, restrict_rows,
    stroboscopic_columns, BasisDiagonal, PopulationSeries, TimeSeries,
};
pub use hamiltonian::{format_label, parse_label, Hamiltonian, LabFrameHamiltonian, QubitDrive, Register, StaticHamiltonian};
pub use integrate::{IntegrationConfig, Method};
pub use lindblad::{evolve_lindblad, leakage, DephasingMode, LindbladModel, POSITIVITY_CLIP};
