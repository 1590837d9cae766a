//! Simulation of Floquet-synthesized antisymmetric spin exchange
//! (Dzyaloshinskii-Moriya interaction) in a transmon-resonator circuit.
//!
//! The crate is layered bottom-up:
//!
//! * [`operator`] : dense complex operators and states on tensor-product spaces
//! * [`chirality`] : chirality operators, the three-spin chiral Hamiltonian and
//!   its cluster generalizations, spin-wave predictions
//! * [`bessel`], [`floquet`] : Bessel-series effective couplings and
//!   time-averaged Hamiltonians
//! * [`dynamics`] : lab-frame modulated Hamiltonian, Schrödinger and Lindblad
//!   integrators, device parameters
//! * [`scenarios`] : named experiment scenarios, coupling sweeps and GHZ circuits
//! * [`validate`] : the invariant suite behind `asi-sim validate`

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bessel;
pub mod chirality;
pub mod dynamics;
pub mod error;
pub mod floquet;
pub mod operator;
pub mod scenarios;
pub mod units;
pub mod validate;

pub use error::{Error, Result};
pub use operator::{DensityMatrix, HilbertSpace, Operator, StateVector};
