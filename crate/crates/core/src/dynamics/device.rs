use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{ghz, mhz, us};

/// One transmon's calibration, in configuration units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitParams {
    /// Idle frequency / 2π (GHz).
    pub idle_ghz: f64,
    /// Anharmonicity / 2π (MHz), negative for transmons.
    pub anharmonicity_mhz: f64,
    /// Qubit-resonator coupling / 2π (MHz), measured on resonance.
    pub coupling_mhz: f64,
    pub t1_us: f64,
    /// Gaussian dephasing time.
    pub t2_star_us: f64,
}

/// Chip parameters plus the fitted corrections used by full simulations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceParams {
    pub qubits: Vec<QubitParams>,
    pub resonator_ghz: f64,
    pub resonator_t1_us: f64,
    /// `g′ = coupling_scale · g`.
    pub coupling_scale: f64,
    /// Static qubit-resonator detuning `δ/2π` during modulation (MHz).
    pub detuning_mhz: f64,
    /// Global modulation phase `φ₀` (rad).
    pub phi0: f64,
}

fn q(idle_ghz: f64, anharmonicity_mhz: f64, coupling_mhz: f64, t1_us: f64, t2_star_us: f64) -> QubitParams {
    QubitParams { idle_ghz, anharmonicity_mhz, coupling_mhz, t1_us, t2_star_us }
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self {
            qubits: vec![
                q(5.204, -245.0, 20.9, 20.2, 1.1),
                q(5.897, -242.0, 20.6, 10.2, 4.3),
                q(5.287, -245.0, 20.1, 18.9, 1.3),
                q(5.253, -243.0, 18.8, 19.2, 0.7),
                q(5.341, -244.0, 19.8, 13.9, 1.7),
            ],
            resonator_ghz: 5.585,
            resonator_t1_us: 13.0,
            coupling_scale: 1.03,
            detuning_mhz: -3.5,
            phi0: PI / 3.0,
        }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        if self.qubits.is_empty() {
            return Err(Error::InvalidParameter("device has no qubits".into()));
        }
        for (j, p) in self.qubits.iter().enumerate() {
            let name = j + 1;
            if !(p.t1_us > 0.0) || !(p.t2_star_us > 0.0) {
                return Err(Error::InvalidParameter(format!("Q{name}: T1 and T2* must be positive")));
            }
            if !(p.anharmonicity_mhz.abs() > 0.0) || !p.anharmonicity_mhz.is_finite() {
                return Err(Error::InvalidParameter(format!("Q{name}: anharmonicity must be non-zero")));
            }
            if !(p.coupling_mhz > 0.0) || !p.idle_ghz.is_finite() {
                return Err(Error::InvalidParameter(format!("Q{name}: coupling must be positive")));
            }
        }
        if !(self.resonator_t1_us > 0.0) || !(self.coupling_scale > 0.0) {
            return Err(Error::InvalidParameter("resonator T1 and coupling scale must be positive".into()));
        }
        if !self.detuning_mhz.is_finite() || !self.phi0.is_finite() || !self.resonator_ghz.is_finite() {
            return Err(Error::InvalidParameter("non-finite device parameter".into()));
        }
        Ok(())
    }

    pub fn qubit(&self, j: usize) -> Result<&QubitParams> {
        self.qubits.get(j).ok_or(Error::SiteOutOfRange { index: j, len: self.qubits.len() })
    }

    /// Fitted coupling `g′_j` (rad/s).
    pub fn coupling(&self, j: usize) -> Result<f64> {
        Ok(mhz(self.qubit(j)?.coupling_mhz) * self.coupling_scale)
    }

    pub fn anharmonicity(&self, j: usize) -> Result<f64> {
        Ok(mhz(self.qubit(j)?.anharmonicity_mhz))
    }

    pub fn detuning(&self) -> f64 {
        mhz(self.detuning_mhz)
    }

    pub fn resonator_frequency(&self) -> f64 {
        ghz(self.resonator_ghz)
    }

    pub fn relaxation_rate(&self, j: usize) -> Result<f64> {
        Ok(1.0 / us(self.qubit(j)?.t1_us))
    }

    /// Markovian pure-dephasing rate `max(0, 1/T₂* − 1/2T₁)`.
    pub fn dephasing_rate(&self, j: usize) -> Result<f64> {
        let p = self.qubit(j)?;
        Ok((1.0 / us(p.t2_star_us) - 0.5 / us(p.t1_us)).max(0.0))
    }

    /// Standard deviation of the quasi-static frequency offset, `√2/T₂*` (rad/s).
    pub fn static_offset_sigma(&self, j: usize) -> Result<f64> {
        Ok(2f64.sqrt() / us(self.qubit(j)?.t2_star_us))
    }

    pub fn resonator_decay_rate(&self) -> f64 {
        1.0 / us(self.resonator_t1_us)
    }
}
