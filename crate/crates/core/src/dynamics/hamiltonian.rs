use nalgebra::{DVectorView, DVectorViewMut};
use serde::{Deserialize, Serialize};

use super::device::DeviceParams;
use super::integrate::IntegrationConfig;
use crate::error::{Error, Result};
use crate::floquet::ModulationSpec;
use crate::operator::{boson_ops, c, transmon_lowering, transmon_number, HilbertSpace, LocalOp, Matrix, Operator, C64};

/// Qubits (2 or 3 levels each) optionally followed by one resonator mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub n_qubits: usize,
    pub levels: usize,
    pub n_fock: Option<usize>,
}

impl Register {
    pub fn qubits(n_qubits: usize) -> Self {
        Self { n_qubits, levels: 2, n_fock: None }
    }

    pub fn with_resonator(n_qubits: usize, levels: usize, n_fock: usize) -> Self {
        Self { n_qubits, levels, n_fock: Some(n_fock) }
    }

    pub fn from_config(n_qubits: usize, cfg: &IntegrationConfig) -> Self {
        Self::with_resonator(n_qubits, cfg.levels_per_qubit, cfg.fock_cutoff)
    }

    pub fn space(&self) -> Result<HilbertSpace> {
        if self.n_qubits == 0 || !(2..=3).contains(&self.levels) {
            return Err(Error::InvalidSpace(format!("register {self:?}")));
        }
        match self.n_fock {
            Some(n) => HilbertSpace::register_with_mode(self.n_qubits, self.levels, n),
            None => HilbertSpace::new(vec![self.levels; self.n_qubits]),
        }
    }

    pub fn resonator_site(&self) -> Option<usize> {
        self.n_fock.map(|_| self.n_qubits)
    }

    /// Basis indices whose qubit excitations plus photons equal `n`.
    pub fn excitation_sector(&self, n: usize) -> Result<Vec<usize>> {
        let space = self.space()?;
        Ok((0..space.dim())
            .filter(|&i| {
                let d = space.digits_of(i);
                let qubit: usize = d[..self.n_qubits].iter().map(|&x| excitation(x)).sum();
                let photons = if self.n_fock.is_some() { d[self.n_qubits] } else { 0 };
                qubit + photons == n
            })
            .collect())
    }

    /// Index of a qubit configuration with the resonator (if any) in vacuum.
    pub fn index_of_label(&self, label: &str) -> Result<usize> {
        let mut digits = parse_label(label, self.levels)?;
        if digits.len() != self.n_qubits {
            return Err(Error::BadLabel { label: label.into(), reason: format!("expected {} sites", self.n_qubits) });
        }
        if self.n_fock.is_some() {
            digits.push(0);
        }
        self.space()?.index_of(&digits)
    }
}

/// Excitation count of a transmon digit in the (e, g, f) ordering.
fn excitation(digit: usize) -> usize {
    match digit {
        0 => 1,
        1 => 0,
        _ => 2,
    }
}

/// Parses a configuration label: `u`/`↑` = excited, `d`/`↓` = ground, `f` = second excited.
pub fn parse_label(label: &str, levels: usize) -> Result<Vec<usize>> {
    if label.is_empty() {
        return Err(Error::BadLabel { label: label.into(), reason: "empty".into() });
    }
    label
        .chars()
        .map(|ch| match ch {
            'u' | 'U' | '↑' => Ok(0),
            'd' | 'D' | '↓' => Ok(1),
            'f' | 'F' if levels >= 3 => Ok(2),
            _ => Err(Error::BadLabel { label: label.into(), reason: format!("unexpected symbol {ch:?}") }),
        })
        .collect()
}

pub fn format_label(digits: &[usize]) -> String {
    digits.iter().map(|&d| ['u', 'd', 'f'][d.min(2)]).collect()
}

/// A possibly time-dependent Hamiltonian (rad/s) applied without forming
/// its dense matrix.
pub trait Hamiltonian: Sync {
    fn space(&self) -> &HilbertSpace;

    /// `out += coeff · H(t) x`.
    fn apply_add(&self, t: f64, coeff: C64, x: &[C64], out: &mut [C64]);

    fn period(&self) -> Option<f64>;

    /// The constant operator, when `H` does not depend on time.
    fn as_static(&self) -> Option<&Operator> {
        None
    }

    fn operator_at(&self, t: f64) -> Operator {
        let n = self.space().dim();
        let mut m = Matrix::zeros(n, n);
        let mut e = vec![c(0.0); n];
        for col in 0..n {
            e[col] = c(1.0);
            let mut out = vec![c(0.0); n];
            self.apply_add(t, c(1.0), &e, &mut out);
            m.set_column(col, &nalgebra::DVector::from_vec(out));
            e[col] = c(0.0);
        }
        Operator::new(self.space().clone(), m).expect("square by construction")
    }
}

#[derive(Clone, Debug)]
pub struct StaticHamiltonian {
    op: Operator,
}

impl StaticHamiltonian {
    pub fn new(op: Operator) -> Result<Self> {
        op.check_hermitian()?;
        Ok(Self { op })
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }
}

impl Hamiltonian for StaticHamiltonian {
    fn space(&self) -> &HilbertSpace {
        self.op.space()
    }

    fn apply_add(&self, _t: f64, coeff: C64, x: &[C64], out: &mut [C64]) {
        let n = x.len();
        let xv = DVectorView::from_slice(x, n);
        let mut ov = DVectorViewMut::from_slice(out, n);
        ov.gemv(coeff, self.op.matrix(), &xv, c(1.0));
    }

    fn period(&self) -> Option<f64> {
        None
    }

    fn as_static(&self) -> Option<&Operator> {
        Some(&self.op)
    }

    fn operator_at(&self, _t: f64) -> Operator {
        self.op.clone()
    }
}

/// Per-qubit parameters of the modulated frame (rad/s).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitDrive {
    pub coupling: f64,
    pub detuning: f64,
    pub anharmonicity: f64,
}

#[derive(Clone, Debug)]
struct DriveTerm {
    raise_photon: LocalOp,
    lower_photon: LocalOp,
    g: f64,
    phase: f64,
}

/// Transmons sharing one resonator, each frequency-modulated as
/// `Δ cos(νt − φ_j + φ₀)`, in the frame rotating with the resonator:
///
/// `H(t) = Σ_j [δ_j n_j + η_j |f⟩⟨f|_j] + Σ_j g_j (a† L_j e^{−iF_j(t)} + h.c.)`,
/// `F_j(t) = f sin(νt − φ_j + φ₀)`.
///
/// Inactive qubits (`None` drive) are parked far away: no coupling and no
/// energy in this frame.
#[derive(Clone, Debug)]
pub struct LabFrameHamiltonian {
    register: Register,
    space: HilbertSpace,
    diag: Vec<f64>,
    terms: Vec<DriveTerm>,
    f: f64,
    nu: f64,
    phi0: f64,
}

impl LabFrameHamiltonian {
    pub fn new(register: Register, modulation: &ModulationSpec, drives: &[Option<QubitDrive>]) -> Result<Self> {
        let res = register.resonator_site().ok_or_else(|| Error::InvalidSpace("modulated Hamiltonian needs a resonator".into()))?;
        if drives.len() != register.n_qubits {
            return Err(Error::DimensionMismatch { expected: register.n_qubits, actual: drives.len() });
        }
        if modulation.phases().len() != register.n_qubits {
            return Err(Error::DimensionMismatch { expected: register.n_qubits, actual: modulation.phases().len() });
        }
        let space = register.space()?;
        let (_, a_dag) = boson_ops(register.n_fock.unwrap_or(0))?;
        let lower = transmon_lowering(register.levels)?;
        let number = transmon_number(register.levels)?;
        let dims = space.dims().to_vec();
        let mut diag = vec![0.0; space.dim()];
        let mut terms = Vec::new();
        for (j, drive) in drives.iter().enumerate() {
            let Some(d) = drive else { continue };
            let stride = space.strides()[j];
            for (i, v) in diag.iter_mut().enumerate() {
                let digit = (i / stride) % dims[j];
                *v += d.detuning * number.matrix()[(digit, digit)].re;
                if digit == 2 {
                    *v += d.anharmonicity;
                }
            }
            let raise_photon = LocalOp::on_pair(&space, (res, &a_dag), (j, &lower))?;
            let lower_photon = raise_photon.adjoint();
            terms.push(DriveTerm { raise_photon, lower_photon, g: d.coupling, phase: modulation.phases()[j] });
        }
        Ok(Self { register, space, diag, terms, f: modulation.f(), nu: modulation.nu(), phi0: modulation.phi0() })
    }

    /// The ideal frame: every qubit active with coupling `g`, no detuning, two levels.
    pub fn uniform(n_qubits: usize, g: f64, modulation: &ModulationSpec, n_fock: usize) -> Result<Self> {
        let register = Register::with_resonator(n_qubits, 2, n_fock);
        let drive = QubitDrive { coupling: g, detuning: 0.0, anharmonicity: 0.0 };
        Self::new(register, modulation, &vec![Some(drive); n_qubits])
    }

    /// Device-calibrated frame; `wiring[j]` is the chip qubit used as register qubit `j`.
    pub fn from_device(
        dev: &DeviceParams,
        wiring: &[usize],
        active: &[bool],
        modulation: &ModulationSpec,
        cfg: &IntegrationConfig,
    ) -> Result<Self> {
        dev.validate()?;
        if active.len() != wiring.len() {
            return Err(Error::DimensionMismatch { expected: wiring.len(), actual: active.len() });
        }
        let drives = wiring
            .iter()
            .zip(active)
            .map(|(&q, &on)| {
                if !on {
                    return Ok(None);
                }
                Ok(Some(QubitDrive { coupling: dev.coupling(q)?, detuning: dev.detuning(), anharmonicity: dev.anharmonicity(q)? }))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(Register::from_config(wiring.len(), cfg), modulation, &drives)
    }

    pub fn register(&self) -> Register {
        self.register
    }

    /// Adds static frequency offsets `Σ_j ε_j n_j` (quasi-static noise samples).
    pub fn with_offsets(&self, offsets: &[f64]) -> Result<Self> {
        let mut out = self.clone();
        add_number_offsets(&self.space, offsets, &mut out.diag)?;
        Ok(out)
    }

    fn coefficient(&self, t: f64, phase: f64) -> C64 {
        C64::from_polar(1.0, -self.f * (self.nu * t - phase + self.phi0).sin())
    }
}

/// `diag += Σ_j ε_j n_j` over the leading `offsets.len()` transmon factors.
pub(crate) fn add_number_offsets(space: &HilbertSpace, offsets: &[f64], diag: &mut [f64]) -> Result<()> {
    let dims = space.dims();
    if offsets.len() > dims.len() {
        return Err(Error::DimensionMismatch { expected: dims.len(), actual: offsets.len() });
    }
    let strides = space.strides();
    for (j, &eps) in offsets.iter().enumerate() {
        if eps == 0.0 {
            continue;
        }
        for (i, v) in diag.iter_mut().enumerate() {
            *v += eps * excitation((i / strides[j]) % dims[j]) as f64;
        }
    }
    Ok(())
}

impl Hamiltonian for LabFrameHamiltonian {
    fn space(&self) -> &HilbertSpace {
        &self.space
    }

    fn apply_add(&self, t: f64, coeff: C64, x: &[C64], out: &mut [C64]) {
        for ((o, &xi), &d) in out.iter_mut().zip(x).zip(&self.diag) {
            if d != 0.0 {
                *o += coeff * d * xi;
            }
        }
        for term in &self.terms {
            let z = self.coefficient(t, term.phase) * term.g;
            term.raise_photon.apply_add(coeff * z, x, out);
            term.lower_photon.apply_add(coeff * z.conj(), x, out);
        }
    }

    fn period(&self) -> Option<f64> {
        Some(std::f64::consts::TAU / self.nu)
    }
}

/// Adds a static diagonal to another Hamiltonian.
pub(crate) struct Offset<'a> {
    pub inner: &'a dyn Hamiltonian,
    pub diag: Vec<f64>,
}

impl Hamiltonian for Offset<'_> {
    fn space(&self) -> &HilbertSpace {
        self.inner.space()
    }

    fn apply_add(&self, t: f64, coeff: C64, x: &[C64], out: &mut [C64]) {
        self.inner.apply_add(t, coeff, x, out);
        for ((o, &xi), &d) in out.iter_mut().zip(x).zip(&self.diag) {
            *o += coeff * d * xi;
        }
    }

    fn period(&self) -> Option<f64> {
        self.inner.period()
    }
}
