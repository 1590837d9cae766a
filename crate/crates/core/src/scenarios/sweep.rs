//! Vacuum-Rabi and qubit-qubit coupling sweeps on the full modulated Hamiltonian,
//! evaluated stroboscopically from one-period propagators.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::analysis::{dominant_frequency, DECOUPLED_MHZ};
use crate::dynamics::{propagate_columns, quasienergies, restrict_rows, IntegrationConfig, LabFrameHamiltonian, Register};
use crate::error::{Error, Result};
use crate::floquet::{qubit_qubit_geff, qubit_resonator_g0, ModulationSpec};
use crate::operator::{Matrix, Vector};
use crate::units::{mhz, to_mhz};

/// Environment variable capping sweep parallelism.
pub const THREADS_ENV: &str = "ASI_SIM_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    /// Single qubit vs ν: vacuum-Rabi rate `g₀`.
    Nu,
    /// Two qubits vs phase difference: swap rate `2g_eff`.
    Dphi,
}

/// Fixed parameters of a sweep; the swept coordinate overrides `nu_mhz` or `delta_phi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSetup {
    pub delta_mhz: f64,
    pub nu_mhz: f64,
    pub g_mhz: f64,
    pub delta_phi: f64,
    pub phi0: f64,
    /// Observation window (ns), sampled once per modulation period.
    pub window_ns: f64,
    pub integration: IntegrationConfig,
}

impl Default for SweepSetup {
    fn default() -> Self {
        Self {
            delta_mhz: 235.0,
            nu_mhz: 100.0,
            g_mhz: 20.0,
            delta_phi: TAU / 3.0,
            phi0: std::f64::consts::PI / 3.0,
            window_ns: 5000.0,
            integration: IntegrationConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// ν/2π (MHz) or Δφ (rad).
    pub x: f64,
    /// Extracted rate (MHz); `None` when decoupled.
    pub extracted_mhz: Option<f64>,
    /// Extracted rate before the decoupling threshold is applied.
    pub raw_mhz: f64,
    /// Second-order prediction (MHz).
    pub analytic_mhz: f64,
    /// Largest population moved out of the initial configuration.
    pub contrast: f64,
}

/// Runs `f` inside a pool limited by `ASI_SIM_THREADS` when set.
pub fn with_thread_limit<R: Send>(f: impl FnOnce() -> R + Send) -> Result<R> {
    match std::env::var(THREADS_ENV).ok().map(|v| v.trim().parse::<usize>()) {
        None => Ok(f()),
        Some(Ok(n)) if n > 0 => {
            let pool =
                rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        Some(_) => Err(Error::InvalidParameter(format!("{THREADS_ENV} must be a positive integer"))),
    }
}

struct Sector {
    h: LabFrameHamiltonian,
    states: Vec<usize>,
}

fn sector(n_qubits: usize, setup: &SweepSetup, nu_mhz: f64, phases: Vec<f64>) -> Result<Sector> {
    let nu = mhz(nu_mhz);
    let m = ModulationSpec::new(0.0, mhz(setup.delta_mhz), nu, phases, setup.phi0)?;
    let reg = Register::with_resonator(n_qubits, setup.integration.levels_per_qubit, setup.integration.fock_cutoff);
    let h = LabFrameHamiltonian::new(
        reg,
        &m,
        &vec![Some(crate::dynamics::QubitDrive { coupling: mhz(setup.g_mhz), detuning: 0.0, anharmonicity: 0.0 }); n_qubits],
    )?;
    let states = reg.excitation_sector(1)?;
    Ok(Sector { h, states })
}

impl Sector {
    fn period(&self) -> f64 {
        use crate::dynamics::Hamiltonian;
        self.h.period().expect("modulated frame is periodic")
    }

    fn one_period(&self, cfg: &IntegrationConfig) -> Result<Matrix> {
        let cols = propagate_columns(&self.h, &self.states, 0.0, self.period(), cfg)?;
        Ok(restrict_rows(&cols, &self.states))
    }

    fn local(&self, label: &str) -> Result<usize> {
        let idx = self.h.register().index_of_label(label)?;
        self.states
            .iter()
            .position(|&s| s == idx)
            .ok_or_else(|| Error::BadLabel { label: label.into(), reason: "not in the one-excitation sector".into() })
    }
}

/// Stroboscopic populations `|⟨k|Uⁿ|start⟩|²` for `n = 0..=periods`.
fn stroboscopic(u: &Matrix, start: usize, periods: usize) -> Vec<Vector> {
    let mut v = Vector::zeros(u.nrows());
    v[start] = crate::operator::c(1.0);
    let mut out = Vec::with_capacity(periods + 1);
    out.push(v.clone());
    for _ in 0..periods {
        v = u * v;
        out.push(v.clone());
    }
    out
}

fn extract(period: f64, trace: &[f64]) -> Result<(Option<f64>, f64)> {
    let raw = to_mhz(TAU * dominant_frequency(period, trace)?);
    let swing = super::analysis::swing(trace);
    Ok((if raw < DECOUPLED_MHZ || swing < 1e-3 { None } else { Some(raw) }, raw))
}

fn nu_point(setup: &SweepSetup, nu_mhz: f64) -> Result<SweepPoint> {
    let s = sector(1, setup, nu_mhz, vec![0.0])?;
    let u = s.one_period(&setup.integration)?;
    let up = s.local("u")?;
    let periods = (setup.window_ns * 1e-9 / s.period()).round() as usize;
    let p_up: Vec<f64> = stroboscopic(&u, up, periods).iter().map(|v| v[up].norm_sqr()).collect();
    // P↑ = cos²(g₀t) oscillates at 2g₀
    let (ext, raw) = extract(s.period(), &p_up)?;
    let f = setup.delta_mhz / nu_mhz;
    Ok(SweepPoint {
        x: nu_mhz,
        extracted_mhz: ext.map(|r| r / 2.0),
        raw_mhz: raw / 2.0,
        analytic_mhz: qubit_resonator_g0(setup.g_mhz, f).abs(),
        contrast: 1.0 - p_up.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

fn dphi_point(setup: &SweepSetup, dphi: f64) -> Result<SweepPoint> {
    let s = sector(2, setup, setup.nu_mhz, vec![0.0, dphi])?;
    let u = s.one_period(&setup.integration)?;
    let (ud, du) = (s.local("ud")?, s.local("du")?);
    let periods = (setup.window_ns * 1e-9 / s.period()).round() as usize;
    let states = stroboscopic(&u, ud, periods);
    let p_ud: Vec<f64> = states.iter().map(|v| v[ud].norm_sqr()).collect();
    let p_du: Vec<f64> = states.iter().map(|v| v[du].norm_sqr()).collect();
    let (ext, raw) = extract(s.period(), &p_ud)?;
    let f = setup.delta_mhz / setup.nu_mhz;
    Ok(SweepPoint {
        x: dphi,
        extracted_mhz: ext,
        raw_mhz: raw,
        analytic_mhz: 2.0 * qubit_qubit_geff(setup.g_mhz, f, setup.nu_mhz, dphi).abs(),
        contrast: p_du.iter().copied().fold(0.0, f64::max),
    })
}

/// Evaluates every grid point (in parallel, merged in grid order).
pub fn run_coupling_sweep(kind: SweepKind, grid: &[f64], setup: &SweepSetup) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("sweep grid is empty".into()));
    }
    setup.integration.validate()?;
    let check = |x: f64| match kind {
        SweepKind::Nu => (80.0..=130.0).contains(&x),
        SweepKind::Dphi => (-std::f64::consts::PI - 1e-12..=std::f64::consts::PI + 1e-12).contains(&x),
    };
    if let Some(bad) = grid.iter().find(|&&x| !check(x)) {
        return Err(Error::InvalidParameter(format!("grid point {bad} outside the supported range")));
    }
    with_thread_limit(|| {
        grid.par_iter()
            .map(|&x| match kind {
                SweepKind::Nu => nu_point(setup, x),
                SweepKind::Dphi => dphi_point(setup, x),
            })
            .collect::<Result<Vec<_>>>()
    })?
}

/// Grid point with the smallest raw extracted rate.
pub fn sweep_minimum(points: &[SweepPoint]) -> Option<&SweepPoint> {
    points.iter().min_by(|a, b| a.raw_mhz.total_cmp(&b.raw_mhz))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecouplingTarget {
    SingleQubit,
    /// Two qubits with equal modulation phases: the bright state couples with `√2 g₀`.
    InPhasePair,
}

/// Splitting (rad/s) of the quasienergies that the resonator coupling opens.
fn coupling_splitting(target: DecouplingTarget, setup: &SweepSetup, nu_mhz: f64) -> Result<f64> {
    let (n, phases) = match target {
        DecouplingTarget::SingleQubit => (1, vec![0.0]),
        DecouplingTarget::InPhasePair => (2, vec![0.0, 0.0]),
    };
    let s = sector(n, setup, nu_mhz, phases)?;
    let u = s.one_period(&setup.integration)?;
    let period = s.period();
    match target {
        DecouplingTarget::SingleQubit => {
            let eps = quasienergies(&u, period)?;
            Ok(eps[eps.len() - 1] - eps[0])
        }
        DecouplingTarget::InPhasePair => {
            // project out the exactly dark antisymmetric state
            let photon_index = s.h.register().space()?.index_of(&[1, 1, 1])?;
            let photon = s.states.iter().position(|&i| i == photon_index).expect("|dd,1⟩ is in the sector");
            let (ud, du) = (s.local("ud")?, s.local("du")?);
            let r = std::f64::consts::FRAC_1_SQRT_2;
            let mut basis = Matrix::zeros(3, 2);
            basis[(ud, 0)] = crate::operator::c(r);
            basis[(du, 0)] = crate::operator::c(r);
            basis[(photon, 1)] = crate::operator::c(1.0);
            let block = basis.adjoint() * &u * &basis;
            let eps = quasienergies(&block, period)?;
            Ok(eps[1] - eps[0])
        }
    }
}

/// Modulation frequency (MHz) inside `[lo, hi]` minimizing the resonator
/// coupling of the target, by golden-section search.
pub fn calibrate_decoupling(target: DecouplingTarget, setup: &SweepSetup, lo: f64, hi: f64) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::InvalidParameter(format!("empty bracket [{lo}, {hi}]")));
    }
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = coupling_splitting(target, setup, x1)?;
    let mut f2 = coupling_splitting(target, setup, x2)?;
    while b - a > 1e-5 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = coupling_splitting(target, setup, x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = coupling_splitting(target, setup, x2)?;
        }
    }
    Ok(0.5 * (a + b))
}
