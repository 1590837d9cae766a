//! Named reconstructions of the chiral-dynamics experiments, the coupling
//! sweeps and the GHZ circuits.
//!
//! Every scenario can run on three engines: the time-averaged cluster
//! Hamiltonian, the full modulated qubit-resonator Hamiltonian, and the
//! latter with device decoherence.

mod analysis;
mod gates;
mod sweep;

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use analysis::{dominant_frequency, first_peak, smooth, swing, visit_order, Peak, DECOUPLED_MHZ};
pub use gates::{apply_gate, apply_gate_density, gate_operator, ghz_fidelity, GateKind, GateOp, GhzReport, GHZ_THRESHOLD};
pub use sweep::{
    calibrate_decoupling, run_coupling_sweep, sweep_minimum, with_thread_limit, DecouplingTarget, SweepKind, SweepPoint, SweepSetup,
    THREADS_ENV,
};

use crate::chirality::{asi_hamiltonian, SpinClusterSpec, THETA};
use crate::dynamics::{
    calibrate_kappa, evolve_lindblad, evolve_schrodinger, leakage, populations, DephasingMode, DeviceParams, Hamiltonian,
    IntegrationConfig, LabFrameHamiltonian, LindbladModel, PopulationSeries, Register, StaticHamiltonian, TimeSeries,
};
use crate::error::{Error, Result};
use crate::floquet::{effective_cluster_hamiltonian, kappa_t0, qubit_qubit_geff, qubit_resonator_g0, ModulationSpec};
use crate::operator::{boson_ops, c, embed, transmon_lowering, DensityMatrix, HilbertSpace, Operator, StateVector};
use crate::units::{mhz, ns, to_mhz, to_ns};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    Fig2a,
    Fig2b,
    #[serde(rename = "fig3_4spin_up")]
    Fig3FourSpinUp,
    #[serde(rename = "fig3_4spin_down")]
    Fig3FourSpinDown,
    #[serde(rename = "fig3_5spin")]
    Fig3FiveSpin,
    #[serde(rename = "figS1")]
    FigS1,
    #[serde(rename = "figS2")]
    FigS2,
    Ghz3,
    Ghz5,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 9] = [
        Self::Fig2a,
        Self::Fig2b,
        Self::Fig3FourSpinUp,
        Self::Fig3FourSpinDown,
        Self::Fig3FiveSpin,
        Self::FigS1,
        Self::FigS2,
        Self::Ghz3,
        Self::Ghz5,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Fig2a => "fig2a",
            Self::Fig2b => "fig2b",
            Self::Fig3FourSpinUp => "fig3_4spin_up",
            Self::Fig3FourSpinDown => "fig3_4spin_down",
            Self::Fig3FiveSpin => "fig3_5spin",
            Self::FigS1 => "figS1",
            Self::FigS2 => "figS2",
            Self::Ghz3 => "ghz3",
            Self::Ghz5 => "ghz5",
        }
    }

    pub fn names() -> Vec<&'static str> {
        Self::ALL.iter().map(|n| n.as_str()).collect()
    }

    fn is_ghz(self) -> bool {
        matches!(self, Self::Ghz3 | Self::Ghz5)
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scenario {s:?}; valid names: {}", Self::names().join(", "))))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Engine {
    /// Time-averaged spin Hamiltonian, qubits only.
    #[serde(rename = "effective")]
    Effective,
    /// Modulated qubit-resonator Hamiltonian with device parameters.
    #[serde(rename = "full")]
    Full,
    /// As `Full`, plus relaxation and dephasing.
    #[serde(rename = "full+lindblad", alias = "lindblad")]
    FullLindblad,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Effective => "effective",
            Self::Full => "full",
            Self::FullLindblad => "full+lindblad",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "effective" => Ok(Self::Effective),
            "full" => Ok(Self::Full),
            "full+lindblad" | "lindblad" => Ok(Self::FullLindblad),
            _ => Err(Error::InvalidParameter(format!("unknown engine {s:?}; valid: effective, full, lindblad"))),
        }
    }
}

/// Modulation settings in configuration units (MHz, /2π convention).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveParams {
    /// Modulation amplitude Δ/2π.
    pub delta_mhz: f64,
    /// Modulation frequency ν/2π.
    pub nu_mhz: f64,
    /// Uniform coupling g/2π used by the effective engine.
    pub g_mhz: f64,
}

impl Default for DriveParams {
    fn default() -> Self {
        Self { delta_mhz: 235.0, nu_mhz: 98.8, g_mhz: 20.0 }
    }
}

impl DriveParams {
    pub fn f(&self) -> f64 {
        self.delta_mhz / self.nu_mhz
    }

    fn validate(&self) -> Result<()> {
        if !(self.nu_mhz > 0.0) || !(self.delta_mhz >= 0.0) || !(self.g_mhz > 0.0) {
            return Err(Error::InvalidParameter(format!("drive parameters out of range: {self:?}")));
        }
        Ok(())
    }

    fn modulation(&self, phases: Vec<f64>, phi0: f64) -> Result<ModulationSpec> {
        ModulationSpec::new(0.0, mhz(self.delta_mhz), mhz(self.nu_mhz), phases, phi0)
    }
}

/// A named set of configurations whose summed population is tracked.
type SiteGroup = (&'static str, Vec<&'static str>);

/// A fully specified scenario run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: ScenarioName,
    pub engine: Engine,
    pub drive: DriveParams,
    pub device: DeviceParams,
    pub integration: IntegrationConfig,
    pub dephasing: DephasingMode,
    /// Simulated time; `None` picks the scenario default (three chiral steps
    /// for cluster runs).
    pub duration_ns: Option<f64>,
    pub samples: usize,
    /// Two-qubit phase difference for `figS2` (rad).
    pub delta_phi: f64,
}

impl ScenarioSpec {
    pub fn preset(name: ScenarioName, engine: Engine) -> Self {
        let mut integration = IntegrationConfig::default();
        let mut drive = DriveParams::default();
        let mut samples = 301;
        match name {
            // three excitations in the resonator's reach
            ScenarioName::Fig3FourSpinDown => integration.fock_cutoff = 7,
            ScenarioName::Ghz3 => {
                integration.levels_per_qubit = 3;
                integration.fock_cutoff = 4;
            }
            ScenarioName::Ghz5 => integration.fock_cutoff = 4,
            ScenarioName::FigS1 => {
                drive.nu_mhz = 95.0;
                samples = 401;
            }
            ScenarioName::FigS2 => {
                drive.nu_mhz = 100.0;
                samples = 201;
            }
            _ => {}
        }
        Self {
            name,
            engine,
            drive,
            device: DeviceParams::default(),
            integration,
            dephasing: DephasingMode::Markovian,
            duration_ns: None,
            samples,
            delta_phi: TAU / 3.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.drive.validate()?;
        self.device.validate()?;
        self.integration.validate()?;
        if self.samples < 2 && !self.name.is_ghz() {
            return Err(Error::InvalidParameter("at least two samples are needed".into()));
        }
        if let Some(d) = self.duration_ns {
            if !(d > 0.0) {
                return Err(Error::InvalidParameter(format!("duration must be positive, got {d} ns")));
            }
        }
        Ok(())
    }

    /// Chip qubits (0-based Table rows) used as register sites.
    pub fn wiring(&self) -> Vec<usize> {
        match self.name {
            ScenarioName::Fig2a | ScenarioName::Fig2b => vec![3, 1, 0],
            ScenarioName::Fig3FourSpinUp | ScenarioName::Fig3FourSpinDown => vec![0, 1, 2, 3],
            ScenarioName::Fig3FiveSpin => vec![0, 1, 2, 3, 4],
            ScenarioName::FigS1 => vec![1],
            ScenarioName::FigS2 => vec![0, 1],
            ScenarioName::Ghz3 => vec![0, 1, 3],
            ScenarioName::Ghz5 => vec![0, 3, 1, 2, 4],
        }
    }

    fn modulation_phases(&self) -> Vec<f64> {
        let a = TAU / 3.0;
        match self.name {
            ScenarioName::Fig2a | ScenarioName::Fig2b => vec![0.0, a, 2.0 * a],
            ScenarioName::Fig3FourSpinUp | ScenarioName::Fig3FourSpinDown => vec![0.0, -a, a, -a],
            ScenarioName::Fig3FiveSpin => vec![0.0, -a, a, -a, a],
            ScenarioName::FigS1 => vec![0.0],
            ScenarioName::FigS2 => vec![0.0, self.delta_phi],
            ScenarioName::Ghz3 | ScenarioName::Ghz5 => vec![0.0; self.wiring().len()],
        }
    }

    fn cluster(&self, kappa: f64) -> Result<SpinClusterSpec> {
        match self.name {
            ScenarioName::Fig2a | ScenarioName::Fig2b => SpinClusterSpec::ring3(kappa),
            ScenarioName::Fig3FourSpinUp | ScenarioName::Fig3FourSpinDown => SpinClusterSpec::four_spin(kappa),
            ScenarioName::Fig3FiveSpin => SpinClusterSpec::five_spin(kappa),
            other => Err(Error::InvalidParameter(format!("{other} is not a cluster scenario"))),
        }
    }

    /// Initial configuration, tracked configurations and the site groups
    /// whose visit order is reported.
    fn cluster_layout(&self) -> (&'static str, Vec<&'static str>, Vec<SiteGroup>) {
        match self.name {
            ScenarioName::Fig2a => ("udd", vec!["udd", "ddu", "dud"], vec![("1", vec!["udd"]), ("2", vec!["dud"]), ("3", vec!["ddu"])]),
            ScenarioName::Fig2b => ("duu", vec!["duu", "udu", "uud"], vec![("1", vec!["duu"]), ("2", vec!["udu"]), ("3", vec!["uud"])]),
            ScenarioName::Fig3FourSpinUp => (
                "uddd",
                vec!["uddd", "dudd", "ddud", "dddu"],
                vec![("1", vec!["uddd"]), ("2+4", vec!["dudd", "dddu"]), ("3", vec!["ddud"])],
            ),
            ScenarioName::Fig3FourSpinDown => (
                "duuu",
                vec!["duuu", "uduu", "uudu", "uuud"],
                vec![("1", vec!["duuu"]), ("2+4", vec!["uduu", "uuud"]), ("3", vec!["uudu"])],
            ),
            ScenarioName::Fig3FiveSpin => (
                "udddd",
                vec!["udddd", "duddd", "ddudd", "dddud", "ddddu"],
                vec![("1", vec!["udddd"]), ("2+4", vec!["duddd", "dddud"]), ("3+5", vec!["ddudd", "ddddu"])],
            ),
            _ => unreachable!("cluster layouts exist for cluster scenarios only"),
        }
    }
}

/// An extracted oscillation rate next to its second-order prediction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub name: String,
    /// `None` when below the decoupling threshold.
    pub extracted_mhz: Option<f64>,
    pub raw_mhz: f64,
    pub analytic_mhz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario: ScenarioName,
    pub engine: Engine,
    /// Chiral rate κ/2π (analytic for the effective engine, calibrated otherwise).
    pub kappa_mhz: Option<f64>,
    pub t0_ns: Option<f64>,
    pub peaks: Vec<Peak>,
    /// Site groups in the order they are visited.
    pub order: Vec<String>,
    pub rates: Vec<RateEstimate>,
    pub ghz: Option<GhzReport>,
    /// Largest population outside the qubit subspace over the run.
    pub leakage: Option<f64>,
    pub parameters: ScenarioSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutput {
    pub populations: PopulationSeries,
    pub summary: ScenarioSummary,
}

fn uniform_grid(duration: f64, samples: usize) -> Vec<f64> {
    let step = duration / (samples - 1) as f64;
    (0..samples).map(|k| k as f64 * step).collect()
}

/// Populations of a full-engine run, either pure or mixed.
enum Trajectory {
    Pure(TimeSeries<StateVector>),
    Mixed(TimeSeries<DensityMatrix>),
}

impl Trajectory {
    fn populations(&self, labels: &[&str]) -> Result<PopulationSeries> {
        match self {
            Self::Pure(s) => populations(s, labels),
            Self::Mixed(s) => populations(s, labels),
        }
    }

    fn max_leakage(&self, n_qubits: usize) -> f64 {
        let rhos: Vec<f64> = match self {
            Self::Pure(s) => s.samples.iter().map(|p| leakage(&p.to_density(), n_qubits)).collect(),
            Self::Mixed(s) => s.samples.iter().map(|r| leakage(r, n_qubits)).collect(),
        };
        rhos.into_iter().fold(0.0, f64::max)
    }
}

fn run_full(spec: &ScenarioSpec, h: &dyn Hamiltonian, psi0: &StateVector, grid: &[f64]) -> Result<Trajectory> {
    match spec.engine {
        Engine::Full => Ok(Trajectory::Pure(evolve_schrodinger(h, psi0, grid, &spec.integration)?)),
        Engine::FullLindblad => {
            let mut model = LindbladModel::from_device(&spec.device, &spec.wiring(), spec.dephasing)?;
            if let DephasingMode::QuasiStatic { samples, .. } = spec.dephasing {
                if samples == 0 {
                    return Err(Error::InvalidParameter("quasi-static mode needs at least one sample".into()));
                }
            }
            model.mode = spec.dephasing;
            Ok(Trajectory::Mixed(evolve_lindblad(h, &psi0.to_density(), grid, &model, &spec.integration)?))
        }
        Engine::Effective => unreachable!("effective runs do not use the full engine"),
    }
}

/// Single-excitation indices (resonator empty) of three register sites.
fn ring_sector(register: &Register, sites: [usize; 3]) -> Result<[usize; 3]> {
    let mut out = [0; 3];
    for (slot, &s) in out.iter_mut().zip(&sites) {
        let label: String = (0..register.n_qubits).map(|q| if q == s { 'u' } else { 'd' }).collect();
        *slot = register.index_of_label(&label)?;
    }
    Ok(out)
}

/// One-period quasienergy spread of a three-site ring of the full model.
fn calibrated_kappa(spec: &ScenarioSpec, wiring: &[usize], phases: Vec<f64>) -> Result<f64> {
    let m = spec.drive.modulation(phases, spec.device.phi0)?;
    let h = LabFrameHamiltonian::from_device(&spec.device, wiring, &[true; 3], &m, &spec.integration)?;
    calibrate_kappa(&h, &ring_sector(&h.register(), [0, 1, 2])?, &spec.integration)
}

pub fn run_scenario(spec: &ScenarioSpec) -> Result<ScenarioOutput> {
    spec.validate().map_err(|e| e.in_scenario(spec.name.as_str()))?;
    let out = match spec.name {
        ScenarioName::FigS1 | ScenarioName::FigS2 => run_coupling_scenario(spec),
        ScenarioName::Ghz3 | ScenarioName::Ghz5 => run_ghz(spec).map(|g| ScenarioOutput { populations: g.stages, summary: g.summary }),
        _ => run_cluster(spec),
    };
    out.map_err(|e| e.in_scenario(spec.name.as_str()))
}

fn run_cluster(spec: &ScenarioSpec) -> Result<ScenarioOutput> {
    let (initial, labels, groups) = spec.cluster_layout();
    let wiring = spec.wiring();
    let n = wiring.len();

    let (kappa, series, leak) = match spec.engine {
        Engine::Effective => {
            let kappa = kappa_t0(mhz(spec.drive.g_mhz), spec.drive.f(), mhz(spec.drive.nu_mhz)).kappa;
            let h = StaticHamiltonian::new(asi_hamiltonian(&spec.cluster(kappa)?)?)?;
            let reg = Register::qubits(n);
            let psi0 = StateVector::basis(&reg.space()?, &crate::dynamics::parse_label(initial, 2)?)?;
            let grid = uniform_grid(spec.duration_ns.map(ns).unwrap_or(3.0 * THETA / kappa), spec.samples);
            let series = populations(&evolve_schrodinger(&h, &psi0, &grid, &spec.integration)?, &labels)?;
            (kappa, series, None)
        }
        Engine::Full | Engine::FullLindblad => {
            let phases = spec.modulation_phases();
            let kappa = calibrated_kappa(spec, &wiring[..3], phases[..3].to_vec())?;
            let m = spec.drive.modulation(phases, spec.device.phi0)?;
            let h = LabFrameHamiltonian::from_device(&spec.device, &wiring, &vec![true; n], &m, &spec.integration)?;
            let reg = h.register();
            let psi0 = StateVector::basis(&reg.space()?, &{
                let mut d = crate::dynamics::parse_label(initial, reg.levels)?;
                d.push(0);
                d
            })?;
            let grid = uniform_grid(spec.duration_ns.map(ns).unwrap_or(3.0 * THETA / kappa), spec.samples);
            let traj = run_full(spec, &h, &psi0, &grid)?;
            (kappa, traj.populations(&labels)?, Some(traj.max_leakage(n)))
        }
    };

    // average out the micromotion on the full engines
    let smoothing = match spec.engine {
        Engine::Effective => 1,
        _ => {
            let dt = series.times[1] - series.times[0];
            ((TAU / mhz(spec.drive.nu_mhz)) / dt).round().max(1.0) as usize
        }
    };
    let grouped: Vec<(String, Vec<f64>)> = groups
        .iter()
        .map(|(name, members)| {
            Ok((
                name.to_string(),
                series.group(members).ok_or_else(|| Error::BadLabel { label: members.join("+"), reason: "not tracked".into() })?,
            ))
        })
        .collect::<Result<_>>()?;
    let peaks = visit_order(&series.times, &grouped, 0, smoothing);
    let order = peaks.iter().map(|p| p.label.clone()).collect();
    Ok(ScenarioOutput {
        summary: ScenarioSummary {
            scenario: spec.name,
            engine: spec.engine,
            kappa_mhz: Some(to_mhz(kappa)),
            t0_ns: Some(to_ns(THETA / kappa)),
            peaks,
            order,
            rates: Vec::new(),
            ghz: None,
            leakage: leak,
            parameters: spec.clone(),
        },
        populations: series,
    })
}

/// Vacuum-Rabi (`figS1`) or two-qubit swap (`figS2`) traces, sampled once per period.
fn run_coupling_scenario(spec: &ScenarioSpec) -> Result<ScenarioOutput> {
    let d = &spec.drive;
    let (f, g, nu) = (d.f(), mhz(d.g_mhz), mhz(d.nu_mhz));
    let period = TAU / nu;
    let duration = spec.duration_ns.map(ns).unwrap_or(match spec.name {
        ScenarioName::FigS1 => 4e-6,
        _ => 2e-6,
    });
    // whole periods only; `samples` caps the point count
    let steps = ((duration / period).round() as usize).max(1);
    let stride = steps.div_ceil(spec.samples - 1);
    let grid: Vec<f64> = (0..=steps / stride).map(|k| (k * stride) as f64 * period).collect();
    let one_qubit = spec.name == ScenarioName::FigS1;
    let (labels, initial): (Vec<&str>, &str) = if one_qubit { (vec!["u", "d"], "u") } else { (vec!["ud", "du"], "ud") };
    let wiring = spec.wiring();
    let n = wiring.len();

    let (series, leak) = match spec.engine {
        Engine::Effective => {
            let (h, reg) = if one_qubit {
                let reg = Register::with_resonator(1, 2, spec.integration.fock_cutoff);
                let space = reg.space()?;
                let (_, a_dag) = boson_ops(spec.integration.fock_cutoff)?;
                let jump = &embed(&space, 1, &a_dag)? * &embed(&space, 0, &transmon_lowering(2)?)?;
                let h = (&jump + &jump.adjoint()).scale(c(qubit_resonator_g0(g, f)));
                (Operator::hermitian(space, h.into_matrix())?, reg)
            } else {
                (effective_cluster_hamiltonian(&spec.modulation_phases(), g, f, nu)?, Register::qubits(2))
            };
            let mut digits = crate::dynamics::parse_label(initial, 2)?;
            if reg.n_fock.is_some() {
                digits.push(0);
            }
            let psi0 = StateVector::basis(&reg.space()?, &digits)?;
            let h = StaticHamiltonian::new(h)?;
            (populations(&evolve_schrodinger(&h, &psi0, &grid, &spec.integration)?, &labels)?, None)
        }
        Engine::Full | Engine::FullLindblad => {
            let m = spec.drive.modulation(spec.modulation_phases(), spec.device.phi0)?;
            let h = LabFrameHamiltonian::from_device(&spec.device, &wiring, &vec![true; n], &m, &spec.integration)?;
            let reg = h.register();
            let mut digits = crate::dynamics::parse_label(initial, reg.levels)?;
            digits.push(0);
            let psi0 = StateVector::basis(&reg.space()?, &digits)?;
            let traj = run_full(spec, &h, &psi0, &grid)?;
            (traj.populations(&labels)?, Some(traj.max_leakage(n)))
        }
    };

    let trace = series.trace(initial).expect("initial label is tracked");
    let raw_hz = dominant_frequency(period, trace)?;
    let (name, raw, analytic) = if one_qubit {
        // P↑ = cos²(g₀t): the trace oscillates at twice the coupling
        ("g0", to_mhz(PI * raw_hz), to_mhz(qubit_resonator_g0(g, f).abs()))
    } else {
        ("2g_eff", to_mhz(TAU * raw_hz), to_mhz(2.0 * qubit_qubit_geff(g, f, nu, spec.delta_phi).abs()))
    };
    let visible = swing(trace) >= 1e-3 && raw >= DECOUPLED_MHZ;
    Ok(ScenarioOutput {
        summary: ScenarioSummary {
            scenario: spec.name,
            engine: spec.engine,
            kappa_mhz: None,
            t0_ns: None,
            peaks: Vec::new(),
            order: Vec::new(),
            rates: vec![RateEstimate { name: name.into(), extracted_mhz: visible.then_some(raw), raw_mhz: raw, analytic_mhz: analytic }],
            ghz: None,
            leakage: leak,
            parameters: spec.clone(),
        },
        populations: series,
    })
}

/// The preparation circuit; register sites follow [`ScenarioSpec::wiring`].
pub fn ghz_circuit(n: usize) -> Result<Vec<GateOp>> {
    let mut ops = vec![GateOp::x(0), GateOp::yhalf(1), GateOp::asi([0, 2, 1])?, GateOp::x(1)];
    match n {
        3 => {}
        5 => ops.extend([GateOp::x(3), GateOp::asi([2, 3, 4])?, GateOp::x(2)]),
        _ => return Err(Error::InvalidParameter(format!("GHZ circuits exist for 3 or 5 qubits, not {n}"))),
    }
    Ok(ops)
}

#[derive(Clone, Debug)]
pub struct GhzRun {
    /// Final state of the transmons, resonator traced out.
    pub rho: DensityMatrix,
    pub report: GhzReport,
    /// All-down / all-up populations after each circuit stage.
    pub stages: PopulationSeries,
    pub summary: ScenarioSummary,
}

enum GhzState {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl GhzState {
    fn gate(self, g: &GateOp) -> Result<Self> {
        Ok(match self {
            Self::Pure(p) => Self::Pure(apply_gate(&p, g)?),
            Self::Mixed(r) => Self::Mixed(apply_gate_density(&r, g)?),
        })
    }

    fn density(&self) -> DensityMatrix {
        match self {
            Self::Pure(p) => p.to_density(),
            Self::Mixed(r) => r.clone(),
        }
    }
}

/// Runs the GHZ preparation on the scenario's engine.
pub fn run_ghz(spec: &ScenarioSpec) -> Result<GhzRun> {
    let n = match spec.name {
        ScenarioName::Ghz3 => 3,
        ScenarioName::Ghz5 => 5,
        other => return Err(Error::InvalidParameter(format!("{other} is not a GHZ scenario"))),
    };
    spec.validate()?;
    let circuit = ghz_circuit(n)?;
    let all_d = "d".repeat(n);
    let all_u = "u".repeat(n);
    let labels = [all_d.as_str(), all_u.as_str()];

    let (register, full) = match spec.engine {
        Engine::Effective => (Register::qubits(n), false),
        _ => (Register::from_config(n, &spec.integration), true),
    };
    let space = register.space()?;
    let psi0 = StateVector::basis(&space, &space.digits_of(register.index_of_label(&all_d)?))?;
    let mut state = match spec.engine {
        Engine::FullLindblad => GhzState::Mixed(psi0.to_density()),
        _ => GhzState::Pure(psi0),
    };
    let analytic_t0 = THETA / kappa_t0(mhz(spec.drive.g_mhz), spec.drive.f(), mhz(spec.drive.nu_mhz)).kappa;

    let mut clock = 0.0;
    let mut first_t0 = None;
    let mut times = vec![0.0];
    let mut values =
        labels.iter().map(|l| Ok(vec![crate::dynamics::label_probability(&state.density(), l)?])).collect::<Result<Vec<_>>>()?;
    let mut peak_leak: f64 = 0.0;
    for op in &circuit {
        state = match (op.asi_targets(), full) {
            (Some(targets), true) => {
                let (next, t0) = asi_stage(spec, &register, state, targets)?;
                first_t0.get_or_insert(t0);
                clock += t0;
                next
            }
            (Some(_), false) => {
                first_t0.get_or_insert(analytic_t0);
                clock += analytic_t0;
                state.gate(op)?
            }
            (None, _) => state.gate(op)?,
        };
        let rho = state.density();
        peak_leak = peak_leak.max(leakage(&rho, n));
        times.push(clock);
        for (v, l) in values.iter_mut().zip(&labels) {
            v.push(crate::dynamics::label_probability(&rho, l)?);
        }
    }

    let rho_full = state.density();
    let rho = if full { rho_full.partial_trace(&(0..n).collect::<Vec<_>>())? } else { rho_full.clone() };
    let (fidelity, raw_fidelity, relative_phase) = ghz_fidelity(&rho)?;
    let report = GhzReport {
        n_qubits: n,
        fidelity,
        raw_fidelity,
        relative_phase,
        threshold: GHZ_THRESHOLD,
        genuine_entanglement: fidelity > GHZ_THRESHOLD,
        leakage: leakage(&rho_full, n),
        t0_ns: first_t0.map(to_ns),
    };
    log::info!("{}: GHZ fidelity {:.6} (unoptimized {:.6})", spec.name, fidelity, raw_fidelity);
    let stages = PopulationSeries { times, labels: labels.iter().map(|s| s.to_string()).collect(), values };
    let t0 = first_t0.unwrap_or(analytic_t0);
    let summary = ScenarioSummary {
        scenario: spec.name,
        engine: spec.engine,
        kappa_mhz: Some(to_mhz(THETA / t0)),
        t0_ns: Some(to_ns(t0)),
        peaks: Vec::new(),
        order: Vec::new(),
        rates: Vec::new(),
        ghz: Some(report.clone()),
        leakage: full.then_some(peak_leak),
        parameters: spec.clone(),
    };
    Ok(GhzRun { rho, report, stages, summary })
}

/// Evolves one ASI stage on the full model: the three targets are modulated
/// with ring phases, the rest idle. Returns the state and the stage length.
fn asi_stage(spec: &ScenarioSpec, register: &Register, state: GhzState, [i, j, k]: [usize; 3]) -> Result<(GhzState, f64)> {
    let n = register.n_qubits;
    let a = TAU / 3.0;
    let mut phases = vec![0.0; n];
    phases[j] = a;
    phases[k] = 2.0 * a;
    let mut active = vec![false; n];
    for s in [i, j, k] {
        active[s] = true;
    }
    let m = spec.drive.modulation(phases, spec.device.phi0)?;
    let h = LabFrameHamiltonian::from_device(&spec.device, &spec.wiring(), &active, &m, &spec.integration)?;
    let kappa = calibrate_kappa(&h, &ring_sector(register, [i, j, k])?, &spec.integration)?;
    let t0 = THETA / kappa;
    let grid = [0.0, t0];
    let next = match state {
        GhzState::Pure(p) => GhzState::Pure(evolve_schrodinger(&h, &p, &grid, &spec.integration)?.samples.pop().expect("two samples")),
        GhzState::Mixed(r) => {
            let mut model = LindbladModel::from_device(&spec.device, &spec.wiring(), spec.dephasing)?;
            model.mode = spec.dephasing;
            GhzState::Mixed(evolve_lindblad(&h, &r, &grid, &model, &spec.integration)?.samples.pop().expect("two samples"))
        }
    };
    Ok((next, t0))
}

/// Effective-engine expectation of total `S_z` along a cluster run, for the
/// conservation check.
pub fn sz_drift(spec: &ScenarioSpec) -> Result<f64> {
    if spec.engine != Engine::Effective {
        return Err(Error::InvalidParameter("S_z drift is defined for effective runs".into()));
    }
    let (initial, _, _) = spec.cluster_layout();
    let kappa = kappa_t0(mhz(spec.drive.g_mhz), spec.drive.f(), mhz(spec.drive.nu_mhz)).kappa;
    let cluster = spec.cluster(kappa)?;
    let h = StaticHamiltonian::new(asi_hamiltonian(&cluster)?)?;
    let space: HilbertSpace = cluster.space();
    let sz = crate::chirality::total_sz(&space)?;
    let psi0 = StateVector::basis(&space, &crate::dynamics::parse_label(initial, 2)?)?;
    let grid = uniform_grid(3.0 * THETA / kappa, spec.samples);
    let series = evolve_schrodinger(&h, &psi0, &grid, &spec.integration)?;
    let e0 = sz.expectation(&psi0)?.re;
    series.samples.iter().try_fold(0.0f64, |acc, s| Ok(acc.max((sz.expectation(s)?.re - e0).abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn effective(name: ScenarioName) -> ScenarioOutput {
        run_scenario(&ScenarioSpec::preset(name, Engine::Effective)).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for n in ScenarioName::ALL {
            assert_eq!(n.as_str().parse::<ScenarioName>().unwrap(), n);
            let json = format!("\"{}\"", n.as_str());
            assert_eq!(serde_json::from_str::<ScenarioName>(&json).unwrap(), n);
        }
        let err = "fig9".parse::<ScenarioName>().unwrap_err().to_string();
        assert!(err.contains("fig2a") && err.contains("ghz5"));
        assert_eq!(serde_json::from_str::<Engine>("\"lindblad\"").unwrap(), Engine::FullLindblad);
        assert_eq!(serde_json::to_string(&Engine::FullLindblad).unwrap(), "\"full+lindblad\"");
    }

    #[test]
    fn fig2a_effective_transfer() {
        let out = effective(ScenarioName::Fig2a);
        assert_eq!(out.summary.order, ["1", "3", "2", "1"]);
        let p = out.populations.trace("ddu").unwrap();
        assert!((p[100] - 1.0).abs() < 1e-9, "{}", p[100]);
        assert!((out.summary.t0_ns.unwrap() - out.populations.times[100] * 1e9).abs() < 1e-9);
    }

    #[test]
    fn fig2b_runs_the_other_way() {
        let out = effective(ScenarioName::Fig2b);
        assert_eq!(out.summary.order, ["1", "2", "3", "1"]);
    }

    #[test]
    fn cluster_orders() {
        assert_eq!(effective(ScenarioName::Fig3FourSpinUp).summary.order, ["1", "2+4", "3", "1"]);
        assert_eq!(effective(ScenarioName::Fig3FourSpinDown).summary.order, ["1", "3", "2+4", "1"]);
        assert_eq!(effective(ScenarioName::Fig3FiveSpin).summary.order, ["1", "2+4", "3+5", "1"]);
    }

    #[test]
    fn sz_is_conserved() {
        for name in [ScenarioName::Fig2a, ScenarioName::Fig3FiveSpin] {
            assert!(sz_drift(&ScenarioSpec::preset(name, Engine::Effective)).unwrap() < 1e-10);
        }
    }

    #[test]
    fn ideal_ghz_is_exact() {
        for name in [ScenarioName::Ghz3, ScenarioName::Ghz5] {
            let run = run_ghz(&ScenarioSpec::preset(name, Engine::Effective)).unwrap();
            assert!((run.report.fidelity - 1.0).abs() < 1e-6, "{name}: {:?}", run.report);
            assert!(run.report.genuine_entanglement);
        }
    }

    #[test]
    fn effective_coupling_scenarios_match_prediction() {
        let s2 = effective(ScenarioName::FigS2);
        let r = &s2.summary.rates[0];
        assert!((r.raw_mhz / r.analytic_mhz - 1.0).abs() < 0.02, "{r:?}");
        let s1 = effective(ScenarioName::FigS1);
        let r = &s1.summary.rates[0];
        assert!((r.raw_mhz / r.analytic_mhz - 1.0).abs() < 0.05, "{r:?}");
    }

    #[test]
    fn bad_specs_carry_scenario_context() {
        let mut spec = ScenarioSpec::preset(ScenarioName::Fig2a, Engine::Effective);
        spec.samples = 1;
        let err = run_scenario(&spec).unwrap_err().to_string();
        assert!(err.starts_with("scenario fig2a"), "{err}");
        assert!(ghz_circuit(4).is_err());
    }
}
