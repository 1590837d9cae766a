//! Invariant suite: each check rebuilds its objects from scratch and
//! reports a pass/fail line with the measured margin.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::chirality::{
    asi_gate_unitary, asi_hamiltonian, chiral_permutation, chirality_x_y, chirality_z, total_sz, SpinClusterSpec, THETA,
};
use crate::dynamics::{
    evolve_lindblad, evolve_schrodinger, gate_fidelity, propagate_columns, restrict_rows, DephasingMode, DeviceParams, Hamiltonian,
    IntegrationConfig, LabFrameHamiltonian, LindbladModel, Method, Register,
};
use crate::error::{Error, Result};
use crate::floquet::{effective_cluster_hamiltonian, excitation_leak, qubit_qubit_geff, ModulationSpec};
use crate::operator::{c, EigenPropagator, HilbertSpace, Matrix, Operator, StateVector, I};
use crate::scenarios::{run_ghz, run_scenario, sz_drift, Engine, ScenarioName, ScenarioSpec};
use crate::units::{mhz, us};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

type Outcome = Result<(bool, String)>;
type CheckFn = fn() -> Outcome;

const CHECKS: &[(&str, CheckFn)] = &[
    ("hermiticity", hermiticity),
    ("chirality_algebra", chirality_algebra),
    ("chiral_permutation", chiral_permutation_check),
    ("asi_identity", asi_identity),
    ("sz_commutes", sz_commutes),
    ("geff_antisymmetry", geff_antisymmetry),
    ("norm_preservation", norm_preservation),
    ("trace_preservation", trace_preservation),
    ("rk4_convergence", rk4_convergence),
    ("stroboscopic_equivalence", stroboscopic_equivalence),
    ("asi_inverse_order", asi_inverse_order),
    ("recurrence_3t0", recurrence),
    ("chirality_reversal", chirality_reversal),
    ("sz_conservation", sz_conservation),
    ("ghz_threshold", ghz_threshold),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(n, _)| *n).collect()
}

/// Runs one check by name; engine errors count as failures.
pub fn run_check(name: &str) -> Result<Check> {
    let (_, f) = CHECKS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown check {name:?}; valid: {}", check_names().join(", "))))?;
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    Ok(Check { name: name.to_string(), passed, detail })
}

pub fn run_all() -> Vec<Check> {
    check_names().into_iter().map(|n| run_check(n).expect("registered check")).collect()
}

fn presets(kappa: f64) -> Result<Vec<SpinClusterSpec>> {
    Ok(vec![SpinClusterSpec::ring3(kappa)?, SpinClusterSpec::four_spin(kappa)?, SpinClusterSpec::five_spin(kappa)?])
}

fn ring_modulation(nu_mhz: f64) -> Result<ModulationSpec> {
    ModulationSpec::new(0.0, mhz(235.0), mhz(nu_mhz), vec![0.0, TAU / 3.0, 2.0 * TAU / 3.0], PI / 3.0)
}

fn hermiticity() -> Outcome {
    let mut worst: f64 = 0.0;
    for spec in presets(1.0)? {
        worst = worst.max(asi_hamiltonian(&spec)?.hermiticity_deviation());
    }
    worst = worst.max(effective_cluster_hamiltonian(&[0.0, 0.4, -1.3, 2.0], 1.0, 2.38, 5.0)?.hermiticity_deviation());
    let m = ring_modulation(98.8)?;
    let cfg = IntegrationConfig { levels_per_qubit: 3, fock_cutoff: 3, ..IntegrationConfig::default() };
    let h = LabFrameHamiltonian::from_device(&DeviceParams::default(), &[3, 1, 0], &[true; 3], &m, &cfg)?;
    let scale = mhz(250.0);
    for k in 0..8 {
        worst = worst.max(h.operator_at(k as f64 * m.period() / 8.0).hermiticity_deviation() / scale);
    }
    Ok((worst < 1e-12, format!("max relative |H − H†| = {worst:.1e}")))
}

fn chirality_algebra() -> Outcome {
    let space = HilbertSpace::qubits(3);
    let cz = chirality_z(&space)?;
    let (cx, cy) = chirality_x_y(&space)?;
    let ops = [&cx, &cy, &cz];
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        worst = worst.max(ops[i].commutator(ops[j])?.max_abs_diff(&ops[k].scale(c(2.0) * I)));
    }
    Ok((worst < 1e-12, format!("max |[C_i,C_j] − 2iC_k| = {worst:.1e}")))
}

fn chiral_permutation_check() -> Outcome {
    let space = HilbertSpace::qubits(3);
    let u = chiral_permutation(&space)?;
    let mut worst: f64 = 1.0;
    for idx in 0..8 {
        let d = space.digits_of(idx);
        let out = StateVector::new(space.clone(), u.apply(&StateVector::basis(&space, &d)?)?)?;
        worst = worst.min(out.overlap_sq(&StateVector::basis(&space, &[d[2], d[0], d[1]])?)?);
    }
    Ok((worst >= 1.0 - 1e-9, format!("min overlap = {worst:.12}")))
}

fn asi_identity() -> Outcome {
    let space = HilbertSpace::qubits(3);
    let kappa = 1.7;
    let lhs = (&total_sz(&space)? * &chirality_z(&space)?).scale(c(kappa));
    let dev = lhs.max_abs_diff(&asi_hamiltonian(&SpinClusterSpec::ring3(kappa)?)?);
    Ok((dev < 1e-12, format!("max |κS_zC_z − H_ASI| = {dev:.1e}")))
}

fn sz_commutes() -> Outcome {
    let mut worst: f64 = 0.0;
    for spec in presets(1.0)? {
        worst = worst.max(excitation_leak(&asi_hamiltonian(&spec)?)?);
    }
    worst = worst.max(excitation_leak(&effective_cluster_hamiltonian(&[0.0, 0.4, -1.3, 2.0, 0.9], 1.0, 2.38, 5.0)?)?);
    Ok((worst < 1e-12, format!("max |[H, S_z]| = {worst:.1e}")))
}

fn geff_antisymmetry() -> Outcome {
    let mut worst: f64 = qubit_qubit_geff(20.0, 2.38, 98.8, 0.0).abs();
    for k in 0..=40 {
        let x = -PI + k as f64 * TAU / 40.0;
        for f in [0.5, 2.35, 2.4048, 3.1] {
            worst = worst.max((qubit_qubit_geff(20.0, f, 100.0, x) + qubit_qubit_geff(20.0, f, 100.0, -x)).abs());
        }
    }
    Ok((worst < 1e-12, format!("max |g_eff(x) + g_eff(−x)| = {worst:.1e} MHz")))
}

fn fig2_register() -> Result<(LabFrameHamiltonian, StateVector)> {
    let h = LabFrameHamiltonian::from_device(
        &DeviceParams::default(),
        &[3, 1, 0],
        &[true; 3],
        &ring_modulation(98.8)?,
        &IntegrationConfig::default(),
    )?;
    let reg = h.register();
    let psi = StateVector::basis(&reg.space()?, &reg.space()?.digits_of(reg.index_of_label("udd")?))?;
    Ok((h, psi))
}

fn norm_preservation() -> Outcome {
    let (h, psi) = fig2_register()?;
    let series = evolve_schrodinger(&h, &psi, &[0.0, 0.5 * us(1.0), us(1.0)], &IntegrationConfig::default())?;
    let drift = series.samples.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max);
    Ok((drift < 1e-6, format!("norm drift over 1 µs = {drift:.1e}")))
}

fn trace_preservation() -> Outcome {
    let dev = DeviceParams::default();
    let m = ModulationSpec::new(0.0, mhz(235.0), mhz(100.0), vec![0.0, TAU / 3.0], dev.phi0)?;
    let cfg = IntegrationConfig::default();
    let h = LabFrameHamiltonian::from_device(&dev, &[0, 1], &[true; 2], &m, &cfg)?;
    let reg = h.register();
    let psi = StateVector::basis(&reg.space()?, &reg.space()?.digits_of(reg.index_of_label("ud")?))?;
    let model = LindbladModel::from_device(&dev, &[0, 1], DephasingMode::Markovian)?;
    let series = evolve_lindblad(&h, &psi.to_density(), &[0.0, 0.5 * us(1.0), us(1.0)], &model, &cfg)?;
    let drift = series.samples.iter().map(|r| (r.trace().re - 1.0).abs()).fold(0.0, f64::max);
    Ok((drift < 1e-6, format!("trace drift over 1 µs = {drift:.1e}")))
}

fn rk4_convergence() -> Outcome {
    let (h, psi) = fig2_register()?;
    let period = h.period().expect("modulated");
    let grid: Vec<f64> = (0..=20).map(|k| k as f64 * 7.5e-9).collect();
    let run = |dt: f64| -> Result<Vec<f64>> {
        let cfg = IntegrationConfig { method: Method::Rk4, dt_max: Some(dt), ..IntegrationConfig::default() };
        let s = evolve_schrodinger(&h, &psi, &grid, &cfg)?;
        Ok(s.samples.iter().flat_map(|p| p.amplitudes().iter().map(|a| a.norm_sqr()).collect::<Vec<_>>()).collect())
    };
    let coarse = run(period / 64.0)?;
    let fine = run(period / 128.0)?;
    let diff = coarse.iter().zip(&fine).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok((diff < 1e-4, format!("max probability change on halving dt = {diff:.1e}")))
}

/// Per-period propagators `U((n+1)T, nT)` of the full model against `e^{−iH_eff T}` on the
/// single-excitation qubit manifold, at f = 2.38.
pub fn stroboscopic_fidelities(periods: usize) -> Result<Vec<f64>> {
    let nu_mhz = 235.0 / 2.38;
    let m = ring_modulation(nu_mhz)?;
    let h = LabFrameHamiltonian::uniform(3, mhz(20.0), &m, 3)?;
    let reg = h.register();
    let labels = ["udd", "dud", "ddu"];
    let rows: Vec<usize> = labels.iter().map(|l| reg.index_of_label(l)).collect::<Result<_>>()?;
    let heff = effective_cluster_hamiltonian(m.phases(), mhz(20.0), m.f(), m.nu())?;
    let qreg = Register::qubits(3);
    let qrows: Vec<usize> = labels.iter().map(|l| qreg.index_of_label(l)).collect::<Result<_>>()?;
    let prop = EigenPropagator::new(&heff)?;
    let ueff = Matrix::from_fn(3, 3, |r, col| {
        let psi = StateVector::basis(heff.space(), &heff.space().digits_of(qrows[col])).expect("basis state");
        prop.apply(m.period(), &psi).expect("same space").amplitudes()[qrows[r]]
    });
    let cfg = IntegrationConfig::default();
    (0..periods)
        .map(|n| {
            let (t0, t1) = (n as f64 * m.period(), (n + 1) as f64 * m.period());
            let block = restrict_rows(&propagate_columns(&h, &rows, t0, t1, &cfg)?, &rows);
            Ok(gate_fidelity(&block, &ueff))
        })
        .collect()
}

fn stroboscopic_equivalence() -> Outcome {
    let f = stroboscopic_fidelities(30)?;
    let worst = f.iter().copied().fold(1.0, f64::min);
    Ok((worst >= 0.999, format!("min per-period fidelity over 30 periods = {worst:.6}")))
}

fn basis_overlaps(u: &Operator, space: &HilbertSpace) -> Result<f64> {
    let mut worst: f64 = 1.0;
    for idx in 0..space.dim() {
        let psi = StateVector::basis(space, &space.digits_of(idx))?;
        let out = StateVector::new(space.clone(), u.apply(&psi)?)?;
        worst = worst.min(out.overlap_sq(&psi)?);
    }
    Ok(worst)
}

fn asi_inverse_order() -> Outcome {
    let space = HilbertSpace::qubits(4);
    let mut worst: f64 = 1.0;
    for [i, j, k] in [[0, 1, 2], [3, 0, 2], [1, 3, 0]] {
        let fwd = asi_gate_unitary(4, [i, j, k])?;
        let back = asi_gate_unitary(4, [i, k, j])?;
        worst = worst.min(basis_overlaps(&(&back * &fwd), &space)?);
    }
    Ok((worst >= 1.0 - 1e-9, format!("min |⟨ψ|ASI(ikj)ASI(ijk)|ψ⟩|² = {worst:.12}")))
}

fn recurrence() -> Outcome {
    let kappa = mhz(4.44);
    let h = asi_hamiltonian(&SpinClusterSpec::ring3(kappa)?)?;
    let prop = EigenPropagator::new(&h)?;
    let space = h.space().clone();
    let mut worst: f64 = 1.0;
    for idx in 0..8 {
        let psi = StateVector::basis(&space, &space.digits_of(idx))?;
        worst = worst.min(prop.apply(3.0 * THETA / kappa, &psi)?.overlap_sq(&psi)?);
    }
    Ok((worst >= 1.0 - 1e-9, format!("min return probability at 3T₀ = {worst:.12}")))
}

fn chirality_reversal() -> Outcome {
    let order = |name| -> Result<Vec<String>> { Ok(run_scenario(&ScenarioSpec::preset(name, Engine::Effective))?.summary.order) };
    let reversed =
        |a: &[String], b: &[String]| a.len() == b.len() && a.len() >= 3 && a[1..a.len() - 1].iter().eq(b[1..b.len() - 1].iter().rev());
    let (a, b) = (order(ScenarioName::Fig2a)?, order(ScenarioName::Fig2b)?);
    let (c4u, c4d) = (order(ScenarioName::Fig3FourSpinUp)?, order(ScenarioName::Fig3FourSpinDown)?);
    let ok = reversed(&a, &b) && reversed(&c4u, &c4d);
    Ok((ok, format!("3-spin {a:?} vs {b:?}; 4-spin {c4u:?} vs {c4d:?}")))
}

fn sz_conservation() -> Outcome {
    let mut worst: f64 = 0.0;
    for name in
        [ScenarioName::Fig2a, ScenarioName::Fig2b, ScenarioName::Fig3FourSpinUp, ScenarioName::Fig3FourSpinDown, ScenarioName::Fig3FiveSpin]
    {
        worst = worst.max(sz_drift(&ScenarioSpec::preset(name, Engine::Effective))?);
    }
    Ok((worst < 1e-10, format!("max |⟨S_z⟩(t) − ⟨S_z⟩(0)| = {worst:.1e}")))
}

fn ghz_threshold() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for name in [ScenarioName::Ghz3, ScenarioName::Ghz5] {
        let r = run_ghz(&ScenarioSpec::preset(name, Engine::Effective))?.report;
        ok &= r.genuine_entanglement == (r.fidelity > r.threshold) && (r.fidelity - 1.0).abs() < 1e-6;
        parts.push(format!("{name} F = {:.6}", r.fidelity));
    }
    Ok((ok, parts.join(", ")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_passes() {
        for check in run_all() {
            assert!(check.passed, "{}: {}", check.name, check.detail);
        }
    }

    #[test]
    fn unknown_check_is_an_error() {
        assert!(run_check("nope").is_err());
        assert_eq!(check_names().len(), CHECKS.len());
    }
}
