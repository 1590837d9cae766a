use nalgebra::Schur;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hamiltonian::{parse_label, Hamiltonian};
use super::integrate::{integrate, IntegrationConfig};
use crate::error::{Error, Result};
use crate::operator::{c, DensityMatrix, EigenPropagator, HilbertSpace, Matrix, StateVector, Vector, C64, I};

#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries<T> {
    pub times: Vec<f64>,
    pub samples: Vec<T>,
}

impl<T> TimeSeries<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&T> {
        self.samples.last()
    }
}

/// Probability traces: `values[label][sample]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationSeries {
    pub times: Vec<f64>,
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl PopulationSeries {
    pub fn trace(&self, label: &str) -> Option<&[f64]> {
        self.labels.iter().position(|l| l == label).map(|k| self.values[k].as_slice())
    }

    /// Sum of the traces of several labels.
    pub fn group(&self, labels: &[&str]) -> Option<Vec<f64>> {
        let mut acc = vec![0.0; self.times.len()];
        for l in labels {
            for (a, v) in acc.iter_mut().zip(self.trace(l)?) {
                *a += v;
            }
        }
        Some(acc)
    }
}

/// Anything whose computational-basis diagonal can be read.
pub trait BasisDiagonal {
    fn basis_space(&self) -> &HilbertSpace;
    fn diagonal(&self, index: usize) -> f64;
}

impl BasisDiagonal for StateVector {
    fn basis_space(&self) -> &HilbertSpace {
        self.space()
    }

    fn diagonal(&self, index: usize) -> f64 {
        self.probability(index)
    }
}

impl BasisDiagonal for DensityMatrix {
    fn basis_space(&self) -> &HilbertSpace {
        self.space()
    }

    fn diagonal(&self, index: usize) -> f64 {
        self.population(index)
    }
}

/// Probability of a configuration of the leading factors, tracing out the rest.
pub fn label_probability<T: BasisDiagonal>(state: &T, label: &str) -> Result<f64> {
    let space = state.basis_space();
    let dims = space.dims();
    let levels = dims.iter().copied().max().unwrap_or(2);
    let digits = parse_label(label, levels)?;
    if digits.len() > dims.len() {
        return Err(Error::BadLabel { label: label.into(), reason: format!("longer than {} factors", dims.len()) });
    }
    let mut prefix = 0;
    for (j, &d) in digits.iter().enumerate() {
        if d >= dims[j] {
            return Err(Error::BadLabel { label: label.into(), reason: format!("site {} has only {} levels", j + 1, dims[j]) });
        }
        prefix = prefix * dims[j] + d;
    }
    // the traced factors are trailing, so matches form one contiguous block
    let block: usize = dims[digits.len()..].iter().product();
    Ok((prefix * block..(prefix + 1) * block).map(|i| state.diagonal(i)).sum::<f64>().clamp(0.0, 1.0))
}

pub fn populations<T: BasisDiagonal>(series: &TimeSeries<T>, labels: &[&str]) -> Result<PopulationSeries> {
    let values = labels
        .iter()
        .map(|l| series.samples.iter().map(|s| label_probability(s, l)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(PopulationSeries { times: series.times.clone(), labels: labels.iter().map(|s| s.to_string()).collect(), values })
}

fn check_space(h: &dyn Hamiltonian, space: &HilbertSpace) -> Result<()> {
    if h.space() != space {
        return Err(Error::DimensionMismatch { expected: h.space().dim(), actual: space.dim() });
    }
    Ok(())
}

pub fn evolve_schrodinger(
    h: &dyn Hamiltonian,
    psi0: &StateVector,
    grid: &[f64],
    cfg: &IntegrationConfig,
) -> Result<TimeSeries<StateVector>> {
    check_space(h, psi0.space())?;
    if let Some(op) = h.as_static() {
        // exact spectral propagation
        let prop = EigenPropagator::new(op)?;
        let t_start = grid.first().copied().unwrap_or(0.0);
        let samples = grid.iter().map(|&t| prop.apply(t - t_start, psi0)).collect::<Result<_>>()?;
        return Ok(TimeSeries { times: grid.to_vec(), samples });
    }
    let space = psi0.space().clone();
    let mut samples = Vec::with_capacity(grid.len());
    integrate(
        cfg,
        h.period(),
        psi0.amplitudes().as_slice().to_vec(),
        grid,
        |t, y, dy| {
            dy.fill(c(0.0));
            h.apply_add(t, -I, y, dy);
        },
        |_, y| {
            samples.push(StateVector::from_normalized(space.clone(), Vector::from_column_slice(y)));
            Ok(())
        },
    )?;
    Ok(TimeSeries { times: grid.to_vec(), samples })
}

/// Columns of `U(t1, t0)` for the listed input basis states, integrated in parallel.
pub fn propagate_columns(h: &dyn Hamiltonian, columns: &[usize], t0: f64, t1: f64, cfg: &IntegrationConfig) -> Result<Matrix> {
    Ok(stroboscopic_columns(h, columns, &[t0, t1], cfg)?.pop().expect("two grid points"))
}

/// `U(grid[k], grid[0])` restricted to the listed input columns, for each k.
pub fn stroboscopic_columns(h: &dyn Hamiltonian, columns: &[usize], grid: &[f64], cfg: &IntegrationConfig) -> Result<Vec<Matrix>> {
    let n = h.space().dim();
    if let Some(&bad) = columns.iter().find(|&&k| k >= n) {
        return Err(Error::SiteOutOfRange { index: bad, len: n });
    }
    let runs: Vec<Vec<Vector>> = columns
        .par_iter()
        .map(|&k| {
            let mut y0 = vec![c(0.0); n];
            y0[k] = c(1.0);
            let mut out = Vec::with_capacity(grid.len());
            integrate(
                cfg,
                h.period(),
                y0,
                grid,
                |t, y, dy| {
                    dy.fill(c(0.0));
                    h.apply_add(t, -I, y, dy);
                },
                |_, y| {
                    out.push(Vector::from_column_slice(y));
                    Ok(())
                },
            )?;
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok((0..grid.len()).map(|s| Matrix::from_columns(&runs.iter().map(|r| r[s].clone()).collect::<Vec<_>>())).collect())
}

/// Restricts a full-height block of columns to the given rows.
pub fn restrict_rows(block: &Matrix, rows: &[usize]) -> Matrix {
    Matrix::from_fn(rows.len(), block.ncols(), |r, col| block[(rows[r], col)])
}

/// `|Tr(Q†P)|² / d²`: gate fidelity of `P` against the unitary `Q`.
pub fn gate_fidelity(p: &Matrix, q: &Matrix) -> f64 {
    let d = q.nrows() as f64;
    (q.adjoint() * p).trace().norm_sqr() / (d * d)
}

/// Quasienergies (rad/s, centered on their circular mean) of a one-period
/// propagator block, sorted ascending.
pub fn quasienergies(block: &Matrix, period: f64) -> Result<Vec<f64>> {
    let schur = Schur::try_new(block.clone(), f64::EPSILON, 10_000).ok_or(Error::Eigen)?;
    let (_, t) = schur.unpack();
    let lambdas: Vec<C64> = (0..t.nrows()).map(|k| t[(k, k)]).collect();
    let mean: C64 = lambdas.iter().map(|l| l / l.norm()).sum();
    let reference = if mean.norm() > 1e-12 { mean / mean.norm() } else { c(1.0) };
    let mut eps: Vec<f64> = lambdas.iter().map(|l| -(l * reference.conj()).arg() / period).collect();
    eps.sort_by(f64::total_cmp);
    Ok(eps)
}

/// Effective chiral rate from the one-period propagator of a three-qubit ring:
/// the single-excitation quasienergies are `{−κ/2, 0, +κ/2}`.
pub fn calibrate_kappa(h: &dyn Hamiltonian, single_excitation: &[usize; 3], cfg: &IntegrationConfig) -> Result<f64> {
    let period = h.period().ok_or_else(|| Error::InvalidParameter("calibration needs a periodic Hamiltonian".into()))?;
    let block = restrict_rows(&propagate_columns(h, single_excitation, 0.0, period, cfg)?, single_excitation);
    let eps = quasienergies(&block, period)?;
    Ok(eps[2] - eps[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chirality::{asi_hamiltonian, chiral_step_time, SpinClusterSpec};
    use crate::dynamics::{LabFrameHamiltonian, Register, StaticHamiltonian};
    use crate::floquet::{effective_cluster_hamiltonian, kappa_t0, ModulationSpec};
    use crate::operator::{expm_apply, pauli, Operator, Pauli};
    use crate::units::mhz;
    use std::f64::consts::{PI, TAU};

    fn ring(kappa: f64) -> StaticHamiltonian {
        StaticHamiltonian::new(asi_hamiltonian(&SpinClusterSpec::ring3(kappa).unwrap()).unwrap()).unwrap()
    }

    fn basis(label: &str) -> StateVector {
        let reg = Register::qubits(label.len());
        StateVector::basis(&reg.space().unwrap(), &parse_label(label, 2).unwrap()).unwrap()
    }

    #[test]
    fn zero_hamiltonian_keeps_state() {
        let space = HilbertSpace::qubits(2);
        let h = StaticHamiltonian::new(Operator::zeros(&space)).unwrap();
        let psi = basis("ud");
        let s = evolve_schrodinger(&h, &psi, &[0.0, 1e-6, 2e-6], &IntegrationConfig::default()).unwrap();
        for out in &s.samples {
            assert!(out.equals_up_to_phase(&psi, 1e-14));
        }
    }

    /// Hides `as_static` so the ODE path is exercised.
    struct Opaque<'a>(&'a StaticHamiltonian);

    impl Hamiltonian for Opaque<'_> {
        fn space(&self) -> &HilbertSpace {
            self.0.space()
        }

        fn apply_add(&self, t: f64, coeff: C64, x: &[C64], out: &mut [C64]) {
            self.0.apply_add(t, coeff, x, out)
        }

        fn period(&self) -> Option<f64> {
            None
        }
    }

    #[test]
    fn static_agrees_with_eigen_propagator() {
        let kappa = mhz(4.44);
        let h = ring(kappa);
        let psi = basis("udd");
        let grid: Vec<f64> = (0..=20).map(|k| k as f64 * 25e-9).collect();
        let tight = IntegrationConfig { rtol: 1e-11, atol: 1e-13, ..IntegrationConfig::default() };
        let rk4 = IntegrationConfig { dt_max: Some(0.5e-9), ..IntegrationConfig::rk4() };
        for (hh, cfg) in [(&Opaque(&h) as &dyn Hamiltonian, tight), (&Opaque(&h), rk4), (&h, IntegrationConfig::default())] {
            let s = evolve_schrodinger(hh, &psi, &grid, &cfg).unwrap();
            for (t, out) in grid.iter().zip(&s.samples) {
                let exact = expm_apply(h.operator(), *t, &psi).unwrap();
                assert!((out.amplitudes() - exact.amplitudes()).norm() < 1e-8, "t = {t}");
            }
        }
    }

    #[test]
    fn effective_transfer_at_t0() {
        let kappa = mhz(4.44);
        let t0 = chiral_step_time(kappa);
        let s = evolve_schrodinger(&ring(kappa), &basis("udd"), &[0.0, t0], &IntegrationConfig::default()).unwrap();
        let p = populations(&s, &["udd", "ddu", "dud"]).unwrap();
        assert!((p.trace("ddu").unwrap()[1] - 1.0).abs() < 1e-9);
        assert!((p.values[0][0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn population_labels() {
        let reg = Register::with_resonator(3, 2, 3);
        let space = reg.space().unwrap();
        let psi = StateVector::basis(&space, &[0, 1, 1, 0]).unwrap();
        assert_eq!(label_probability(&psi, "udd").unwrap(), 1.0);
        assert_eq!(label_probability(&psi, "u").unwrap(), 1.0);
        assert!(label_probability(&psi, "uddud").is_err());
        assert!(label_probability(&psi, "udf").is_err());
        let wave = crate::chirality::spin_wave_state(crate::chirality::SpinWaveState::new(0, crate::chirality::Sz::MinusHalf).unwrap());
        for l in ["udd", "dud", "ddu"] {
            assert!((label_probability(&wave, l).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        }
        let rho = wave.to_density();
        assert!((label_probability(&rho, "dud").unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn norm_drift_over_a_microsecond() {
        let nu = mhz(98.8);
        let m = ModulationSpec::new(0.0, mhz(235.0), nu, vec![0.0, TAU / 3.0, 2.0 * TAU / 3.0], PI / 3.0).unwrap();
        let h = LabFrameHamiltonian::uniform(3, mhz(20.0), &m, 3).unwrap();
        let space = h.space().clone();
        let psi = StateVector::basis(&space, &[0, 1, 1, 0]).unwrap();
        let s = evolve_schrodinger(&h, &psi, &[0.0, 0.5e-6, 1e-6], &IntegrationConfig::default()).unwrap();
        for out in &s.samples {
            assert!((out.norm() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn one_period_matches_effective_hamiltonian() {
        let (g, nu) = (mhz(20.0), mhz(98.8));
        let phases = vec![0.0, TAU / 3.0, 2.0 * TAU / 3.0];
        let f = mhz(235.0) / nu;
        let m = ModulationSpec::new(0.0, mhz(235.0), nu, phases.clone(), PI / 3.0).unwrap();
        let h = LabFrameHamiltonian::uniform(3, g, &m, 3).unwrap();
        let reg = h.register();
        let cols: Vec<usize> = ["udd", "dud", "ddu"].iter().map(|l| reg.index_of_label(l).unwrap()).collect();
        let period = h.period().unwrap();
        let block = restrict_rows(&propagate_columns(&h, &cols, 0.0, period, &IntegrationConfig::default()).unwrap(), &cols);
        let heff = effective_cluster_hamiltonian(&phases, g, f, nu).unwrap();
        let q_full = crate::operator::EigenPropagator::new(&heff).unwrap().unitary(period);
        let qb: Vec<usize> = ["udd", "dud", "ddu"].iter().map(|l| Register::qubits(3).index_of_label(l).unwrap()).collect();
        let q = restrict_rows(&Matrix::from_columns(&qb.iter().map(|&k| q_full.column(k).into_owned()).collect::<Vec<_>>()), &qb);
        assert!(gate_fidelity(&block, &q) >= 0.999);
        let kappa = calibrate_kappa(&h, &[cols[0], cols[1], cols[2]], &IntegrationConfig::default()).unwrap();
        let analytic = kappa_t0(g, f, nu).kappa;
        assert!(kappa < analytic && kappa > 0.8 * analytic, "{kappa} vs {analytic}");
    }

    #[test]
    fn quasienergies_of_known_unitary() {
        let h = pauli(Pauli::Z).scale(c(0.3));
        let u = crate::operator::EigenPropagator::new(&h).unwrap().unitary(2.0);
        let eps = quasienergies(&u, 2.0).unwrap();
        assert!((eps[0] + 0.3).abs() < 1e-12 && (eps[1] - 0.3).abs() < 1e-12);
    }
}
