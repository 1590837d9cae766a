use std::cell::RefCell;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::device::DeviceParams;
use super::evolve::TimeSeries;
use super::hamiltonian::{add_number_offsets, Hamiltonian, Offset};
use super::integrate::{integrate, IntegrationConfig};
use crate::error::{Error, Result};
use crate::operator::{boson_ops, c, transmon_lowering, transmon_number, DensityMatrix, HilbertSpace, LocalOp, Matrix, I};

/// Eigenvalues below this are clipped (and logged) in reported samples.
pub const POSITIVITY_CLIP: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DephasingMode {
    /// Pure-dephasing collapse operators `√(2γ_φ) n_j`.
    Markovian,
    /// Average over Gaussian static frequency offsets; only relaxation is
    /// kept in the master equation.
    QuasiStatic { samples: usize, seed: u64 },
}

/// Decoherence rates (1/s) for the leading transmon factors and the resonator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LindbladModel {
    pub relaxation: Vec<f64>,
    pub dephasing: Vec<f64>,
    pub resonator_decay: f64,
    pub static_sigma: Vec<f64>,
    pub mode: DephasingMode,
}

impl LindbladModel {
    pub fn closed(n_qubits: usize) -> Self {
        Self {
            relaxation: vec![0.0; n_qubits],
            dephasing: vec![0.0; n_qubits],
            resonator_decay: 0.0,
            static_sigma: vec![0.0; n_qubits],
            mode: DephasingMode::Markovian,
        }
    }

    pub fn from_device(dev: &DeviceParams, wiring: &[usize], mode: DephasingMode) -> Result<Self> {
        dev.validate()?;
        let per = |f: &dyn Fn(usize) -> Result<f64>| wiring.iter().map(|&q| f(q)).collect::<Result<Vec<_>>>();
        Ok(Self {
            relaxation: per(&|q| dev.relaxation_rate(q))?,
            dephasing: per(&|q| dev.dephasing_rate(q))?,
            resonator_decay: dev.resonator_decay_rate(),
            static_sigma: per(&|q| dev.static_offset_sigma(q))?,
            mode,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.relaxation.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.relaxation.len();
        if self.dephasing.len() != n || self.static_sigma.len() != n {
            return Err(Error::InvalidParameter("per-qubit rate lists differ in length".into()));
        }
        let all = self.relaxation.iter().chain(&self.dephasing).chain(&self.static_sigma).chain(std::iter::once(&self.resonator_decay));
        if all.clone().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(Error::InvalidParameter("decoherence rates must be finite and non-negative".into()));
        }
        if let DephasingMode::QuasiStatic { samples: 0, .. } = self.mode {
            return Err(Error::InvalidParameter("quasi-static mode needs at least one sample".into()));
        }
        Ok(())
    }

    fn collapse_ops(&self, space: &HilbertSpace, markovian_dephasing: bool) -> Result<Vec<LocalOp>> {
        let dims = space.dims();
        let n = self.n_qubits();
        if n > dims.len() || (self.resonator_decay > 0.0 && n >= dims.len()) {
            return Err(Error::InvalidSpace(format!("{} qubits do not fit dims {:?}", n, dims)));
        }
        let mut ops = Vec::new();
        for j in 0..n {
            if self.relaxation[j] > 0.0 {
                let l = transmon_lowering(dims[j])?.scale(c(self.relaxation[j].sqrt()));
                ops.push(LocalOp::on_site(space, j, &l)?);
            }
            if markovian_dephasing && self.dephasing[j] > 0.0 {
                let l = transmon_number(dims[j])?.scale(c((2.0 * self.dephasing[j]).sqrt()));
                ops.push(LocalOp::on_site(space, j, &l)?);
            }
        }
        if self.resonator_decay > 0.0 {
            let (a, _) = boson_ops(dims[n])?;
            ops.push(LocalOp::on_site(space, n, &a.scale(c(self.resonator_decay.sqrt())))?);
        }
        Ok(ops)
    }
}

struct Channel {
    l: LocalOp,
    ldag_l: LocalOp,
}

fn lindblad_run(
    h: &dyn Hamiltonian,
    rho0: &DensityMatrix,
    grid: &[f64],
    channels: &[Channel],
    cfg: &IntegrationConfig,
) -> Result<Vec<Matrix>> {
    let n = rho0.dim();
    let scratch = RefCell::new((vec![c(0.0); n * n], vec![c(0.0); n * n], vec![c(0.0); n * n]));
    let mut out = Vec::with_capacity(grid.len());
    integrate(
        cfg,
        h.period(),
        rho0.matrix().as_slice().to_vec(),
        grid,
        |t, rho, drho| {
            let mut guard = scratch.borrow_mut();
            let (w, y, yd) = &mut *guard;
            // W = −iHρ − ½ Σ L†Lρ, then dρ = W + W† + Σ LρL†
            w.fill(c(0.0));
            for col in 0..n {
                let r = col * n..(col + 1) * n;
                h.apply_add(t, -I, &rho[r.clone()], &mut w[r]);
            }
            drho.fill(c(0.0));
            for ch in channels {
                y.fill(c(0.0));
                for col in 0..n {
                    let r = col * n..(col + 1) * n;
                    ch.ldag_l.apply_add(c(-0.5), &rho[r.clone()], &mut w[r.clone()]);
                    ch.l.apply_add(c(1.0), &rho[r.clone()], &mut y[r]);
                }
                // LρL† = L (Lρ)†
                for i in 0..n {
                    for j in 0..n {
                        yd[i + j * n] = y[j + i * n].conj();
                    }
                }
                for col in 0..n {
                    let r = col * n..(col + 1) * n;
                    ch.l.apply_add(c(1.0), &yd[r.clone()], &mut drho[r]);
                }
            }
            for i in 0..n {
                for j in 0..n {
                    drho[i + j * n] += w[i + j * n] + w[j + i * n].conj();
                }
            }
        },
        |_, y| {
            out.push(Matrix::from_column_slice(n, n, y));
            Ok(())
        },
    )?;
    Ok(out)
}

/// Symmetrizes a raw integrator sample and clips negative eigenvalues below
/// [`POSITIVITY_CLIP`]. Returns the clipped state and the most negative eigenvalue.
fn finalize(space: &HilbertSpace, m: Matrix, t: f64) -> (DensityMatrix, f64) {
    let herm = (&m + m.adjoint()) * c(0.5);
    let eig = nalgebra::SymmetricEigen::new(herm.clone());
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min >= -POSITIVITY_CLIP {
        return (DensityMatrix::from_raw(space.clone(), herm), min);
    }
    log::warn!("clipping density-matrix eigenvalue {min:e} at t = {t:e} s");
    let trace = herm.trace().re;
    let clipped: Vec<f64> = eig.eigenvalues.iter().map(|&v| v.max(0.0)).collect();
    let kept: f64 = clipped.iter().sum();
    let v = &eig.eigenvectors;
    let d = Matrix::from_diagonal(&nalgebra::DVector::from_iterator(clipped.len(), clipped.iter().map(|&x| c(x * trace / kept))));
    (DensityMatrix::from_raw(space.clone(), v * d * v.adjoint()), min)
}

/// Master-equation evolution. Quasi-static mode averages `samples`
/// relaxation-only runs with Gaussian static offsets, one seeded stream per sample.
pub fn evolve_lindblad(
    h: &dyn Hamiltonian,
    rho0: &DensityMatrix,
    grid: &[f64],
    model: &LindbladModel,
    cfg: &IntegrationConfig,
) -> Result<TimeSeries<DensityMatrix>> {
    model.validate()?;
    if h.space() != rho0.space() {
        return Err(Error::DimensionMismatch { expected: h.space().dim(), actual: rho0.dim() });
    }
    let space = rho0.space().clone();
    let markovian = matches!(model.mode, DephasingMode::Markovian);
    let channels: Vec<Channel> = model
        .collapse_ops(&space, markovian)?
        .into_iter()
        .map(|l| {
            let ldag_l = l.adjoint().compose(&l)?;
            Ok(Channel { l, ldag_l })
        })
        .collect::<Result<_>>()?;

    let raw = match model.mode {
        DephasingMode::Markovian => lindblad_run(h, rho0, grid, &channels, cfg)?,
        DephasingMode::QuasiStatic { samples, seed } => {
            let runs: Vec<Vec<Matrix>> = (0..samples)
                .into_par_iter()
                .map(|k| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
                    let offsets: Vec<f64> = model
                        .static_sigma
                        .iter()
                        .map(|&s| if s > 0.0 { Normal::new(0.0, s).expect("positive sigma").sample(&mut rng) } else { 0.0 })
                        .collect();
                    let mut diag = vec![0.0; space.dim()];
                    add_number_offsets(&space, &offsets, &mut diag)?;
                    let shifted = Offset { inner: h, diag };
                    lindblad_run(&shifted, rho0, grid, &channels, cfg)
                })
                .collect::<Result<_>>()?;
            let scale = c(1.0 / samples as f64);
            (0..grid.len()).map(|s| runs.iter().fold(Matrix::zeros(space.dim(), space.dim()), |acc, r| acc + &r[s]) * scale).collect()
        }
    };
    let samples = raw.into_iter().zip(grid).map(|(m, &t)| finalize(&space, m, t).0).collect();
    Ok(TimeSeries { times: grid.to_vec(), samples })
}

/// `Tr(Σ_k |f⟩⟨f|_k ρ)` style leakage out of the qubit subspace, summed over transmons.
pub fn leakage(rho: &DensityMatrix, n_qubits: usize) -> f64 {
    let space = rho.space();
    let dims = space.dims();
    (0..rho.dim())
        .filter(|&i| space.digits_of(i)[..n_qubits].iter().zip(dims).any(|(&d, &dim)| dim == 3 && d == 2))
        .fold(0.0, |acc, i| acc + rho.population(i))
}
