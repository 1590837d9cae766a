use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Classical RK4 with `steps_per_period` steps per modulation period.
    Rk4,
    /// Dormand-Prince 5(4) with local error control.
    Adaptive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrationConfig {
    pub method: Method,
    /// Upper bound on any step (s). Capped at a twentieth of the modulation period.
    pub dt_max: Option<f64>,
    pub rtol: f64,
    pub atol: f64,
    pub steps_per_period: usize,
    pub fock_cutoff: usize,
    pub levels_per_qubit: usize,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self { method: Method::Adaptive, dt_max: None, rtol: 1e-8, atol: 1e-10, steps_per_period: 64, fock_cutoff: 5, levels_per_qubit: 2 }
    }
}

impl IntegrationConfig {
    pub fn rk4() -> Self {
        Self { method: Method::Rk4, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        if self.steps_per_period < 4 {
            return Err(Error::InvalidParameter("need at least 4 steps per period".into()));
        }
        if let Some(dt) = self.dt_max {
            if !(dt > 0.0) {
                return Err(Error::InvalidParameter(format!("dt_max must be positive, got {dt}")));
            }
        }
        if !(2..=3).contains(&self.levels_per_qubit) {
            return Err(Error::InvalidParameter(format!("levels_per_qubit must be 2 or 3, got {}", self.levels_per_qubit)));
        }
        if self.fock_cutoff < 2 {
            return Err(Error::InvalidParameter("fock_cutoff must be at least 2".into()));
        }
        Ok(())
    }

    /// Largest permitted step for a Hamiltonian with the given period.
    pub fn max_step(&self, period: Option<f64>) -> f64 {
        let cap = period.map_or(f64::INFINITY, |p| p / 20.0);
        self.dt_max.unwrap_or(f64::INFINITY).min(cap)
    }

    fn fixed_step(&self, period: Option<f64>, span: f64) -> f64 {
        let natural = period.map_or(span / 256.0, |p| p / self.steps_per_period as f64);
        natural.min(self.dt_max.unwrap_or(f64::INFINITY))
    }
}

/// Integrates `dy/dt = rhs(t, y)` from `grid[0]`, calling `sample(k, y)` at every
/// grid time (including the first). `rhs` overwrites its output slice.
pub(crate) fn integrate<F, S>(
    cfg: &IntegrationConfig,
    period: Option<f64>,
    y0: Vec<C64>,
    grid: &[f64],
    rhs: F,
    mut sample: S,
) -> Result<Vec<C64>>
where
    F: Fn(f64, &[C64], &mut [C64]),
    S: FnMut(usize, &[C64]) -> Result<()>,
{
    if grid.is_empty() {
        return Ok(y0);
    }
    if grid.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidParameter("time grid must be non-decreasing".into()));
    }
    let mut y = y0;
    sample(0, &y)?;
    match cfg.method {
        Method::Rk4 => {
            let mut rk = Rk4::new(y.len());
            for k in 1..grid.len() {
                let (a, b) = (grid[k - 1], grid[k]);
                if b > a {
                    let h_target = cfg.fixed_step(period, b - a);
                    let n = ((b - a) / h_target - 1e-9).ceil().max(1.0) as usize;
                    let h = (b - a) / n as f64;
                    for s in 0..n {
                        rk.step(&rhs, a + s as f64 * h, h, &mut y);
                    }
                }
                sample(k, &y)?;
            }
        }
        Method::Adaptive => {
            let mut dp = Dopri5::new(y.len(), cfg, period);
            for k in 1..grid.len() {
                dp.advance(&rhs, grid[k - 1], grid[k], &mut y)?;
                sample(k, &y)?;
            }
        }
    }
    Ok(y)
}

struct Rk4 {
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); n];
        Self { k: [z.clone(), z.clone(), z.clone(), z.clone()], tmp: z }
    }

    fn step<F: Fn(f64, &[C64], &mut [C64])>(&mut self, f: &F, t: f64, h: f64, y: &mut [C64]) {
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        f(t, y, k1);
        axpy_into(tmp, y, h / 2.0, k1);
        f(t + h / 2.0, tmp, k2);
        axpy_into(tmp, y, h / 2.0, k2);
        f(t + h / 2.0, tmp, k3);
        axpy_into(tmp, y, h, k3);
        f(t + h, tmp, k4);
        for i in 0..y.len() {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
}

fn axpy_into(out: &mut [C64], y: &[C64], h: f64, k: &[C64]) {
    for ((o, &yi), &ki) in out.iter_mut().zip(y).zip(k) {
        *o = yi + ki * h;
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

const MAX_STEPS: usize = 50_000_000;

struct Dopri5 {
    k: Vec<Vec<C64>>,
    tmp: Vec<C64>,
    y_new: Vec<C64>,
    h: Option<f64>,
    h_max: f64,
    rtol: f64,
    atol: f64,
    fsal_valid: bool,
    steps: usize,
}

impl Dopri5 {
    fn new(n: usize, cfg: &IntegrationConfig, period: Option<f64>) -> Self {
        let z = vec![C64::new(0.0, 0.0); n];
        Self {
            k: vec![z.clone(); 7],
            tmp: z.clone(),
            y_new: z,
            h: None,
            h_max: cfg.max_step(period),
            rtol: cfg.rtol,
            atol: cfg.atol,
            fsal_valid: false,
            steps: 0,
        }
    }

    fn advance<F: Fn(f64, &[C64], &mut [C64])>(&mut self, f: &F, mut t: f64, t_end: f64, y: &mut Vec<C64>) -> Result<()> {
        let span = t_end - t;
        if span <= 0.0 {
            return Ok(());
        }
        let mut h = self.h.unwrap_or_else(|| (span / 100.0).min(self.h_max)).min(self.h_max);
        while t < t_end {
            if t_end - t <= 4.0 * f64::EPSILON * t_end.abs() {
                break;
            }
            let last = t + h >= t_end;
            let h_try = if last { t_end - t } else { h };
            if h_try <= 16.0 * f64::EPSILON * t.abs().max(span) {
                return Err(Error::StepUnderflow { t, h: h_try });
            }
            if !self.fsal_valid {
                f(t, y, &mut self.k[0]);
            }
            for s in 1..7 {
                for i in 0..y.len() {
                    let mut acc = y[i];
                    for (r, &a) in A[s][..s].iter().enumerate() {
                        if a != 0.0 {
                            acc += self.k[r][i] * (a * h_try);
                        }
                    }
                    self.tmp[i] = acc;
                }
                f(t + C[s] * h_try, &self.tmp, &mut self.k[s]);
            }
            // stage 7 input was the fifth-order solution
            self.y_new.copy_from_slice(&self.tmp);

            let mut err_sq = 0.0;
            for i in 0..y.len() {
                let mut e = C64::new(0.0, 0.0);
                for (r, &w) in E.iter().enumerate() {
                    if w != 0.0 {
                        e += self.k[r][i] * w;
                    }
                }
                let scale = self.atol + self.rtol * y[i].norm().max(self.y_new[i].norm());
                err_sq += (e.norm() * h_try / scale).powi(2);
            }
            let err = (err_sq / y.len() as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Integration { t, reason: "non-finite error estimate".into() });
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                t = if last { t_end } else { t + h_try };
                std::mem::swap(y, &mut self.y_new);
                self.k.swap(0, 6);
                self.fsal_valid = true;
                if !last {
                    h = (h_try * factor).min(self.h_max);
                }
            } else {
                self.fsal_valid = true; // k[0] still belongs to (t, y)
                h = h_try * factor.min(1.0);
            }
            self.steps += 1;
            if self.steps > MAX_STEPS {
                return Err(Error::Integration { t, reason: format!("exceeded {MAX_STEPS} steps") });
            }
        }
        self.h = Some(h);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay_run(cfg: &IntegrationConfig) -> f64 {
        // y' = −i y, y(0) = 1, exact e^{−it}
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 * 0.7).collect();
        let mut worst = 0.0f64;
        integrate(
            cfg,
            None,
            vec![C64::new(1.0, 0.0)],
            &grid,
            |_, y, dy| dy[0] = -C64::i() * y[0],
            |k, y| {
                let exact = C64::from_polar(1.0, -grid[k]);
                worst = worst.max((y[0] - exact).norm());
                Ok(())
            },
        )
        .unwrap();
        worst
    }

    #[test]
    fn adaptive_hits_tolerance() {
        assert!(decay_run(&IntegrationConfig::default()) < 1e-7);
    }

    #[test]
    fn rk4_converges() {
        assert!(decay_run(&IntegrationConfig::rk4()) < 1e-7);
    }

    #[test]
    fn time_dependent_rhs() {
        // y' = i cos(t) y → y = e^{i sin t}
        for cfg in [IntegrationConfig::default(), IntegrationConfig { dt_max: Some(0.01), ..IntegrationConfig::rk4() }] {
            let grid = [0.0, 1.0, 2.5, 2.5, 4.0];
            let y = integrate(&cfg, None, vec![C64::new(1.0, 0.0)], &grid, |t, y, dy| dy[0] = C64::i() * t.cos() * y[0], |_, _| Ok(()))
                .unwrap();
            assert!((y[0] - C64::from_polar(1.0, 4f64.sin())).norm() < 1e-7);
        }
    }

    #[test]
    fn rejects_decreasing_grid() {
        let r = integrate(
            &IntegrationConfig::default(),
            None,
            vec![C64::new(1.0, 0.0)],
            &[1.0, 0.0],
            |_, _, dy| dy[0] = C64::new(0.0, 0.0),
            |_, _| Ok(()),
        );
        assert!(r.is_err());
    }

    #[test]
    fn config_validation() {
        assert!(IntegrationConfig::default().validate().is_ok());
        assert!(IntegrationConfig { levels_per_qubit: 4, ..Default::default() }.validate().is_err());
        assert!(IntegrationConfig { rtol: 0.0, ..Default::default() }.validate().is_err());
        assert_eq!(IntegrationConfig::default().max_step(Some(1.0)), 0.05);
    }
}
