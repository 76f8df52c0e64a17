//! Fourier-Galerkin semidiscretization of the periodic initial-value problem
//! and its explicit fourth-order Runge-Kutta time stepping.
//!
//! Per retained mode `k~`:
//!
//! ```text
//! d/dt zeta_k = -(1/gamma) J(k~) i k~ u_k + (1/gamma) T(k~) i k~ P_N(zeta u)_k
//! d/dt u_k    = -(1 - gamma) i k~ zeta_k  + (1/(2 gamma)) i k~ P_N(u^2)_k
//! ```
//!
//! Every term carries the factor `i k~`, so the mean modes never move.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{ModelParams, SpectralGrid};
use crate::state::StatePair;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_cfl_guard")]
    pub cfl_guard: f64,
}

fn default_record_every() -> usize {
    1
}

fn default_cfl_guard() -> f64 {
    0.5
}

impl EvolutionConfig {
    pub fn new(t_end: f64, dt: f64) -> Self {
        EvolutionConfig {
            t_end,
            dt,
            record_every: default_record_every(),
            cfl_guard: default_cfl_guard(),
        }
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn validate(&self, system: &SemiDiscrete) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("dt", format!("{} must be positive", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::param("t_end", format!("{} must be non-negative", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(Error::param("record_every", "must be at least 1"));
        }
        if !(self.cfl_guard > 0.0) {
            return Err(Error::param("cfl_guard", "must be positive"));
        }
        let limit = self.cfl_guard * system.grid().spacing() / system.linear_speed_bound();
        if self.dt > limit {
            return Err(Error::param(
                "dt",
                format!("{} exceeds the step-size guard {limit:e}", self.dt),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroModeSample {
    pub t: f64,
    pub zeta: Complex64,
    pub u: Complex64,
}

#[derive(Clone, Debug, Default)]
pub struct EvolutionRecord {
    pub times: Vec<f64>,
    pub states: Vec<StatePair>,
    /// Mean coefficients after every step (and at `t = 0`).
    pub zero_modes: Vec<ZeroModeSample>,
}

impl EvolutionRecord {
    pub fn last(&self) -> Option<(f64, &StatePair)> {
        self.times.last().copied().zip(self.states.last())
    }

    /// Largest deviation of either mean coefficient from its initial value.
    pub fn max_zero_mode_drift(&self) -> f64 {
        let Some(first) = self.zero_modes.first() else {
            return 0.0;
        };
        self.zero_modes
            .iter()
            .map(|s| (s.zeta - first.zeta).norm().max((s.u - first.u).norm()))
            .fold(0.0, f64::max)
    }
}

/// Precomputed per-mode multipliers of the semidiscrete system.
#[derive(Clone, Debug)]
pub struct SemiDiscrete {
    params: ModelParams,
    grid: SpectralGrid,
    // -(1/gamma) J(k) i k
    zeta_from_u: Vec<Complex64>,
    // (1/gamma) T(k) i k
    zeta_from_product: Vec<Complex64>,
    // -(1-gamma) i k
    u_from_zeta: Vec<Complex64>,
    // (1/(2 gamma)) i k
    u_from_square: Vec<Complex64>,
}

impl SemiDiscrete {
    pub fn new(params: ModelParams, grid: SpectralGrid) -> Result<Self> {
        params.validate()?;
        let gamma = params.gamma;
        let table = |f: &dyn Fn(f64) -> f64| -> Vec<Complex64> {
            (0..grid.len())
                .map(|i| {
                    if i == grid.nyquist_index() {
                        Complex64::new(0.0, 0.0)
                    } else {
                        let k = grid.wavenumber(i);
                        Complex64::new(0.0, k * f(k))
                    }
                })
                .collect()
        };
        Ok(SemiDiscrete {
            zeta_from_u: table(&|k| -params.symbol_j(k) / gamma),
            zeta_from_product: table(&|k| params.symbol_t(k) / gamma),
            u_from_zeta: table(&|_| -(1.0 - gamma)),
            u_from_square: table(&|_| 0.5 / gamma),
            params,
            grid,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    /// `c_lin`: largest linear phase speed over the nonzero grid modes.
    pub fn linear_speed_bound(&self) -> f64 {
        (0..self.grid.len())
            .filter(|&i| i != 0)
            .map(|i| self.params.linear_phase_speed(self.grid.wavenumber(i)))
            .fold(0.0, f64::max)
    }

    /// Time derivative of the coefficient pair.
    pub fn rhs(&self, state: &StatePair) -> Result<StatePair> {
        state.check_grid(&self.grid)?;
        if !state.is_finite() {
            return Err(Error::NonFinite);
        }
        let zu = self.grid.projected_product(&state.zeta, &state.u)?;
        let uu = self.grid.projected_product(&state.u, &state.u)?;
        let n = self.grid.len();
        let mut out = StatePair::zeros(n);
        for i in 0..n {
            out.zeta[i] = self.zeta_from_u[i] * state.u[i] + self.zeta_from_product[i] * zu[i];
            out.u[i] = self.u_from_zeta[i] * state.zeta[i] + self.u_from_square[i] * uu[i];
        }
        Ok(out)
    }

    /// One classical RK4 step; the result is projected and symmetrized.
    /// `dt` may be negative.
    pub fn step(&self, state: &StatePair, dt: f64) -> Result<StatePair> {
        let k1 = self.rhs(state)?;
        let k2 = self.rhs(&state.add_scaled(0.5 * dt, &k1))?;
        let k3 = self.rhs(&state.add_scaled(0.5 * dt, &k2))?;
        let k4 = self.rhs(&state.add_scaled(dt, &k3))?;
        let n = state.len();
        let w = dt / 6.0;
        let mut next = state.clone();
        for i in 0..n {
            next.zeta[i] += w * (k1.zeta[i] + 2.0 * k2.zeta[i] + 2.0 * k3.zeta[i] + k4.zeta[i]);
            next.u[i] += w * (k1.u[i] + 2.0 * k2.u[i] + 2.0 * k3.u[i] + k4.u[i]);
        }
        next.project(&self.grid);
        next.symmetrize(&self.grid);
        if !next.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(next)
    }

    /// Projects `initial` onto the retained modes and marches to `t_end`.
    pub fn evolve(&self, initial: &StatePair, config: &EvolutionConfig) -> Result<EvolutionRecord> {
        config.validate(self)?;
        initial.check_grid(&self.grid)?;
        let mut state = initial.clone();
        state.project(&self.grid);
        state.symmetrize(&self.grid);

        let mut record = EvolutionRecord::default();
        let push_zero = |record: &mut EvolutionRecord, t: f64, s: &StatePair| {
            let (zeta, u) = s.zero_modes();
            record.zero_modes.push(ZeroModeSample { t, zeta, u });
        };
        record.times.push(0.0);
        record.states.push(state.clone());
        push_zero(&mut record, 0.0, &state);

        let steps = step_count(config.t_end, config.dt);
        let mut t = 0.0;
        for n in 1..=steps {
            let h = if n == steps {
                config.t_end - t
            } else {
                config.dt
            };
            state = self.step(&state, h).map_err(|e| match e {
                Error::NonFinite => Error::StepFailed { time: t },
                other => other,
            })?;
            t = if n == steps {
                config.t_end
            } else {
                n as f64 * config.dt
            };
            push_zero(&mut record, t, &state);
            if n % config.record_every == 0 || n == steps {
                record.times.push(t);
                record.states.push(state.clone());
            }
        }
        Ok(record)
    }
}

fn step_count(t_end: f64, dt: f64) -> usize {
    if t_end <= 0.0 {
        return 0;
    }
    let raw = t_end / dt;
    let rounded = raw.round();
    if (raw - rounded).abs() < 1e-9 * raw.max(1.0) {
        rounded as usize
    } else {
        raw.ceil() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Regime;

    fn system(regime: Regime, l: f64, n: usize) -> SemiDiscrete {
        let params = ModelParams::new(regime, 0.8, 1.2).unwrap();
        SemiDiscrete::new(params, SpectralGrid::new(l, n).unwrap()).unwrap()
    }

    fn smooth(sys: &SemiDiscrete) -> StatePair {
        StatePair::from_fn(
            sys.grid(),
            |x| 0.1 * (-(x * x)).exp(),
            |x| 0.05 * (-(x - 0.5) * (x - 0.5)).exp(),
        )
        .unwrap()
    }

    #[test]
    fn zero_and_constant_states_are_stationary() {
        let sys = system(Regime::Ilw, 4.0, 32);
        let zero = StatePair::zeros(32);
        assert_eq!(sys.rhs(&zero).unwrap(), zero);
        assert_eq!(sys.step(&zero, 0.01).unwrap(), zero);
        let constant = StatePair::from_fn(sys.grid(), |_| 0.3, |_| -0.2).unwrap();
        let d = sys.rhs(&constant).unwrap();
        assert!(d.components().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn rhs_rejects_non_finite() {
        let sys = system(Regime::Bo, 4.0, 16);
        let mut s = StatePair::zeros(16);
        s.u[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(sys.rhs(&s), Err(Error::NonFinite)));
    }

    #[test]
    fn single_mode_matches_dense_assembly() {
        // Dense oracle: build the truncated convolution by direct double sum and
        // apply the component form mode by mode.
        let n = 16;
        for regime in [Regime::Ilw, Regime::Bo] {
            let sys = system(regime, 3.0, n);
            let grid = sys.grid();
            let p = sys.params();
            let mut s = StatePair::zeros(n);
            s.zeta[2] = Complex64::new(0.3, -0.1);
            s.zeta[n - 2] = s.zeta[2].conj();
            s.u[2] = Complex64::new(-0.2, 0.25);
            s.u[n - 2] = s.u[2].conj();
            let conv = |a: &[Complex64], b: &[Complex64]| {
                let mut out = vec![Complex64::new(0.0, 0.0); n];
                for i in 0..n {
                    for j in 0..n {
                        let k = grid.mode(i) + grid.mode(j);
                        let half = (n / 2) as i64;
                        if grid.mode(i) == -half || grid.mode(j) == -half || k.abs() >= half {
                            continue;
                        }
                        out[k.rem_euclid(n as i64) as usize] += a[i] * b[j];
                    }
                }
                out
            };
            let zu = conv(&s.zeta, &s.u);
            let uu = conv(&s.u, &s.u);
            let got = sys.rhs(&s).unwrap();
            for i in 0..n {
                let k = grid.wavenumber(i);
                let ik = if i == n / 2 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, k)
                };
                let g = p.symbol_g(k);
                let jsym = (1.0 + (p.alpha - 1.0) / p.alpha * g) / (1.0 + g);
                let ez = -jsym / p.gamma * ik * s.u[i] + ik * zu[i] / (p.gamma * (1.0 + g));
                let eu = -(1.0 - p.gamma) * ik * s.zeta[i] + ik * uu[i] / (2.0 * p.gamma);
                assert!((got.zeta[i] - ez).norm() < 1e-12);
                assert!((got.u[i] - eu).norm() < 1e-12);
            }
        }
    }

    /// Exact propagator of the 2x2 per-mode linear system `y' = A y`,
    /// `A = -i k [[0, J/gamma], [1-gamma, 0]]`, via its eigen-decomposition.
    fn linear_propagator(p: &ModelParams, k: f64, t: f64, y: [Complex64; 2]) -> [Complex64; 2] {
        let a = p.symbol_j(k) / p.gamma;
        let b = 1.0 - p.gamma;
        let omega = k * (a * b).sqrt();
        // y1'' = -omega^2 y1; y1(0), y1'(0) = -i k a y2(0)
        let (c, s) = ((omega * t).cos(), (omega * t).sin());
        let i = Complex64::new(0.0, 1.0);
        let d1 = -i * k * a * y[1];
        let d2 = -i * k * b * y[0];
        [y[0] * c + d1 * s / omega, y[1] * c + d2 * s / omega]
    }

    #[test]
    fn linear_mode_step_matches_matrix_exponential() {
        // Amplitudes of 1e-9 make the quadratic terms (1e-18) negligible.
        let n = 32;
        let sys = system(Regime::Ilw, 2.0, n);
        let p = *sys.params();
        let idx = 3;
        let k = sys.grid().wavenumber(idx);
        let y0 = [Complex64::new(1e-9, 0.0), Complex64::new(0.0, 5e-10)];
        let mut errs = vec![];
        for dt in [0.08, 0.04] {
            let mut s = StatePair::zeros(n);
            s.zeta[idx] = y0[0];
            s.zeta[n - idx] = y0[0].conj();
            s.u[idx] = y0[1];
            s.u[n - idx] = y0[1].conj();
            let stepped = sys.step(&s, dt).unwrap();
            let exact = linear_propagator(&p, k, dt, y0);
            let e = (stepped.zeta[idx] - exact[0]).norm() + (stepped.u[idx] - exact[1]).norm();
            errs.push(e / 1e-9);
        }
        // local error O(dt^5): halving dt divides it by ~32
        let ratio = errs[0] / errs[1];
        assert!(ratio > 25.0 && ratio < 40.0, "ratio {ratio}, errors {errs:?}");
    }

    #[test]
    fn rk4_local_error_scales_like_dt5() {
        let sys = system(Regime::Bo, 4.0, 64);
        let s0 = smooth(&sys);
        let mut diffs = vec![];
        for dt in [1e-2, 5e-3, 2.5e-3] {
            let full = sys.step(&s0, dt).unwrap();
            let half = sys.step(&sys.step(&s0, dt / 2.0).unwrap(), dt / 2.0).unwrap();
            diffs.push(full.sub(&half).l2_norm(sys.grid()));
        }
        for w in diffs.windows(2) {
            let r = w[0] / w[1];
            assert!(r > 16.0 && r < 64.0, "ratio {r}");
        }
    }

    #[test]
    fn means_are_conserved_and_state_stays_real() {
        let sys = system(Regime::Ilw, 4.0, 64);
        let mut s0 = smooth(&sys);
        s0.zeta[0] += 0.02;
        let rec = sys.evolve(&s0, &EvolutionConfig::new(1.0, 0.01).with_record_every(10)).unwrap();
        assert!(rec.max_zero_mode_drift() <= 1e-12);
        assert_eq!(rec.zero_modes.len(), 101);
        assert_eq!(rec.times.len(), 11);
        assert!(rec.times.windows(2).all(|w| w[1] > w[0]));
        for st in &rec.states {
            let z = sys.grid().to_nodal_complex(&st.zeta).unwrap();
            assert!(z.iter().all(|c| c.im.abs() < 1e-10));
        }
    }

    #[test]
    fn first_snapshot_is_projected_initial_data() {
        let sys = system(Regime::Bo, 4.0, 32);
        let s0 = smooth(&sys);
        let rec = sys.evolve(&s0, &EvolutionConfig::new(0.05, 0.01)).unwrap();
        let mut projected = s0.clone();
        projected.project(sys.grid());
        projected.symmetrize(sys.grid());
        assert_eq!(rec.states[0], projected);
        assert_eq!(*rec.times.last().unwrap(), 0.05);
    }

    #[test]
    fn time_reversal_recovers_initial_state() {
        let sys = system(Regime::Ilw, 4.0, 64);
        let mut s0 = smooth(&sys);
        s0.project(sys.grid());
        s0.symmetrize(sys.grid());
        let mut errs = vec![];
        for dt in [0.04, 0.02] {
            let steps = (1.0 / dt) as usize;
            let mut s = s0.clone();
            for _ in 0..steps {
                s = sys.step(&s, dt).unwrap();
            }
            for _ in 0..steps {
                s = sys.step(&s, -dt).unwrap();
            }
            errs.push(s.sub(&s0).l2_norm(sys.grid()) / s0.l2_norm(sys.grid()));
        }
        assert!(errs[1] < 1e-6, "{errs:?}");
        assert!(errs[0] / errs[1] >= 8.0, "{errs:?}");
    }

    #[test]
    fn step_guard_and_config_validation() {
        let sys = system(Regime::Bo, 4.0, 64);
        // c_lin = sqrt(J(pi/4) (1-gamma)/gamma) = 0.370, h = 0.125
        assert!((sys.linear_speed_bound() - 0.3705).abs() < 1e-3);
        assert!(EvolutionConfig::new(1.0, 0.1).validate(&sys).is_ok());
        assert!(EvolutionConfig::new(1.0, 0.2).validate(&sys).is_err());
        assert!(EvolutionConfig::new(-1.0, 0.01).validate(&sys).is_err());
        assert!(EvolutionConfig::new(1.0, 0.0).validate(&sys).is_err());
    }

    #[test]
    fn zero_initial_state_stays_zero() {
        let sys = system(Regime::Ilw, 4.0, 32);
        let rec = sys
            .evolve(&StatePair::zeros(32), &EvolutionConfig::new(0.5, 0.05))
            .unwrap();
        assert!(rec.states.iter().all(|s| s.components().all(|c| c.norm() == 0.0)));
    }

    #[test]
    fn step_count_handles_rounding() {
        assert_eq!(step_count(1.0, 1e-3), 1000);
        assert_eq!(step_count(1.0, 0.3), 4);
        assert_eq!(step_count(0.0, 0.1), 0);
    }
}
