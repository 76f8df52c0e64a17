//! Solitary waves as fixed points of the collocation system `S Z = F(Z)`,
//! computed by the Petviashvili iteration
//!
//! ```text
//! m_nu = <S Z, Z> / <F(Z), Z>,    S Z_{nu+1} = m_nu^2 F(Z_nu)
//! ```
//!
//! `S` is block diagonal in Fourier space; per mode it is the 2x2 matrix
//! returned by [`assemble_s_mode`]. Inner products and the residual
//! `RES = ||S Z - F(Z)||` are Euclidean over all `2N` nodal values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{ModelParams, SpectralGrid};
use crate::state::StatePair;

const SINGULAR_FLOOR: f64 = 1e-12;
const DENOMINATOR_FLOOR: f64 = 1e-14;

/// Default grid half-length for solitary-wave runs.
pub const DEFAULT_HALF_LENGTH: f64 = 64.0;
/// Default number of collocation nodes for solitary-wave runs.
pub const DEFAULT_NODES: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitaryConfig {
    /// Wave speed.
    pub c: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Extrapolation width; 1 runs the plain iteration.
    #[serde(default = "default_mw")]
    pub mw: usize,
    #[serde(default = "default_seed_amplitude")]
    pub seed_amplitude: f64,
    #[serde(default = "default_seed_width")]
    pub seed_width: f64,
    /// An extrapolated point is kept only if its residual is at most this
    /// multiple of the residual of the last plain iterate of its cycle.
    #[serde(default = "default_guard_factor")]
    pub guard_factor: f64,
}

fn default_tol() -> f64 {
    1e-10
}
fn default_max_iter() -> usize {
    500
}
fn default_mw() -> usize {
    1
}
fn default_seed_amplitude() -> f64 {
    -0.4
}
fn default_seed_width() -> f64 {
    0.5
}
fn default_guard_factor() -> f64 {
    1.0
}

impl SolitaryConfig {
    pub fn new(c: f64) -> Self {
        SolitaryConfig {
            c,
            tol: default_tol(),
            max_iter: default_max_iter(),
            mw: default_mw(),
            seed_amplitude: default_seed_amplitude(),
            seed_width: default_seed_width(),
            guard_factor: default_guard_factor(),
        }
    }

    pub fn with_mw(mut self, mw: usize) -> Self {
        self.mw = mw;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_seed(mut self, amplitude: f64, width: f64) -> Self {
        self.seed_amplitude = amplitude;
        self.seed_width = width;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c != 0.0) {
            return Err(Error::param("c", "speed must be finite and nonzero"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::param("tol", "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::param("max_iter", "must be at least 1"));
        }
        if self.mw == 0 {
            return Err(Error::param("mw", "must be at least 1"));
        }
        if !(self.seed_amplitude != 0.0 && self.seed_amplitude.is_finite()) {
            return Err(Error::param("seed_amplitude", "must be finite and nonzero"));
        }
        if !(self.seed_width > 0.0 && self.seed_width.is_finite()) {
            return Err(Error::param("seed_width", "must be positive"));
        }
        if !(self.guard_factor >= 1.0) {
            return Err(Error::param("guard_factor", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Plain,
    Extrapolated,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Plain => "plain",
            Phase::Extrapolated => "extrapolated",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// Petviashvili steps taken before this residual evaluation.
    pub iter: usize,
    pub residual: f64,
    /// Stabilizing factor evaluated at the same iterate.
    pub m_factor: f64,
    pub phase: Phase,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub entries: Vec<TraceEntry>,
    pub converged: bool,
    /// Petviashvili steps taken in total.
    pub iterations_used: usize,
}

impl IterationTrace {
    pub fn residuals(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.residual).collect()
    }

    pub fn m_factors(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.m_factor).collect()
    }

    pub fn last_residual(&self) -> Option<f64> {
        self.entries.last().map(|e| e.residual)
    }

    pub fn last_m_factor(&self) -> Option<f64> {
        self.entries.last().map(|e| e.m_factor)
    }

    /// Residuals of the plain iterates only, in order.
    pub fn plain_residuals(&self) -> Vec<f64> {
        self.entries
            .iter()
            .filter(|e| e.phase == Phase::Plain)
            .map(|e| e.residual)
            .collect()
    }

    /// Index of the last increase in the plain residual sequence; the curve is
    /// monotone decreasing from there on. Zero when it never increases.
    pub fn transient_length(&self) -> usize {
        let r = self.plain_residuals();
        (1..r.len()).filter(|&i| r[i] >= r[i - 1]).max().unwrap_or(0)
    }

    pub(crate) fn push(&mut self, iter: usize, eval: &Evaluation, phase: Phase) {
        self.entries.push(TraceEntry {
            iter,
            residual: eval.residual,
            m_factor: eval.m_factor,
            phase,
        });
    }
}

/// The 2x2 block of `S` at wavenumber `k`, row major.
pub fn assemble_s_mode(params: &ModelParams, c: f64, k: f64) -> [[f64; 2]; 2] {
    let g = params.symbol_g(k);
    let gamma = params.gamma;
    [
        [
            -c * (1.0 + g),
            (1.0 + (params.alpha - 1.0) / params.alpha * g) / gamma,
        ],
        [1.0 - gamma, -c],
    ]
}

fn det2(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Residual, stabilizing factor and the pieces needed for the next step,
/// all at one iterate.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub residual: f64,
    pub m_factor: f64,
    pub f: StatePair,
}

/// The fixed-point system `S Z = F(Z)` at one speed on one grid.
#[derive(Clone, Debug)]
pub struct FixedPointSystem {
    params: ModelParams,
    grid: SpectralGrid,
    c: f64,
    blocks: Vec<[[f64; 2]; 2]>,
    dets: Vec<f64>,
}

impl FixedPointSystem {
    /// Assembles every per-mode block; fails with `SingularMode` when a
    /// determinant falls below `1e-12` times the block max-norm.
    pub fn new(params: ModelParams, grid: SpectralGrid, c: f64) -> Result<Self> {
        params.validate()?;
        if !(c.is_finite() && c != 0.0) {
            return Err(Error::param("c", "speed must be finite and nonzero"));
        }
        let mut blocks = Vec::with_capacity(grid.len());
        let mut dets = Vec::with_capacity(grid.len());
        for &k in grid.wavenumbers() {
            let s = assemble_s_mode(&params, c, k);
            let det = det2(&s);
            let scale = s.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
            if det.abs() < SINGULAR_FLOOR * scale {
                return Err(Error::SingularMode { wavenumber: k, det });
            }
            blocks.push(s);
            dets.push(det);
        }
        Ok(FixedPointSystem {
            params,
            grid,
            c,
            blocks,
            dets,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn speed(&self) -> f64 {
        self.c
    }

    pub fn determinants(&self) -> &[f64] {
        &self.dets
    }

    pub fn apply_s(&self, z: &StatePair) -> Result<StatePair> {
        z.check_grid(&self.grid)?;
        let mut out = StatePair::zeros(z.len());
        for (i, s) in self.blocks.iter().enumerate() {
            out.zeta[i] = s[0][0] * z.zeta[i] + s[0][1] * z.u[i];
            out.u[i] = s[1][0] * z.zeta[i] + s[1][1] * z.u[i];
        }
        Ok(out)
    }

    /// Per-mode closed-form inverse of `S`.
    pub fn solve_s(&self, rhs: &StatePair) -> Result<StatePair> {
        rhs.check_grid(&self.grid)?;
        let mut out = StatePair::zeros(rhs.len());
        for (i, (s, &det)) in self.blocks.iter().zip(&self.dets).enumerate() {
            let (a, b) = (rhs.zeta[i], rhs.u[i]);
            out.zeta[i] = (s[1][1] * a - s[0][1] * b) / det;
            out.u[i] = (s[0][0] * b - s[1][0] * a) / det;
        }
        Ok(out)
    }

    /// `F(Z) = (1/gamma) (zeta u, u^2 / 2)` as alias-free products.
    pub fn nonlinearity_f(&self, z: &StatePair) -> Result<StatePair> {
        z.check_grid(&self.grid)?;
        let inv = 1.0 / self.params.gamma;
        let zu = self.grid.projected_product(&z.zeta, &z.u)?;
        let uu = self.grid.projected_product(&z.u, &z.u)?;
        let mut f = StatePair {
            zeta: zu.into_iter().map(|c| c * inv).collect(),
            u: uu.into_iter().map(|c| c * (0.5 * inv)).collect(),
        };
        f.symmetrize(&self.grid);
        Ok(f)
    }

    /// Residual and stabilizing factor at `z`. `iteration` only labels a
    /// `DenominatorCollapse` error.
    pub fn evaluate(&self, z: &StatePair, iteration: usize) -> Result<Evaluation> {
        if !z.is_finite() {
            return Err(Error::NonFinite);
        }
        let f = self.nonlinearity_f(z)?;
        let sz = self.apply_s(z)?;
        let residual = sz.sub(&f).nodal_norm(&self.grid);
        let denom = f.nodal_inner(z, &self.grid);
        let norm2 = z.nodal_inner(z, &self.grid);
        if !(denom.abs() >= DENOMINATOR_FLOOR * norm2) || norm2 == 0.0 {
            return Err(Error::DenominatorCollapse {
                iteration,
                value: denom,
            });
        }
        let m_factor = sz.nodal_inner(z, &self.grid) / denom;
        Ok(Evaluation {
            residual,
            m_factor,
            f,
        })
    }

    /// `Z_{nu+1} = S^-1 (m^2 F(Z_nu))` from a prior evaluation.
    pub fn step(&self, eval: &Evaluation) -> Result<StatePair> {
        let mut next = self.solve_s(&eval.f.scaled(eval.m_factor * eval.m_factor))?;
        next.project(&self.grid);
        next.symmetrize(&self.grid);
        Ok(next)
    }

    /// `zeta = A sech^2(lambda x)`, `u = (1 - gamma) zeta / c`, projected.
    pub fn seed_profile(&self, config: &SolitaryConfig) -> Result<StatePair> {
        seed_profile(&self.params, &self.grid, config)
    }

    /// Nodal defect of the algebraic equation `-c u + (1-gamma) zeta - u^2/(2 gamma) = 0`.
    pub fn algebraic_defect(&self, z: &StatePair) -> Result<f64> {
        let (zeta, u) = z.to_nodal(&self.grid)?;
        let (c, gamma) = (self.c, self.params.gamma);
        Ok(zeta
            .iter()
            .zip(&u)
            .map(|(&zj, &uj)| (-c * uj + (1.0 - gamma) * zj - uj * uj / (2.0 * gamma)).abs())
            .fold(0.0, f64::max))
    }
}

pub fn seed_profile(
    params: &ModelParams,
    grid: &SpectralGrid,
    config: &SolitaryConfig,
) -> Result<StatePair> {
    config.validate()?;
    let (a, lambda, c, gamma) = (
        config.seed_amplitude,
        config.seed_width,
        config.c,
        params.gamma,
    );
    let zeta = move |x: f64| a / (lambda * x).cosh().powi(2);
    let mut seed = StatePair::from_fn(grid, zeta, |x| (1.0 - gamma) * zeta(x) / c)?;
    seed.project(grid);
    seed.symmetrize(grid);
    Ok(seed)
}

/// Plain Petviashvili iteration from `seed`.
///
/// At most `max_iter` residual evaluations are made; the trace has one row
/// per evaluation.
pub fn petviashvili_iterate(
    params: &ModelParams,
    grid: &SpectralGrid,
    config: &SolitaryConfig,
    seed: &StatePair,
) -> Result<(StatePair, IterationTrace)> {
    config.validate()?;
    let system = FixedPointSystem::new(*params, grid.clone(), config.c)?;
    iterate_plain(&system, config, seed)
}

pub(crate) fn iterate_plain(
    system: &FixedPointSystem,
    config: &SolitaryConfig,
    seed: &StatePair,
) -> Result<(StatePair, IterationTrace)> {
    seed.check_grid(system.grid())?;
    let mut z = seed.clone();
    z.project(system.grid());
    z.symmetrize(system.grid());
    let mut trace = IterationTrace::default();
    for nu in 0..config.max_iter {
        let eval = system.evaluate(&z, nu)?;
        trace.push(nu, &eval, Phase::Plain);
        trace.iterations_used = nu;
        if eval.residual <= config.tol {
            trace.converged = true;
            return Ok((z, trace));
        }
        if nu + 1 == config.max_iter {
            break;
        }
        z = system.step(&eval)?;
    }
    Err(Error::NonConvergence {
        trace: Box::new(trace),
        last: Box::new(z),
    })
}
