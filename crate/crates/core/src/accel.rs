//! Minimal polynomial extrapolation over Petviashvili iterates, run in
//! cycling mode.
//!
//! A window holds iterates `X_0..X_w` with differences `W_j = X_{j+1} - X_j`.
//! The coefficients `c_0..c_{w-2}` minimize `||sum c_i W_i + W_{w-1}||`, with
//! `c_{w-1} = 1`, and `gamma_j = c_j / sum c`. The extrapolated point is
//! `sum gamma_j X_{j+1}`: for `w = 1` it is the last iterate, so a width-1
//! cycle is the plain iteration.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::solitary::{
    iterate_plain, Evaluation, FixedPointSystem, IterationTrace, Phase, SolitaryConfig,
};
use crate::spectral::{ModelParams, SpectralGrid};
use crate::state::StatePair;

const DEGENERATE_SUM: f64 = 1e-12;

/// Iterates of one extrapolation cycle, flattened to real vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtrapolationWindow {
    iterates: Vec<Vec<f64>>,
}

impl ExtrapolationWindow {
    /// Needs at least two iterates of equal length.
    pub fn new(iterates: Vec<Vec<f64>>) -> Result<Self> {
        if iterates.len() < 2 {
            return Err(Error::param("window", "needs at least two iterates"));
        }
        let dim = iterates[0].len();
        if let Some(bad) = iterates.iter().find(|v| v.len() != dim) {
            return Err(Error::LengthMismatch {
                expected: dim,
                actual: bad.len(),
            });
        }
        Ok(ExtrapolationWindow { iterates })
    }

    pub fn from_states(states: &[StatePair]) -> Result<Self> {
        Self::new(states.iter().map(StatePair::to_real_vector).collect())
    }

    /// Number of differences, `w`.
    pub fn width(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn iterates(&self) -> &[Vec<f64>] {
        &self.iterates
    }

    pub fn difference(&self, j: usize) -> Vec<f64> {
        self.iterates[j + 1]
            .iter()
            .zip(&self.iterates[j])
            .map(|(a, b)| a - b)
            .collect()
    }
}

/// Weights `gamma_0..gamma_{w-1}` of the iterates `X_1..X_w`.
///
/// A stationary window (all differences zero) yields `(0, .., 0, 1)`.
pub fn mpe_coefficients(window: &ExtrapolationWindow) -> Result<Vec<f64>> {
    let w = window.width();
    let dim = window.iterates[0].len();
    let diffs: Vec<Vec<f64>> = (0..w).map(|j| window.difference(j)).collect();
    let mut unit = vec![0.0; w];
    unit[w - 1] = 1.0;
    if diffs.iter().flatten().all(|&v| v == 0.0) || w == 1 {
        return Ok(unit);
    }
    let a = DMatrix::from_fn(dim, w - 1, |r, c| diffs[c][r]);
    let b = DVector::from_iterator(dim, diffs[w - 1].iter().map(|v| -v));
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * (dim.max(w) as f64) * f64::EPSILON;
    let sol = if smax == 0.0 {
        DVector::zeros(w - 1)
    } else {
        svd.solve(&b, eps)
            .map_err(|reason| Error::param("window", reason))?
    };
    let mut c: Vec<f64> = sol.iter().copied().collect();
    c.push(1.0);
    let sum: f64 = c.iter().sum();
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if sum.abs() < DEGENERATE_SUM * scale {
        return Err(Error::DegenerateSum { sum, scale });
    }
    Ok(c.into_iter().map(|ci| ci / sum).collect())
}

/// `sum gamma_j X_{j+1}`.
pub fn mpe_extrapolate(window: &ExtrapolationWindow, gamma: &[f64]) -> Result<Vec<f64>> {
    if gamma.len() != window.width() {
        return Err(Error::LengthMismatch {
            expected: window.width(),
            actual: gamma.len(),
        });
    }
    let total: f64 = gamma.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::param("gamma", format!("weights sum to {total}, not 1")));
    }
    let dim = window.iterates[0].len();
    let mut out = vec![0.0; dim];
    for (g, x) in gamma.iter().zip(&window.iterates[1..]) {
        for (o, v) in out.iter_mut().zip(x) {
            *o += g * v;
        }
    }
    Ok(out)
}

/// Extrapolates a window of states and restores Hermitian symmetry.
pub fn extrapolate_states(grid: &SpectralGrid, states: &[StatePair]) -> Result<StatePair> {
    let window = ExtrapolationWindow::from_states(states)?;
    let gamma = mpe_coefficients(&window)?;
    let mut x = StatePair::from_real_vector(&mpe_extrapolate(&window, &gamma)?)?;
    x.symmetrize(grid);
    Ok(x)
}

/// Petviashvili iteration accelerated by MPE in cycling mode.
///
/// Each cycle takes `mw` plain steps from the current point, extrapolates over
/// the `mw + 1` iterates and restarts from the result. The trace gets a row
/// for every plain iterate and one for every extrapolated point; `iter`
/// counts plain steps. An extrapolated point whose residual exceeds
/// `guard_factor` times that of the cycle's last plain iterate is discarded,
/// as is a cycle whose coefficients are degenerate. With `mw = 1` this is
/// exactly [`crate::solitary::petviashvili_iterate`].
pub fn cycled_solve(
    params: &ModelParams,
    grid: &SpectralGrid,
    config: &SolitaryConfig,
    seed: &StatePair,
) -> Result<(StatePair, IterationTrace)> {
    config.validate()?;
    let system = FixedPointSystem::new(*params, grid.clone(), config.c)?;
    if config.mw == 1 {
        return iterate_plain(&system, config, seed);
    }
    seed.check_grid(grid)?;

    let mut z = seed.clone();
    z.project(grid);
    z.symmetrize(grid);
    let mut trace = IterationTrace::default();
    let mut steps = 0usize;
    let mut eval = system.evaluate(&z, steps)?;
    trace.push(steps, &eval, Phase::Plain);

    loop {
        if eval.residual <= config.tol {
            trace.converged = true;
            trace.iterations_used = steps;
            return Ok((z, trace));
        }
        let mut window = vec![z.clone()];
        let mut current: (StatePair, Evaluation) = (z.clone(), eval.clone());
        for _ in 0..config.mw {
            if steps + 1 >= config.max_iter {
                trace.iterations_used = steps;
                return Err(Error::NonConvergence {
                    trace: Box::new(trace),
                    last: Box::new(current.0),
                });
            }
            let next = system.step(&current.1)?;
            steps += 1;
            let next_eval = system.evaluate(&next, steps)?;
            trace.push(steps, &next_eval, Phase::Plain);
            window.push(next.clone());
            current = (next, next_eval);
            if current.1.residual <= config.tol {
                trace.converged = true;
                trace.iterations_used = steps;
                return Ok((current.0, trace));
            }
        }

        let (plain, plain_eval) = current;
        (z, eval) = match extrapolate_states(grid, &window) {
            Ok(x) => {
                let x_eval = system.evaluate(&x, steps)?;
                trace.push(steps, &x_eval, Phase::Extrapolated);
                if x_eval.residual <= config.guard_factor * plain_eval.residual {
                    (x, x_eval)
                } else {
                    (plain, plain_eval)
                }
            }
            Err(Error::DegenerateSum { .. }) => (plain, plain_eval),
            Err(e) => return Err(e),
        };
    }
}
