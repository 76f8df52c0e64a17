//! Verification experiments: self-convergence under grid refinement,
//! traveling-wave round trips, tail-decay fits and acceleration benchmarks.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accel::cycled_solve;
use crate::error::{Error, Result};
use crate::evolution::{EvolutionConfig, SemiDiscrete};
use crate::solitary::{IterationTrace, SolitaryConfig};
use crate::spectral::{ModelParams, SpectralGrid};
use crate::state::StatePair;

/// Grid and time parameters of a refinement study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSetup {
    pub half_length: f64,
    pub resolutions: Vec<usize>,
    pub t_end: f64,
    pub dt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub resolutions: Vec<usize>,
    /// `||zeta_N - zeta_ref|| + ||u_N - u_ref||` at `t_end`.
    pub errors: Vec<f64>,
    /// `log2(e_i / e_{i+1})` for successive resolutions.
    pub observed_rates: Vec<f64>,
    pub reference_n: usize,
    pub dt: f64,
    /// Same error quantity between `dt` and `dt/2` runs at the finest resolution.
    pub temporal_error: f64,
    /// True when the smallest spatial error is within 10x of the temporal error.
    pub stagnated: bool,
    pub max_zero_mode_drift: f64,
}

impl ConvergenceReport {
    pub fn error_ratios(&self) -> Vec<f64> {
        self.errors.windows(2).map(|w| w[0] / w[1]).collect()
    }

    /// Every successive error ratio is at least `min_ratio`.
    pub fn is_spectral(&self, min_ratio: f64) -> bool {
        let r = self.error_ratios();
        !r.is_empty() && r.iter().all(|&x| x >= min_ratio)
    }
}

/// Exact `L2` distance between two trigonometric polynomials on the same period,
/// given by coefficients on grids of possibly different size.
pub fn coefficient_distance(
    a_grid: &SpectralGrid,
    a: &[Complex64],
    b_grid: &SpectralGrid,
    b: &[Complex64],
) -> Result<f64> {
    if (a_grid.half_length() - b_grid.half_length()).abs() > 1e-12 * a_grid.half_length() {
        return Err(Error::param("half_length", "grids cover different periods"));
    }
    let mut by_mode = std::collections::HashMap::new();
    for (i, c) in b.iter().enumerate() {
        by_mode.insert(b_grid.mode(i), *c);
    }
    let mut sum = 0.0;
    for (i, c) in a.iter().enumerate() {
        let other = by_mode.remove(&a_grid.mode(i)).unwrap_or_default();
        sum += (c - other).norm_sqr();
    }
    sum += by_mode.values().map(|c| c.norm_sqr()).sum::<f64>();
    Ok((a_grid.period() * sum).sqrt())
}

fn pair_distance(ga: &SpectralGrid, a: &StatePair, gb: &SpectralGrid, b: &StatePair) -> Result<f64> {
    Ok(coefficient_distance(ga, &a.zeta, gb, &b.zeta)? + coefficient_distance(ga, &a.u, gb, &b.u)?)
}

/// Evolves nodal initial data `initial(x) = (zeta, u)` at every resolution and
/// at twice the finest one, and measures errors against the latter.
pub fn convergence_study<F>(
    params: &ModelParams,
    setup: &ConvergenceSetup,
    initial: F,
) -> Result<ConvergenceReport>
where
    F: Fn(f64) -> (f64, f64) + Sync,
{
    let mut resolutions = setup.resolutions.clone();
    resolutions.sort_unstable();
    resolutions.dedup();
    let finest = *resolutions
        .last()
        .ok_or_else(|| Error::param("resolutions", "empty list"))?;
    if finest < 4 * resolutions[0] {
        return Err(Error::param(
            "resolutions",
            "finest resolution must be at least 4x the coarsest",
        ));
    }
    let reference_n = 2 * finest;

    let run = |n: usize, dt: f64| -> Result<(SpectralGrid, StatePair, f64)> {
        let grid = SpectralGrid::new(setup.half_length, n)?;
        let system = SemiDiscrete::new(*params, grid.clone())?;
        let s0 = StatePair::from_fn(&grid, |x| initial(x).0, |x| initial(x).1)?;
        let config = EvolutionConfig::new(setup.t_end, dt).with_record_every(usize::MAX);
        let record = system.evolve(&s0, &config)?;
        let drift = record.max_zero_mode_drift();
        let (_, last) = record.last().expect("record holds the initial state");
        Ok((grid, last.clone(), drift))
    };

    let mut jobs: Vec<(usize, f64)> = resolutions.iter().map(|&n| (n, setup.dt)).collect();
    jobs.push((reference_n, setup.dt));
    jobs.push((finest, 0.5 * setup.dt));
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(n, dt)| run(n, dt))
        .collect::<Result<Vec<_>>>()?;

    let (ref_grid, ref_state, _) = &results[resolutions.len()];
    let errors = results[..resolutions.len()]
        .iter()
        .map(|(g, s, _)| pair_distance(g, s, ref_grid, ref_state))
        .collect::<Result<Vec<f64>>>()?;
    let (half_grid, half_state, _) = &results[resolutions.len() + 1];
    let (fine_grid, fine_state, _) = &results[resolutions.len() - 1];
    let temporal_error = pair_distance(fine_grid, fine_state, half_grid, half_state)?;
    let observed_rates = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let min_error = errors.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ConvergenceReport {
        resolutions,
        errors,
        observed_rates,
        reference_n,
        dt: setup.dt,
        temporal_error,
        stagnated: min_error <= 10.0 * temporal_error,
        max_zero_mode_drift: results.iter().map(|r| r.2).fold(0.0, f64::max),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundtripReport {
    pub t_end: f64,
    pub dt: f64,
    /// Relative `L2` deviation at step `dt`.
    pub deviation: f64,
    /// Relative `L2` deviation at step `dt / 2`.
    pub deviation_half_dt: f64,
    /// `t_end * ||rhs(Z) + c Z_x|| / ||Z||`, the deviation left as `dt -> 0`
    /// by a wave that travels only up to its residual.
    pub defect_floor: f64,
    pub max_zero_mode_drift: f64,
}

impl RoundtripReport {
    pub fn halving_ratio(&self) -> f64 {
        self.deviation / self.deviation_half_dt
    }

    /// Halving `dt` cuts the deviation by `min_ratio`, unless the deviation at
    /// `dt` is already within `floor_margin` times the defect floor.
    pub fn halving_consistent(&self, min_ratio: f64, floor_margin: f64) -> bool {
        self.halving_ratio() >= min_ratio || self.deviation <= floor_margin * self.defect_floor
    }
}

/// Relative defect of `wave` as a solution traveling at speed `c`:
/// `||rhs(Z) + c Z_x|| / ||Z||`.
pub fn traveling_wave_defect(system: &SemiDiscrete, wave: &StatePair, c: f64) -> Result<f64> {
    let rhs = system.rhs(wave)?;
    let grid = system.grid();
    let dz = StatePair {
        zeta: grid.differentiate(&wave.zeta)?,
        u: grid.differentiate(&wave.u)?,
    };
    Ok(rhs.add_scaled(c, &dz).l2_norm(grid) / wave.l2_norm(grid))
}

/// Evolves `wave` to `t_end`, shifts it back by `c t_end` and returns the
/// relative `L2` deviation together with the mean-mode drift.
pub fn traveling_wave_roundtrip(
    system: &SemiDiscrete,
    wave: &StatePair,
    c: f64,
    t_end: f64,
    dt: f64,
) -> Result<(f64, f64)> {
    let grid = system.grid();
    let mut start = wave.clone();
    start.project(grid);
    start.symmetrize(grid);
    if t_end == 0.0 {
        return Ok((0.0, 0.0));
    }
    let record = system.evolve(&start, &EvolutionConfig::new(t_end, dt).with_record_every(usize::MAX))?;
    let (_, last) = record.last().expect("record holds the initial state");
    let back = last.translate(grid, -c * t_end)?;
    let deviation = back.sub(&start).l2_norm(grid) / start.l2_norm(grid);
    Ok((deviation, record.max_zero_mode_drift()))
}

/// Round trip at `dt` and `dt / 2` with the defect floor.
pub fn roundtrip_study(
    system: &SemiDiscrete,
    wave: &StatePair,
    c: f64,
    t_end: f64,
    dt: f64,
) -> Result<RoundtripReport> {
    let (full, half) = rayon::join(
        || traveling_wave_roundtrip(system, wave, c, t_end, dt),
        || traveling_wave_roundtrip(system, wave, c, t_end, 0.5 * dt),
    );
    let ((deviation, d1), (deviation_half_dt, d2)) = (full?, half?);
    Ok(RoundtripReport {
        t_end,
        dt,
        deviation,
        deviation_half_dt,
        defect_floor: t_end * traveling_wave_defect(system, wave, c)?,
        max_zero_mode_drift: d1.max(d2),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayModel {
    /// `|zeta| ~ A exp(-rate r)`
    Exponential,
    /// `|zeta| ~ A sum_n |r + 2 n l|^-rate` (power law with its periodic images)
    Algebraic,
}

/// Tail window measured as distance `r` from the crest.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayWindow {
    pub inner: f64,
    pub outer: f64,
    /// Points with `|zeta|` below this are discarded.
    pub floor: f64,
}

impl DecayWindow {
    /// Excludes five seed widths around the crest and the outer tenth of the
    /// half-period.
    pub fn for_grid(grid: &SpectralGrid, seed_width: f64) -> Self {
        DecayWindow {
            inner: 5.0 / seed_width,
            outer: 0.9 * grid.half_length(),
            floor: 1e-12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub model: DecayModel,
    pub window: [f64; 2],
    pub fitted_rate: f64,
    /// Coefficient of determination of the fit to `log |zeta|`.
    pub fit_quality: f64,
    pub points: usize,
}

const MIN_FIT_POINTS: usize = 8;
const IMAGE_COUNT: i32 = 20;

/// Fits the tail of a nodal profile on both sides of its crest.
pub fn decay_fit(
    grid: &SpectralGrid,
    profile: &[f64],
    window: &DecayWindow,
    model: DecayModel,
) -> Result<DecayFit> {
    if profile.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            actual: profile.len(),
        });
    }
    let l = grid.half_length();
    let crest = profile
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(j, _)| grid.node(j))
        .ok_or(Error::WindowUnderflow { points: 0 })?;
    let (r, y): (Vec<f64>, Vec<f64>) = profile
        .iter()
        .enumerate()
        .filter_map(|(j, &v)| {
            let d = (grid.node(j) - crest).rem_euclid(2.0 * l);
            let dist = d.min(2.0 * l - d);
            (dist >= window.inner && dist <= window.outer && v.abs() >= window.floor)
                .then(|| (dist, v.abs().ln()))
        })
        .unzip();
    if r.len() < MIN_FIT_POINTS {
        return Err(Error::WindowUnderflow { points: r.len() });
    }
    let (rate, quality) = match model {
        DecayModel::Exponential => {
            let (slope, q) = linear_fit(&r, &y);
            (-slope, q)
        }
        DecayModel::Algebraic => fit_periodized_power(&r, &y, 2.0 * l),
    };
    Ok(DecayFit {
        model,
        window: [window.inner, window.outer],
        fitted_rate: rate,
        fit_quality: quality,
        points: r.len(),
    })
}

/// Least-squares slope of `y` on `x` and the coefficient of determination.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let sse = syy - slope * sxy;
    (slope, r_squared(sse, syy))
}

fn r_squared(sse: f64, sst: f64) -> f64 {
    if sst == 0.0 {
        1.0
    } else {
        1.0 - sse / sst
    }
}

/// Sum of squared log residuals for exponent `p`, with the amplitude solved
/// in closed form.
fn power_sse(r: &[f64], y: &[f64], period: f64, p: f64) -> f64 {
    let basis: Vec<f64> = r
        .iter()
        .map(|&ri| {
            (-IMAGE_COUNT..=IMAGE_COUNT)
                .map(|n| (ri + n as f64 * period).abs().powf(-p))
                .sum::<f64>()
                .ln()
        })
        .collect();
    let offset = y.iter().zip(&basis).map(|(a, b)| a - b).sum::<f64>() / y.len() as f64;
    y.iter()
        .zip(&basis)
        .map(|(a, b)| (a - b - offset).powi(2))
        .sum()
}

fn fit_periodized_power(r: &[f64], y: &[f64], period: f64) -> (f64, f64) {
    let (mut a, mut b) = (0.2f64, 10.0f64);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (power_sse(r, y, period, c), power_sse(r, y, period, d));
    while b - a > 1e-8 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = power_sse(r, y, period, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = power_sse(r, y, period, d);
        }
    }
    let p = 0.5 * (a + b);
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let sst: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    (p, r_squared(power_sse(r, y, period, p), sst))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccelRow {
    pub mw: usize,
    /// Petviashvili steps to reach the tolerance; `None` if the run failed.
    pub iterations: Option<usize>,
    pub seconds: f64,
    pub final_residual: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct AccelRun {
    pub row: AccelRow,
    pub trace: IterationTrace,
    pub wave: Option<StatePair>,
}

/// Runs [`cycled_solve`] for each width from the same seed; failures are
/// recorded in the row rather than returned.
pub fn acceleration_benchmark(
    params: &ModelParams,
    grid: &SpectralGrid,
    base: &SolitaryConfig,
    seed: &StatePair,
    widths: &[usize],
) -> Vec<AccelRun> {
    widths
        .par_iter()
        .map(|&mw| {
            let config = SolitaryConfig { mw, ..*base };
            let start = Instant::now();
            let outcome = cycled_solve(params, grid, &config, seed);
            let seconds = start.elapsed().as_secs_f64();
            match outcome {
                Ok((wave, trace)) => AccelRun {
                    row: AccelRow {
                        mw,
                        iterations: Some(trace.iterations_used),
                        seconds,
                        final_residual: trace.last_residual(),
                        error: None,
                    },
                    trace,
                    wave: Some(wave),
                },
                Err(e) => {
                    let trace = match &e {
                        Error::NonConvergence { trace, .. } => (**trace).clone(),
                        _ => IterationTrace::default(),
                    };
                    AccelRun {
                        row: AccelRow {
                            mw,
                            iterations: None,
                            seconds,
                            final_residual: trace.last_residual(),
                            error: Some(e.to_string()),
                        },
                        trace,
                        wave: None,
                    }
                }
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderingCheck {
    /// `count(2) < count(1)`.
    pub first_drop_strict: bool,
    pub non_increasing: bool,
    /// The drop from the first to the second width is the largest one.
    pub largest_drop_first: bool,
}

impl OrderingCheck {
    pub fn holds(&self) -> bool {
        self.first_drop_strict && self.non_increasing && self.largest_drop_first
    }
}

/// Checks iteration counts listed in increasing width; any failed run fails
/// every clause.
pub fn acceleration_ordering(rows: &[AccelRow]) -> OrderingCheck {
    let counts: Option<Vec<i64>> = rows.iter().map(|r| r.iterations.map(|c| c as i64)).collect();
    let Some(counts) = counts.filter(|c| c.len() >= 2) else {
        return OrderingCheck {
            first_drop_strict: false,
            non_increasing: false,
            largest_drop_first: false,
        };
    };
    let drops: Vec<i64> = counts.windows(2).map(|w| w[0] - w[1]).collect();
    OrderingCheck {
        first_drop_strict: drops[0] > 0,
        non_increasing: drops.iter().all(|&d| d >= 0),
        largest_drop_first: drops[1..].iter().all(|&d| d < drops[0]),
    }
}
