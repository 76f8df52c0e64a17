//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use ilwbo::accel::{mpe_coefficients, mpe_extrapolate, ExtrapolationWindow};
use ilwbo::harness::{
    acceleration_benchmark, acceleration_ordering, convergence_study, decay_fit, roundtrip_study,
    ConvergenceReport, ConvergenceSetup, DecayModel, DecayWindow,
};
use ilwbo::solitary::{assemble_s_mode, petviashvili_iterate, seed_profile, FixedPointSystem};
use ilwbo::{
    IterationTrace, ModelParams, Regime, SemiDiscrete, SolitaryConfig, SpectralGrid, StatePair,
};

const GAMMA: f64 = 0.8;
const ALPHA: f64 = 1.2;
const HALF_LENGTH: f64 = 64.0;
const NODES: usize = 1024;
const TOL: f64 = 1e-10;
const MAX_ITER: usize = 500;
const MAX_TRANSIENT: usize = 10;
const ROUNDTRIP_T: f64 = 1.0;
const ROUNDTRIP_DT: f64 = 1e-3;
const ROUNDTRIP_MAX: f64 = 1e-6;
const HALVING_RATIO: f64 = 8.0;
const FLOOR_MARGIN: f64 = 2.0;
const MIN_FIT_QUALITY: f64 = 0.99;
const BO_RATE: f64 = 2.0;
const BO_RATE_TOL: f64 = 0.3;
const MIN_ERROR_RATIO: f64 = 16.0;
const DRIFT_PER_TIME: f64 = 1e-12;
const PRODUCT_TOL: f64 = 1e-12;
const DENSE_TOL: f64 = 1e-10;
const MPE_TOL: f64 = 1e-9;
const M_TOL: f64 = 1e-6;
const CONVERGENCE_T: f64 = 0.5;

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: usize, name: &str, passed: bool, detail: String) {
        if !passed {
            self.failures += 1;
        }
        let tag = if passed { "PASS" } else { "FAIL" };
        println!("{tag} {id:2} {name}: {detail}");
    }
}

struct Solved {
    regime: Regime,
    c: f64,
    params: ModelParams,
    grid: SpectralGrid,
    outcome: Result<(StatePair, IterationTrace), String>,
    seconds: f64,
}

fn solve(regime: Regime, c: f64) -> Solved {
    let params = ModelParams::new(regime, GAMMA, ALPHA).unwrap();
    let grid = SpectralGrid::new(HALF_LENGTH, NODES).unwrap();
    let config = SolitaryConfig::new(c).with_tol(TOL).with_max_iter(MAX_ITER);
    let start = Instant::now();
    let outcome = seed_profile(&params, &grid, &config)
        .and_then(|seed| petviashvili_iterate(&params, &grid, &config, &seed))
        .map_err(|e| e.to_string());
    Solved {
        regime,
        c,
        params,
        grid,
        outcome,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn generation(report: &mut Report, id: usize, s: &Solved) {
    let name = format!("{} solitary wave, c = {}", s.regime, s.c);
    match &s.outcome {
        Ok((_, trace)) => {
            let transient = trace.transient_length();
            report.line(
                id,
                &name,
                trace.converged && transient <= MAX_TRANSIENT && trace.iterations_used <= MAX_ITER,
                format!(
                    "converged in {} iterations (cap {MAX_ITER}), monotone from iteration {transient} (cap {MAX_TRANSIENT}), {:.2}s",
                    trace.iterations_used, s.seconds
                ),
            );
        }
        Err(e) => report.line(id, &name, false, e.clone()),
    }
}

fn acceleration(report: &mut Report, solved: &[Solved]) {
    let mut passed = true;
    let mut detail = vec![];
    for s in solved {
        let base = SolitaryConfig::new(s.c).with_tol(TOL).with_max_iter(MAX_ITER);
        let seed = seed_profile(&s.params, &s.grid, &base).unwrap();
        let runs = acceleration_benchmark(&s.params, &s.grid, &base, &seed, &[1, 2, 3, 4]);
        let rows: Vec<_> = runs.into_iter().map(|r| r.row).collect();
        let ordering = acceleration_ordering(&rows);
        passed &= ordering.holds();
        let counts: Vec<String> = rows
            .iter()
            .map(|r| r.iterations.map_or("-".into(), |i| i.to_string()))
            .collect();
        detail.push(format!("{} counts mw 1..4 = [{}]", s.regime, counts.join(", ")));
    }
    detail.push(format!("guard factor {}", SolitaryConfig::new(1.0).guard_factor));
    report.line(3, "MPE acceleration ordering", passed, detail.join("; "));
}

fn algebraic(report: &mut Report, solved: &[Solved]) {
    let mut passed = true;
    let mut detail = vec![];
    for s in solved {
        match &s.outcome {
            Ok((wave, _)) => {
                let system = FixedPointSystem::new(s.params, s.grid.clone(), s.c).unwrap();
                let d = system.algebraic_defect(wave).unwrap();
                passed &= d <= 10.0 * TOL;
                detail.push(format!("{} max nodal defect {d:.3e}", s.regime));
            }
            Err(_) => {
                passed = false;
                detail.push(format!("{} no wave", s.regime));
            }
        }
    }
    detail.push(format!("need <= {:.0e}", 10.0 * TOL));
    report.line(4, "algebraic equation residual", passed, detail.join(", "));
}

fn roundtrip(report: &mut Report, s: &Solved) -> Option<f64> {
    let Ok((wave, _)) = &s.outcome else {
        report.line(5, "ILW traveling-wave roundtrip", false, "no wave".into());
        return None;
    };
    let system = SemiDiscrete::new(s.params, s.grid.clone()).unwrap();
    let r = roundtrip_study(&system, wave, s.c, ROUNDTRIP_T, ROUNDTRIP_DT).unwrap();
    report.line(
        5,
        "ILW traveling-wave roundtrip",
        r.deviation <= ROUNDTRIP_MAX && r.halving_consistent(HALVING_RATIO, FLOOR_MARGIN),
        format!(
            "relative L2 deviation {:.3e} (max {ROUNDTRIP_MAX:.0e}), dt/2 {:.3e}, ratio {:.2}, defect floor {:.3e}",
            r.deviation,
            r.deviation_half_dt,
            r.halving_ratio(),
            r.defect_floor
        ),
    );
    Some(r.max_zero_mode_drift / ROUNDTRIP_T)
}

fn decay(report: &mut Report, solved: &[Solved]) {
    let mut passed = true;
    let mut detail = vec![];
    for s in solved {
        let Ok((wave, _)) = &s.outcome else {
            passed = false;
            continue;
        };
        let (zeta, _) = wave.to_nodal(&s.grid).unwrap();
        let window = DecayWindow::for_grid(&s.grid, SolitaryConfig::new(s.c).seed_width);
        let exp = decay_fit(&s.grid, &zeta, &window, DecayModel::Exponential).ok();
        let alg = decay_fit(&s.grid, &zeta, &window, DecayModel::Algebraic).ok();
        match s.regime {
            Regime::Ilw => {
                let qe = exp.map_or(f64::NAN, |f| f.fit_quality);
                let qa = alg.map_or(f64::NAN, |f| f.fit_quality);
                passed &= qe >= MIN_FIT_QUALITY && qe > qa;
                detail.push(format!("ILW exponential R2 {qe:.4} (min {MIN_FIT_QUALITY}) vs algebraic R2 {qa:.4}"));
            }
            Regime::Bo => {
                let rate = alg.map_or(f64::NAN, |f| f.fitted_rate);
                passed &= (rate - BO_RATE).abs() <= BO_RATE_TOL;
                detail.push(format!("B-O algebraic rate {rate:.4} (need {BO_RATE} +- {BO_RATE_TOL})"));
            }
        }
    }
    report.line(6, "tail decay", passed, detail.join("; "));
}

fn convergence(report: &mut Report) -> Vec<(Regime, ConvergenceReport)> {
    let setup = ConvergenceSetup {
        half_length: 0.5,
        resolutions: vec![32, 64, 128],
        t_end: CONVERGENCE_T,
        dt: 1e-3,
    };
    let (a, w) = (0.02, 0.02);
    let bump = move |x: f64| (a * (-x * x / (2.0 * w * w)).exp(), 0.0);
    let mut out = vec![];
    let mut passed = true;
    let mut detail = vec![];
    for regime in [Regime::Ilw, Regime::Bo] {
        let params = ModelParams::new(regime, GAMMA, ALPHA).unwrap();
        let r = convergence_study(&params, &setup, bump).unwrap();
        passed &= r.is_spectral(MIN_ERROR_RATIO);
        let ratios: Vec<String> = r.error_ratios().iter().map(|x| format!("{x:.1}")).collect();
        detail.push(format!("{regime} ratios [{}]", ratios.join(", ")));
        out.push((regime, r));
    }
    detail.push(format!("need >= {MIN_ERROR_RATIO}"));
    report.line(7, "spectral self-convergence", passed, detail.join(", "));
    out
}

fn conservation(report: &mut Report, studies: &[(Regime, ConvergenceReport)], roundtrip: Option<f64>) {
    let mut rates: Vec<f64> = studies
        .iter()
        .map(|(_, r)| r.max_zero_mode_drift / CONVERGENCE_T)
        .collect();
    rates.extend(roundtrip);
    let worst = rates.iter().copied().fold(0.0, f64::max);
    report.line(
        8,
        "zero-mode conservation",
        roundtrip.is_some() && worst <= DRIFT_PER_TIME,
        format!("worst drift per unit time {worst:.2e} over {} runs (max {DRIFT_PER_TIME:.0e})", rates.len()),
    );
}

fn pseudo(i: usize, salt: f64) -> f64 {
    (1.0 + i as f64 * 0.7548776662 + salt).sin() * (0.3 + salt * i as f64).cos()
}

fn convolution(grid: &SpectralGrid, f: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
    let n = grid.len() as i64;
    let nyq = grid.nyquist_index();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for i in (0..grid.len()).filter(|&i| i != nyq) {
        for j in (0..grid.len()).filter(|&j| j != nyq) {
            let k = grid.mode(i) + grid.mode(j);
            if k.abs() < n / 2 {
                out[k.rem_euclid(n) as usize] += f[i] * g[j];
            }
        }
    }
    out
}

fn oracles(report: &mut Report) {
    let mut product_err = 0.0f64;
    for n in [8, 16, 32] {
        let grid = SpectralGrid::new(2.5, n).unwrap();
        let mut s = StatePair::from_nodal(
            &grid,
            &(0..n).map(|i| pseudo(i, 0.1)).collect::<Vec<_>>(),
            &(0..n).map(|i| pseudo(i, 0.9)).collect::<Vec<_>>(),
        )
        .unwrap();
        s.project(&grid);
        let got = grid.projected_product(&s.zeta, &s.u).unwrap();
        let want = convolution(&grid, &s.zeta, &s.u);
        for (a, b) in got.iter().zip(&want) {
            product_err = product_err.max((a - b).norm());
        }
    }

    let n = 8;
    let grid = SpectralGrid::new(3.0, n).unwrap();
    let params = ModelParams::new(Regime::Ilw, GAMMA, ALPHA).unwrap();
    let c = 0.52;
    let system = FixedPointSystem::new(params, grid.clone(), c).unwrap();
    let nodes = grid.nodes();
    let dense = DMatrix::<Complex64>::from_fn(2 * n, 2 * n, |row, col| {
        let (r, j) = (row / n, row % n);
        let (q, m) = (col / n, col % n);
        grid.wavenumbers()
            .iter()
            .map(|&k| {
                let s = assemble_s_mode(&params, c, k);
                Complex64::from_polar(s[r][q] / n as f64, k * (nodes[j] - nodes[m]))
            })
            .sum()
    });
    let rhs_z: Vec<f64> = (0..n).map(|i| pseudo(i, 0.3)).collect();
    let rhs_u: Vec<f64> = (0..n).map(|i| pseudo(i, 1.7)).collect();
    let b = DVector::from_iterator(2 * n, rhs_z.iter().chain(&rhs_u).map(|&v| Complex64::new(v, 0.0)));
    let x = dense.lu().solve(&b).unwrap();
    let fast = system
        .solve_s(&StatePair::from_nodal(&grid, &rhs_z, &rhs_u).unwrap())
        .unwrap();
    let (fz, fu) = fast.to_nodal(&grid).unwrap();
    let dense_err = fz
        .iter()
        .chain(&fu)
        .zip(x.iter())
        .map(|(a, b)| (Complex64::new(*a, 0.0) - b).norm())
        .fold(0.0, f64::max);

    let mut mpe_err = 0.0f64;
    for dim in 1..=6 {
        let m = DMatrix::from_fn(dim, dim, |i, j| 0.5 * pseudo(i * 7 + j, 0.2) / dim as f64);
        let b = DVector::from_fn(dim, |i, _| pseudo(i, 2.3));
        let fixed = (DMatrix::identity(dim, dim) - &m).lu().solve(&b).unwrap();
        let mut xs = vec![DVector::from_fn(dim, |i, _| pseudo(i, 4.1))];
        for _ in 0..=dim {
            let next = &m * xs.last().unwrap() + &b;
            xs.push(next);
        }
        let window = ExtrapolationWindow::new(xs.iter().map(|v| v.iter().copied().collect()).collect()).unwrap();
        let gamma = mpe_coefficients(&window).unwrap();
        let got = mpe_extrapolate(&window, &gamma).unwrap();
        for (a, b) in got.iter().zip(fixed.iter()) {
            mpe_err = mpe_err.max((a - b).abs());
        }
    }
    report.line(
        9,
        "oracle equivalences",
        product_err <= PRODUCT_TOL && dense_err <= DENSE_TOL && mpe_err <= MPE_TOL,
        format!(
            "product vs convolution {product_err:.1e} (max {PRODUCT_TOL:.0e}), solve_S vs dense {dense_err:.1e} (max {DENSE_TOL:.0e}), MPE affine {mpe_err:.1e} (max {MPE_TOL:.0e})"
        ),
    );
}

fn fixed_point(report: &mut Report, solved: &[Solved]) {
    let mut passed = true;
    let mut detail = vec![];
    for s in solved {
        let Ok((wave, _)) = &s.outcome else {
            passed = false;
            continue;
        };
        let config = SolitaryConfig::new(s.c).with_tol(TOL).with_max_iter(MAX_ITER);
        match petviashvili_iterate(&s.params, &s.grid, &config, wave) {
            Ok((_, trace)) => {
                let first = &trace.entries[0];
                passed &= (first.m_factor - 1.0).abs() <= M_TOL && first.residual <= TOL && trace.iterations_used == 0;
                detail.push(format!(
                    "{} |m0 - 1| {:.1e}, RES0 {:.2e}",
                    s.regime,
                    (first.m_factor - 1.0).abs(),
                    first.residual
                ));
            }
            Err(e) => {
                passed = false;
                detail.push(format!("{} {e}", s.regime));
            }
        }
    }
    report.line(10, "fixed-point sanity", passed, detail.join(", "));
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut report = Report { failures: 0 };
    let ilw = solve(Regime::Ilw, 0.52);
    let bo = solve(Regime::Bo, 0.57);
    generation(&mut report, 1, &ilw);
    generation(&mut report, 2, &bo);
    let solved = [ilw, bo];
    acceleration(&mut report, &solved);
    algebraic(&mut report, &solved);
    let drift = roundtrip(&mut report, &solved[0]);
    decay(&mut report, &solved);
    let studies = convergence(&mut report);
    conservation(&mut report, &studies, drift);
    oracles(&mut report);
    fixed_point(&mut report, &solved);
    println!(
        "acceptance: {} of 10 criteria passed in {:.1}s",
        10 - report.failures,
        start.elapsed().as_secs_f64()
    );
    if report.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
