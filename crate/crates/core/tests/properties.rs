use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

use ilwbo::accel::{mpe_coefficients, mpe_extrapolate, ExtrapolationWindow};
use ilwbo::solitary::FixedPointSystem;
use ilwbo::{ModelParams, Regime, SemiDiscrete, SpectralGrid, StatePair};

fn params() -> impl Strategy<Value = ModelParams> {
    (prop_oneof![Just(Regime::Ilw), Just(Regime::Bo)], 0.05f64..0.95, 1.01f64..4.0)
        .prop_map(|(r, g, a)| ModelParams::new(r, g, a).unwrap())
}

fn resolution() -> impl Strategy<Value = usize> {
    prop_oneof![Just(8usize), Just(16), Just(32)]
}

fn real_state(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-1.0f64..1.0, n),
        prop::collection::vec(-1.0f64..1.0, n),
    )
}

fn grid_and_state() -> impl Strategy<Value = (SpectralGrid, StatePair)> {
    (resolution(), 0.5f64..20.0).prop_flat_map(|(n, l)| {
        real_state(n).prop_map(move |(z, u)| {
            let grid = SpectralGrid::new(l, n).unwrap();
            let mut s = StatePair::from_nodal(&grid, &z, &u).unwrap();
            s.project(&grid);
            (grid, s)
        })
    })
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn convolution_oracle(grid: &SpectralGrid, f: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
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

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symbols_are_even_positive_and_bounded(p in params(), k in -200.0f64..200.0) {
        let (g, t, j) = (p.symbol_g(k), p.symbol_t(k), p.symbol_j(k));
        prop_assert_eq!(g, p.symbol_g(-k));
        prop_assert!(g >= 0.0);
        prop_assert!(t > 0.0 && t <= 1.0);
        let floor = (p.alpha - 1.0) / p.alpha;
        prop_assert!(j > floor - 1e-15 && j <= 1.0 + 1e-15);
        prop_assert!((j - (floor + t / p.alpha)).abs() < 1e-15);
        if p.regime == Regime::Ilw {
            prop_assert!(g >= p.alpha / p.gamma * (1.0f64).max(k.abs()) * (1.0 - 1e-14));
        }
    }

    #[test]
    fn ilw_symbol_increases_with_wavenumber(p in params(), a in 0.0f64..50.0, d in 1e-3f64..5.0) {
        prop_assert!(p.symbol_g(a + d) >= p.symbol_g(a));
    }

    #[test]
    fn product_matches_convolution((grid, s) in grid_and_state()) {
        let got = grid.projected_product(&s.zeta, &s.u).unwrap();
        let want = convolution_oracle(&grid, &s.zeta, &s.u);
        prop_assert!(max_diff(&got, &want) < 1e-12);
    }

    #[test]
    fn product_is_commutative_and_bilinear((grid, s) in grid_and_state(), a in -3.0f64..3.0) {
        let fg = grid.projected_product(&s.zeta, &s.u).unwrap();
        let gf = grid.projected_product(&s.u, &s.zeta).unwrap();
        prop_assert!(max_diff(&fg, &gf) < 1e-13);
        let sum: Vec<Complex64> = s.zeta.iter().zip(&s.u).map(|(x, y)| x * a + y).collect();
        let lhs = grid.projected_product(&sum, &s.u).unwrap();
        let uu = grid.projected_product(&s.u, &s.u).unwrap();
        let rhs: Vec<Complex64> = gf.iter().zip(&uu).map(|(x, y)| x * a + y).collect();
        prop_assert!(max_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn nodal_round_trip((grid, s) in grid_and_state()) {
        let (z, u) = s.to_nodal(&grid).unwrap();
        let back = StatePair::from_nodal(&grid, &z, &u).unwrap();
        prop_assert!(max_diff(&back.zeta, &s.zeta) < 1e-14);
        prop_assert!(max_diff(&back.u, &s.u) < 1e-14);
    }

    #[test]
    fn rhs_and_step_preserve_reality(p in params(), (grid, s) in grid_and_state()) {
        let system = SemiDiscrete::new(p, grid.clone()).unwrap();
        let scale = 1.0 + s.components().map(|c| c.norm()).fold(0.0, f64::max);
        let rhs = system.rhs(&s).unwrap();
        prop_assert!(rhs.hermitian_defect(&grid) < 1e-13 * scale * scale * grid.len() as f64);
        let dt = 0.1 * grid.spacing() / system.linear_speed_bound();
        let next = system.step(&s, dt).unwrap();
        prop_assert!(next.hermitian_defect(&grid) == 0.0);
        prop_assert_eq!(next.zeta[grid.nyquist_index()], Complex64::new(0.0, 0.0));
        let drift = (next.zeta[0] - s.zeta[0]).norm() + (next.u[0] - s.u[0]).norm();
        prop_assert!(drift < 1e-14 * scale);
    }

    #[test]
    fn solve_s_is_linear_inverse(
        p in params(),
        (grid, s) in grid_and_state(),
        factor in prop_oneof![-3.0f64..-1.2, 1.2f64..3.0],
        a in -2.0f64..2.0,
    ) {
        // above every linear phase speed, so S has no singular mode
        let c = factor * ((1.0 - p.gamma) / p.gamma).sqrt();
        let system = FixedPointSystem::new(p, grid.clone(), c).unwrap();
        let x = system.solve_s(&s).unwrap();
        let back = system.apply_s(&x).unwrap();
        prop_assert!(back.sub(&s).components().all(|v| v.norm() < 1e-12));
        let other = s.translate(&grid, 0.37).unwrap();
        let combo = system.solve_s(&s.add_scaled(a, &other)).unwrap();
        let parts = x.add_scaled(a, &system.solve_s(&other).unwrap());
        prop_assert!(combo.sub(&parts).components().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn translation_is_unitary_and_composes((grid, s) in grid_and_state(), a in -30.0f64..30.0, b in -30.0f64..30.0) {
        let moved = s.translate(&grid, a).unwrap();
        prop_assert!((moved.l2_norm(&grid) - s.l2_norm(&grid)).abs() <= 1e-13 * (1.0 + s.l2_norm(&grid)));
        let twice = moved.translate(&grid, b).unwrap();
        let once = s.translate(&grid, a + b).unwrap();
        prop_assert!(twice.sub(&once).components().all(|v| v.norm() < 1e-12));
        prop_assert!(twice.translate(&grid, -a - b).unwrap().sub(&s).components().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn mpe_is_exact_on_affine_maps(
        dim in 1usize..=6,
        entries in prop::collection::vec(-1.0f64..1.0, 36),
        shift in prop::collection::vec(-1.0f64..1.0, 6),
        start in prop::collection::vec(-1.0f64..1.0, 6),
    ) {
        let raw = DMatrix::from_fn(dim, dim, |i, j| entries[i * 6 + j]);
        let norm = raw.norm().max(1e-3);
        let m = raw * (0.6 / norm);
        let b = DVector::from_fn(dim, |i, _| shift[i]);
        let fixed = (DMatrix::identity(dim, dim) - &m).lu().solve(&b).unwrap();
        let mut xs = vec![DVector::from_fn(dim, |i, _| start[i])];
        for _ in 0..=dim {
            let next = &m * xs.last().unwrap() + &b;
            xs.push(next);
        }
        let window = ExtrapolationWindow::new(xs.iter().map(|v| v.iter().copied().collect()).collect()).unwrap();
        let gamma = mpe_coefficients(&window).unwrap();
        let x = mpe_extrapolate(&window, &gamma).unwrap();
        let err = x.iter().zip(fixed.iter()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-7 * (1.0 + fixed.norm()), "error {err}");
    }
}
