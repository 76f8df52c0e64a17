//! Computes a Benjamin-Ono solitary wave with the plain Petviashvili
//! iteration and prints its convergence history.

use ilwbo::solitary::{petviashvili_iterate, seed_profile, FixedPointSystem};
use ilwbo::{ModelParams, Regime, SolitaryConfig, SpectralGrid};

fn main() -> ilwbo::Result<()> {
    let params = ModelParams::new(Regime::Bo, 0.8, 1.2)?;
    let grid = SpectralGrid::new(64.0, 1024)?;
    let config = SolitaryConfig::new(0.57);
    let seed = seed_profile(&params, &grid, &config)?;
    let (wave, trace) = petviashvili_iterate(&params, &grid, &config, &seed)?;
    for e in trace.entries.iter().step_by(10) {
        println!("iter {:3}  RES {:.3e}  m {:.12}", e.iter, e.residual, e.m_factor);
    }
    let system = FixedPointSystem::new(params, grid.clone(), config.c)?;
    let (zeta, u) = wave.to_nodal(&grid)?;
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    println!("converged in {} iterations", trace.iterations_used);
    println!("min zeta {:.6}  min u {:.6}", min(&zeta), min(&u));
    println!("algebraic defect {:.2e}", system.algebraic_defect(&wave)?);
    Ok(())
}
