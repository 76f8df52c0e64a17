//! Runs the ILW solitary-wave iteration at two resolutions and compares the
//! resulting profiles.

use ilwbo::accel::cycled_solve;
use ilwbo::solitary::{seed_profile, FixedPointSystem};
use ilwbo::{ModelParams, Regime, SolitaryConfig, SpectralGrid};

fn main() -> ilwbo::Result<()> {
    let params = ModelParams::new(Regime::Ilw, 0.8, 1.2)?;
    let config = SolitaryConfig::new(0.52).with_max_iter(2000);
    for n in [1024, 2048] {
        let grid = SpectralGrid::new(64.0, n)?;
        let seed = seed_profile(&params, &grid, &config)?;
        let (wave, trace) = cycled_solve(&params, &grid, &config, &seed)?;
        let system = FixedPointSystem::new(params, grid.clone(), config.c)?;
        let (zeta, u) = wave.to_nodal(&grid)?;
        let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        println!(
            "N = {n:4}: {} iterations, transient {}, min zeta {:.4}, min u {:.4}, algebraic defect {:.2e}",
            trace.iterations_used,
            trace.transient_length(),
            min(&zeta),
            min(&u),
            system.algebraic_defect(&wave)?
        );
    }
    Ok(())
}
