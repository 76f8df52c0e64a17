//! Feeds a computed solitary wave to the time integrator and checks that it
//! translates rigidly at its speed.

use ilwbo::harness::roundtrip_study;
use ilwbo::solitary::{petviashvili_iterate, seed_profile};
use ilwbo::{ModelParams, Regime, SemiDiscrete, SolitaryConfig, SpectralGrid};

fn main() -> ilwbo::Result<()> {
    let grid = SpectralGrid::new(64.0, 1024)?;
    for (regime, c) in [(Regime::Bo, 0.57), (Regime::Ilw, 0.52)] {
        let params = ModelParams::new(regime, 0.8, 1.2)?;
        let config = SolitaryConfig::new(c);
        let seed = seed_profile(&params, &grid, &config)?;
        let (wave, _) = petviashvili_iterate(&params, &grid, &config, &seed)?;
        let system = SemiDiscrete::new(params, grid.clone())?;
        let report = roundtrip_study(&system, &wave, c, 1.0, 1e-3)?;
        println!(
            "{regime:?}: deviation {:.3e} (dt/2 {:.3e}), defect floor {:.3e}, mean drift {:.1e}",
            report.deviation, report.deviation_half_dt, report.defect_floor, report.max_zero_mode_drift
        );
    }
    Ok(())
}
