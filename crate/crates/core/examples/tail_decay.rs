//! Fits exponential and algebraic decay laws to the tails of computed waves.

use ilwbo::harness::{decay_fit, DecayModel, DecayWindow};
use ilwbo::solitary::{petviashvili_iterate, seed_profile};
use ilwbo::{ModelParams, Regime, SolitaryConfig, SpectralGrid};

fn main() -> ilwbo::Result<()> {
    let grid = SpectralGrid::new(64.0, 1024)?;
    for (regime, c) in [(Regime::Bo, 0.57), (Regime::Ilw, 0.52)] {
        let params = ModelParams::new(regime, 0.8, 1.2)?;
        let config = SolitaryConfig::new(c);
        let seed = seed_profile(&params, &grid, &config)?;
        let (wave, _) = petviashvili_iterate(&params, &grid, &config, &seed)?;
        let (zeta, _) = wave.to_nodal(&grid)?;
        let window = DecayWindow::for_grid(&grid, config.seed_width);
        println!("{regime:?}, c = {c}");
        for model in [DecayModel::Exponential, DecayModel::Algebraic] {
            let fit = decay_fit(&grid, &zeta, &window, model)?;
            println!(
                "  {model:?}: rate {:.4}, R^2 {:.4}, {} points",
                fit.fitted_rate, fit.fit_quality, fit.points
            );
        }
    }
    Ok(())
}
