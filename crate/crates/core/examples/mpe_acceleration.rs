//! Iteration counts of the cycled MPE-accelerated solver for window widths 1 to 4.

use ilwbo::harness::{acceleration_benchmark, acceleration_ordering};
use ilwbo::solitary::seed_profile;
use ilwbo::{ModelParams, Regime, SolitaryConfig, SpectralGrid};

fn main() -> ilwbo::Result<()> {
    let grid = SpectralGrid::new(64.0, 1024)?;
    for (regime, c) in [(Regime::Bo, 0.57), (Regime::Ilw, 0.52)] {
        let params = ModelParams::new(regime, 0.8, 1.2)?;
        let base = SolitaryConfig::new(c);
        let seed = seed_profile(&params, &grid, &base)?;
        let runs = acceleration_benchmark(&params, &grid, &base, &seed, &[1, 2, 3, 4]);
        println!("{regime:?}, c = {c}");
        for run in &runs {
            let count = run.row.iterations.map_or("failed".into(), |i| i.to_string());
            println!("  mw {}  iterations {count:>6}  {:.3}s", run.row.mw, run.row.seconds);
        }
        let rows: Vec<_> = runs.into_iter().map(|r| r.row).collect();
        println!("  ordering {:?}", acceleration_ordering(&rows));
    }
    Ok(())
}
