//! Spatial refinement study for a narrow Gaussian on a short period.

use ilwbo::harness::{convergence_study, ConvergenceSetup};
use ilwbo::{ModelParams, Regime};

fn main() -> ilwbo::Result<()> {
    let setup = ConvergenceSetup {
        half_length: 0.5,
        resolutions: vec![32, 64, 128],
        t_end: 0.5,
        dt: 1e-3,
    };
    let bump = |x: f64| 0.02 * (-x * x / (2.0 * 0.02f64.powi(2))).exp();
    for regime in [Regime::Ilw, Regime::Bo] {
        let params = ModelParams::new(regime, 0.8, 1.2)?;
        let report = convergence_study(&params, &setup, |x| (bump(x), 0.0))?;
        println!("{regime:?} (reference N = {})", report.reference_n);
        for (n, e) in report.resolutions.iter().zip(&report.errors) {
            println!("  N {n:4}  error {e:.3e}");
        }
        println!("  ratios {:?}", report.error_ratios());
        println!("  temporal error {:.2e}, stagnated {}", report.temporal_error, report.stagnated);
    }
    Ok(())
}
