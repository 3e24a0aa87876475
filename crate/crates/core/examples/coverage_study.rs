//! Coverage of the 90% percentile interval at a reduced scale.

use srm_ltrc::mc::{run_coverage_experiment, Design, ExperimentPlan};

fn main() -> srm_ltrc::Result<()> {
    let plan = ExperimentPlan {
        n_grid: vec![100],
        k_grid: vec![1.0, 10.0],
        replicates: 200,
        ..ExperimentPlan::desk(Design::IidExp, 1)
    };
    let result = run_coverage_experiment(&plan, 200, 0.9, None)?;
    for c in &result.cells {
        println!(
            "n={} k={:<4} coverage {:.3} +- {:.3} ({} intervals, {} failed)",
            c.n, c.k, c.coverage, c.std_error, c.intervals, c.failures
        );
    }
    Ok(())
}
