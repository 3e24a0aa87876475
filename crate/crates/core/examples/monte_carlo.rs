//! A small accuracy study. Pass a replicate count to scale it up.

use srm_ltrc::estimators::EstimatorKind;
use srm_ltrc::mc::{emit_rmse_ratio_log, run_iid_experiment, Design, ExperimentPlan};

fn main() -> srm_ltrc::Result<()> {
    let replicates = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let plan = ExperimentPlan {
        n_grid: vec![30, 100],
        k_grid: vec![1.0, 20.0],
        replicates,
        ..ExperimentPlan::desk(Design::IidExp, 2024)
    };
    let result = run_iid_experiment(&plan)?;
    println!("{:<10} {:>5} {:>5} {:>10} {:>10} {:>10} {:>10}", "estimator", "n", "k", "mean", "sd", "rmse", "truth");
    for c in &result.cells {
        println!(
            "{:<10} {:>5} {:>5} {:>10.1} {:>10.1} {:>10.1} {:>10.1}",
            c.estimator, c.n, c.k, c.mean, c.sd, c.rmse, c.theoretical
        );
    }
    let (rows, flagged) = emit_rmse_ratio_log(&result, &EstimatorKind::Prod)?;
    println!("{} log-ratio rows, {} cells with failed replicates", rows.len(), flagged.len());
    Ok(())
}
