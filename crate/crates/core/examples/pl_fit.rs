//! Fits the product-limit estimator to a handful of truncated, censored
//! losses and prints the fitted step function and its quantiles.

use srm_ltrc::pl::{fit_pl, pl_quantile, LtrcObservation, LtrcSample};

fn main() -> srm_ltrc::Result<()> {
    // (loss, entry threshold, fully observed?)
    let rows = [
        (1200.0, 1000.0, true),
        (1500.0, 1000.0, true),
        (2500.0, 500.0, false),
        (1800.0, 1500.0, true),
        (3100.0, 1000.0, true),
        (2500.0, 2000.0, true),
    ];
    let obs = rows.iter().map(|&(y, t, d)| LtrcObservation::new(y, t, d)).collect::<srm_ltrc::Result<Vec<_>>>()?;
    let sample = LtrcSample::new(obs)?;

    let dist = fit_pl(&sample);
    println!("x,F(x),at_risk");
    for (&x, &f) in dist.knots().iter().zip(dist.values()) {
        println!("{x},{f:.6},{}", sample.risk_set_count(x));
    }
    if dist.zero_factors() > 0 {
        println!("warning: {} risk sets of size one absorbed the tail", dist.zero_factors());
    }

    let q = pl_quantile(&dist)?;
    for p in [0.25, 0.5, 0.75, 0.9, 1.0] {
        println!("q({p}) = {}", q.eval(p));
    }
    Ok(())
}
