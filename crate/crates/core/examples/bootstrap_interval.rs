//! Percentile bootstrap intervals next to the normal-approximation interval.

use srm_ltrc::estimators::{EstimationContext, EstimatorKind};
use srm_ltrc::inference::{asymptotic_ci, bootstrap_ci, BootstrapPlan, VariancePlugin};
use srm_ltrc::mc::{Design, IidDesign, TruncationChoice};
use srm_ltrc::pl::LtrcSample;
use srm_ltrc::rng::stream_rng;
use srm_ltrc::severity::sample_ltrc_iid;
use srm_ltrc::spectrum::Spectrum;

fn main() -> srm_ltrc::Result<()> {
    let design = IidDesign::new(Design::IidExp, TruncationChoice::Random)?;
    let mut rng = stream_rng(11, 0);
    let sample = LtrcSample::new(sample_ltrc_iid(&design.model, &design.scheme, 300, &mut rng)?)?;
    let spectra: Vec<Spectrum> =
        [1.0, 5.0, 20.0].iter().map(|&k| Spectrum::exponential(k)).collect::<Result<_, _>>()?;
    let ctx = EstimationContext::new(f64::NEG_INFINITY, f64::INFINITY, 0.0);
    let plan = BootstrapPlan { replicates: 1000, seed: 11, ci_level: 0.9 };

    let boot = bootstrap_ci(&sample, &EstimatorKind::Prod, &spectra, &ctx, &plan)?;
    for (r, s) in boot.iter().zip(&spectra) {
        let normal = asymptotic_ci(&sample, s, &VariancePlugin::default(), 0.9)?;
        println!(
            "k={:<4} point {:>8.1}  bootstrap [{:>8.1}, {:>8.1}]  normal [{:>8.1}, {:>8.1}]",
            r.k,
            r.point,
            r.ci_low.unwrap(),
            r.ci_high.unwrap(),
            normal.ci_low.unwrap(),
            normal.ci_high.unwrap()
        );
    }
    Ok(())
}
