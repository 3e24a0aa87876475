//! One synthetic sample, every estimator.

use srm_ltrc::estimators::{EstimatorKind, PreparedEstimator};
use srm_ltrc::mc::{Design, IidDesign, TruncationChoice};
use srm_ltrc::pl::LtrcSample;
use srm_ltrc::rng::stream_rng;
use srm_ltrc::severity::{ground_up_srm, sample_ltrc_iid};
use srm_ltrc::spectrum::Spectrum;

fn main() -> srm_ltrc::Result<()> {
    let design = IidDesign::new(Design::IidPareto, TruncationChoice::Random)?;
    let mut rng = stream_rng(7, 0);
    let sample = LtrcSample::new(sample_ltrc_iid(&design.model, &design.scheme, 500, &mut rng)?)?;
    println!("n = {}, censored = {}", sample.len(), sample.censored_count());

    let ctx = design.context();
    let ks = [1.0, 10.0, 100.0];
    print!("{:<12}", "estimator");
    for k in ks {
        print!("{:>12}", format!("k={k}"));
    }
    println!();
    for kind in EstimatorKind::standard_set(design.family()) {
        print!("{:<12}", kind.label());
        match PreparedEstimator::prepare(&kind, &sample, &ctx) {
            Ok(est) => {
                for k in ks {
                    match est.estimate(&Spectrum::exponential(k)?) {
                        Ok(v) => print!("{v:>12.1}"),
                        Err(_) => print!("{:>12}", "-"),
                    }
                }
            }
            Err(e) => print!("  {e}"),
        }
        println!();
    }
    print!("{:<12}", "truth");
    for k in ks {
        print!("{:>12.1}", ground_up_srm(&design.model, &Spectrum::exponential(k)?)?);
    }
    println!();
    Ok(())
}
