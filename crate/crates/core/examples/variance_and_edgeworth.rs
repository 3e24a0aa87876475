//! Plug-in asymptotic variance and the Edgeworth correction at one level.

use srm_ltrc::inference::{
    edgeworth_cdf, edgeworth_diagnostics, edgeworth_sup_deviation, estimate_sigma2, VariancePlugin,
};
use srm_ltrc::mc::{Design, IidDesign, TruncationChoice};
use srm_ltrc::pl::LtrcSample;
use srm_ltrc::rng::stream_rng;
use srm_ltrc::severity::sample_ltrc_iid;
use srm_ltrc::spectrum::Spectrum;

fn main() -> srm_ltrc::Result<()> {
    let design = IidDesign::new(Design::IidExp, TruncationChoice::Random)?;
    let mut rng = stream_rng(5, 0);
    let sample = LtrcSample::new(sample_ltrc_iid(&design.model, &design.scheme, 2000, &mut rng)?)?;

    for k in [1.0, 5.0, 20.0] {
        let v = estimate_sigma2(&sample, &Spectrum::exponential(k)?, &VariancePlugin::default())?;
        let se = (v.sigma2 / sample.len() as f64).sqrt();
        println!("k={k:<4} sigma^2 = {:.4e}  se = {se:.2}  (density bandwidth {:.1})", v.sigma2, v.bandwidth);
    }

    let diag = edgeworth_diagnostics(&sample, 0.5)?;
    println!("level 0.5: sigma01^2 = {:.4}, kappa3 = {:.4}", diag.sigma01_sq, diag.kappa3);
    for y in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        println!("  E({y:+}) = {:.5}", edgeworth_cdf(&diag, y));
    }
    let grid = || (0..=1000).map(|i| -5.0 + i as f64 * 0.01);
    println!("sup |E - Phi| = {:.3e}", edgeworth_sup_deviation(&diag, grid()));
    Ok(())
}
