//! Calibrates the truncation location of the dependent design and draws
//! one sample from it.

use srm_ltrc::dependent::{
    acceptance_rate, calibrate_truncation_location, sample_ltrc_dependent, CalibrationSettings, DependentModelConfig,
};
use srm_ltrc::rng::stream_rng;

fn main() -> srm_ltrc::Result<()> {
    let mut cfg = DependentModelConfig::default();
    println!("censoring rate at phi2 = {}: {:.4}", cfg.phi2, cfg.censoring_rate());

    let settings = CalibrationSettings::default();
    let mu = calibrate_truncation_location(&cfg, cfg.target_alpha, &settings)?;
    cfg.mu = Some(mu);
    let check = acceptance_rate(&cfg, mu, 100_000, stream_rng(1, 0));
    println!("mu = {mu:.4}, retained fraction on fresh draws = {check:.4}");

    let obs = sample_ltrc_dependent(&cfg, 200, stream_rng(2, 0))?;
    let censored = obs.iter().filter(|o| !o.delta).count();
    println!("sample of {}: {censored} censored", obs.len());
    Ok(())
}
