//! Dependent LTRC design driven by an AR(1) covariate chain.
//!
//! ```text
//! X1_1 = 0.5 e_1,  X1_i = rho X1_{i-1} + 0.5 e_i
//! c_i  = 1 + 0.3 cos(pi X1_i)
//! X_i  = sin(pi X1_i) + phi1 c_i eps_i
//! S_i  = sin(pi X1_i) + 0.5 phi2 c_i + phi3 c_i eps~_i
//! Y_i  = min(X_i, S_i),  delta_i = 1{X_i <= S_i},  T_i ~ N(mu, 1)
//! ```
//!
//! A draw is retained when `T_i <= Y_i`. The chain keeps running through
//! rejected draws, so the retained sequence inherits its mixing.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Result, SrmError};
use crate::pl::{LtrcObservation, StepDistribution};
use crate::rng::{stream_rng, SimRng};
use crate::severity::{AcceptanceGuard, DEFAULT_ACCEPTANCE_FLOOR};
use crate::spectrum::Spectrum;

/// Allowed gap between the configured and the implied censoring percentage.
pub const PC_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependentModelConfig {
    pub rho: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
    /// Location of the truncation law; `None` until calibrated.
    pub mu: Option<f64>,
    /// Target `P(T <= Y)`.
    pub target_alpha: f64,
    /// Target `P(X > S)`.
    pub target_pc: f64,
}

impl Default for DependentModelConfig {
    fn default() -> Self {
        Self { rho: 0.1, phi1: 0.3, phi2: 1.087, phi3: 0.3, mu: None, target_alpha: 0.3, target_pc: 0.1 }
    }
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).unwrap()
}

impl DependentModelConfig {
    /// `P(X > S) = 1 - Phi(0.5 phi2 / sqrt(phi1^2 + phi3^2))`.
    pub fn censoring_rate(&self) -> f64 {
        let z = 0.5 * self.phi2 / (self.phi1 * self.phi1 + self.phi3 * self.phi3).sqrt();
        1.0 - std_normal().cdf(z)
    }

    /// `phi2` giving censoring rate `pc` for the current `phi1`, `phi3`.
    pub fn phi2_for_censoring(phi1: f64, phi3: f64, pc: f64) -> Result<f64> {
        if !(pc > 0.0 && pc < 1.0) {
            return Err(SrmError::Config(format!("censoring rate {pc} outside (0, 1)")));
        }
        Ok(2.0 * (phi1 * phi1 + phi3 * phi3).sqrt() * std_normal().inverse_cdf(1.0 - pc))
    }

    /// Checks parameter ranges; the censoring target is checked only when
    /// `check_pc` is set.
    pub fn validate(&self, check_pc: bool) -> Result<()> {
        if !(self.rho.abs() < 1.0) {
            return Err(SrmError::Config(format!("|rho| must be below 1, got {}", self.rho)));
        }
        for (name, v) in [("phi1", self.phi1), ("phi2", self.phi2), ("phi3", self.phi3)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SrmError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.target_alpha > 0.0 && self.target_alpha < 1.0) {
            return Err(SrmError::Config(format!("target_alpha {} outside (0, 1)", self.target_alpha)));
        }
        if let Some(mu) = self.mu {
            if !mu.is_finite() {
                return Err(SrmError::Config("mu must be finite".into()));
            }
        }
        if check_pc {
            let pc = self.censoring_rate();
            if (pc - self.target_pc).abs() > PC_TOLERANCE {
                return Err(SrmError::Config(format!(
                    "phi parameters imply censoring {pc:.4}, target is {:.4}",
                    self.target_pc
                )));
            }
        }
        Ok(())
    }
}

/// One latent draw of the chain, before truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatentDraw {
    pub x1: f64,
    pub x: f64,
    pub s: f64,
    /// Standard normal noise of the truncation variable: `T = mu + t_noise`.
    pub t_noise: f64,
}

impl LatentDraw {
    pub fn y(&self) -> f64 {
        self.x.min(self.s)
    }

    pub fn delta(&self) -> bool {
        self.x <= self.s
    }
}

/// Latent AR(1)-driven chain.
#[derive(Debug, Clone)]
pub struct DependentChain<'a, R: Rng> {
    cfg: &'a DependentModelConfig,
    rng: R,
    prev: Option<f64>,
}

impl<'a, R: Rng> DependentChain<'a, R> {
    pub fn new(cfg: &'a DependentModelConfig, rng: R) -> Self {
        Self { cfg, rng, prev: None }
    }

    pub fn next_draw(&mut self) -> LatentDraw {
        let e: f64 = StandardNormal.sample(&mut self.rng);
        let x1 = match self.prev {
            None => 0.5 * e,
            Some(p) => self.cfg.rho * p + 0.5 * e,
        };
        self.prev = Some(x1);
        let eps: f64 = StandardNormal.sample(&mut self.rng);
        let eps_s: f64 = StandardNormal.sample(&mut self.rng);
        let t_noise: f64 = StandardNormal.sample(&mut self.rng);
        let m = (PI * x1).sin();
        let c = 1.0 + 0.3 * (PI * x1).cos();
        LatentDraw {
            x1,
            x: m + self.cfg.phi1 * c * eps,
            s: m + 0.5 * self.cfg.phi2 * c + self.cfg.phi3 * c * eps_s,
            t_noise,
        }
    }
}

/// Exactly `n` retained observations of the dependent design.
pub fn sample_ltrc_dependent<R: Rng>(cfg: &DependentModelConfig, n: usize, rng: R) -> Result<Vec<LtrcObservation>> {
    if n == 0 {
        return Err(SrmError::Usage("sample size must be at least 1".into()));
    }
    cfg.validate(false)?;
    let mu = cfg.mu.ok_or_else(|| SrmError::Config("truncation location mu is not calibrated".into()))?;
    let mut chain = DependentChain::new(cfg, rng);
    let mut guard = AcceptanceGuard::new(DEFAULT_ACCEPTANCE_FLOOR);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        guard.attempt(out.len())?;
        let d = chain.next_draw();
        let t = mu + d.t_noise;
        let y = d.y();
        if t <= y {
            out.push(LtrcObservation { y, t, delta: d.delta() });
        }
    }
    Ok(out)
}

/// Finds the location `mu` with `P(mu + Z <= Y) = target` by bisection.
///
/// `ys` and `noise` are common random numbers, so the empirical rate is
/// exactly nonincreasing in `mu`. `bracket` must straddle the target.
pub fn calibrate_location(ys: &[f64], noise: &[f64], target: f64, tolerance: f64, bracket: (f64, f64)) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(SrmError::Calibration(format!("target {target} outside (0, 1)")));
    }
    if ys.is_empty() || ys.len() != noise.len() {
        return Err(SrmError::Calibration("need equally many draws and noise terms".into()));
    }
    // P(mu + Z <= Y) = P(Y - Z >= mu)
    let mut gaps: Vec<f64> = ys.iter().zip(noise).map(|(y, z)| y - z).collect();
    gaps.sort_by(f64::total_cmp);
    let m = gaps.len() as f64;
    let rate = |mu: f64| (gaps.len() - gaps.partition_point(|&g| g < mu)) as f64 / m;

    let (mut lo, mut hi) = bracket;
    if !(lo < hi) || rate(lo) < target || rate(hi) > target {
        return Err(SrmError::Calibration(format!(
            "interval [{lo}, {hi}] does not bracket target {target} (rates {:.4}, {:.4})",
            rate(lo),
            rate(hi)
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if rate(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    let mu = 0.5 * (lo + hi);
    if (rate(mu) - target).abs() > tolerance {
        return Err(SrmError::Calibration(format!(
            "best location {mu} reaches rate {:.4}, outside tolerance {tolerance}",
            rate(mu)
        )));
    }
    Ok(mu)
}

/// Calibration run settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSettings {
    pub draws: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub bracket: (f64, f64),
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        Self { draws: 200_000, seed: 0x5eed_ca1b, tolerance: 0.005, bracket: (-20.0, 20.0) }
    }
}

/// Calibrates `mu` so that `P(T <= Y)` matches `target_alpha`.
pub fn calibrate_truncation_location(
    cfg: &DependentModelConfig,
    target_alpha: f64,
    settings: &CalibrationSettings,
) -> Result<f64> {
    cfg.validate(false)?;
    let mut chain = DependentChain::new(cfg, stream_rng(settings.seed, 0));
    let (ys, noise): (Vec<f64>, Vec<f64>) = (0..settings.draws)
        .map(|_| {
            let d = chain.next_draw();
            (d.y(), d.t_noise)
        })
        .unzip();
    calibrate_location(&ys, &noise, target_alpha, settings.tolerance, settings.bracket)
}

/// Fraction of latent draws retained at location `mu`.
pub fn acceptance_rate(cfg: &DependentModelConfig, mu: f64, draws: usize, rng: SimRng) -> f64 {
    let mut chain = DependentChain::new(cfg, rng);
    let kept = (0..draws)
        .filter(|_| {
            let d = chain.next_draw();
            mu + d.t_noise <= d.y()
        })
        .count();
    kept as f64 / draws as f64
}

/// Monte Carlo oracle for the risk measure of the marginal law of `X`:
/// the empirical risk measure of `draws` consecutive chain values.
pub fn marginal_srm_oracle(
    cfg: &DependentModelConfig,
    spectra: &[Spectrum],
    draws: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    cfg.validate(false)?;
    let mut chain = DependentChain::new(cfg, stream_rng(seed, u64::MAX));
    let xs: Vec<f64> = (0..draws).map(|_| chain.next_draw().x).collect();
    let q = crate::pl::pl_quantile(&StepDistribution::ecdf(&xs)?)?;
    Ok(spectra.iter().map(|s| crate::estimators::srm_from_quantile(&q, s)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_censoring_settings() {
        let c = DependentModelConfig::default();
        assert!((c.censoring_rate() - 0.10).abs() < 1e-3);
        let c30 = DependentModelConfig { phi2: 0.445, target_pc: 0.3, ..c };
        assert!((c30.censoring_rate() - 0.30).abs() < 1e-3);
        c.validate(true).unwrap();
        let off = DependentModelConfig { phi2: 0.9, ..c };
        assert!(off.validate(true).is_err());
        let phi2 = DependentModelConfig::phi2_for_censoring(0.3, 0.3, 0.1).unwrap();
        assert!((phi2 - 1.087).abs() < 1e-3);
    }

    #[test]
    fn rejects_explosive_rho() {
        let c = DependentModelConfig { rho: 1.0, ..Default::default() };
        assert!(c.validate(false).is_err());
    }

    #[test]
    fn uncalibrated_config_cannot_sample() {
        let c = DependentModelConfig::default();
        assert!(sample_ltrc_dependent(&c, 10, stream_rng(1, 0)).is_err());
    }

    #[test]
    fn zero_rho_covariates_are_iid_normal() {
        let c = DependentModelConfig { rho: 0.0, ..Default::default() };
        let mut chain = DependentChain::new(&c, stream_rng(2, 0));
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| chain.next_draw().x1).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 * (0.25 / n as f64).sqrt());
        assert!((var - 0.25).abs() < 3.0 * 0.25 * (2.0 / n as f64).sqrt());
        let lag1 = xs.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>() / ((n - 1) as f64 * var);
        assert!(lag1.abs() < 3.0 / (n as f64).sqrt(), "{lag1}");
    }

    #[test]
    fn symmetric_toy_calibrates_to_zero() {
        // Y ~ N(0,1), T = mu + Z: P(T <= Y) = Phi(-mu / sqrt 2) = 1/2 at mu = 0
        let mut rng = stream_rng(4, 0);
        let n = 400_000;
        let ys: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let zs: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mu = calibrate_location(&ys, &zs, 0.5, 0.002, (-5.0, 5.0)).unwrap();
        assert!(mu.abs() < 0.01, "{mu}");
    }

    #[test]
    fn non_bracketing_interval_is_an_error() {
        let ys = vec![0.0; 10];
        let zs = vec![0.0; 10];
        assert!(matches!(calibrate_location(&ys, &zs, 0.3, 0.01, (5.0, 10.0)), Err(SrmError::Calibration(_))));
    }
}
