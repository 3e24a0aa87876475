//! Asymptotic variance, Edgeworth-corrected distribution and bootstrap
//! intervals for the product-limit risk measure estimator.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Result, SrmError};
use crate::estimators::{EstimateReport, EstimationContext, EstimatorKind, KernelShape, PreparedEstimator};
use crate::pl::{fit_pl, pl_quantile, LtrcSample, QuantileFunction, StepDistribution};
use crate::quadrature::{integrate, QuadratureConfig};
use crate::rng::stream_rng;
use crate::spectrum::Spectrum;

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).unwrap()
}

/// `sum over uncensored y_i <= x of (1/n) / C_n(y_i)^power`.
fn risk_set_sum(sample: &LtrcSample, x: f64, power: i32) -> Result<f64> {
    let n = sample.len() as f64;
    let mut total = 0.0;
    for o in sample.observations().iter().filter(|o| o.delta && o.y <= x) {
        let c = sample.risk_set_fraction(o.y);
        if c <= 0.0 {
            return Err(SrmError::DegenerateRiskSet(o.y));
        }
        total += c.powi(-power) / n;
    }
    Ok(total)
}

/// Which reading of the double-integral kernel to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceForm {
    /// `K(u, v) = (1 - u)(1 - v) Gamma(q(min(u, v)))`, which reduces to
    /// `min(u, v) - uv` without truncation or censoring.
    #[default]
    Covariance,
    /// `K(u, v) = (1 - u)(1 - v) [Gamma(q(u)) Gamma(q(v)) - uv]`.
    Literal,
}

/// Settings of the plug-in variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariancePlugin {
    /// Kernel density bandwidth; `None` uses `n^{-1/5} IQR / 1.349`.
    pub density_bandwidth: Option<f64>,
    /// The double integral runs over `[clip, 1 - clip]^2`.
    pub clip: f64,
    pub density_floor: f64,
    pub form: VarianceForm,
}

impl Default for VariancePlugin {
    fn default() -> Self {
        Self { density_bandwidth: None, clip: 1e-3, density_floor: 1e-12, form: VarianceForm::Covariance }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    /// Clamped at zero.
    pub sigma2: f64,
    pub raw: f64,
    pub clamped: bool,
    pub bandwidth: f64,
}

/// Epanechnikov density estimate of a step distribution.
#[derive(Debug, Clone)]
pub struct JumpDensity {
    atoms: Vec<(f64, f64)>,
    h: f64,
}

impl JumpDensity {
    pub fn new(dist: &StepDistribution, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(SrmError::Config(format!("density bandwidth must be positive, got {h}")));
        }
        let atoms = dist.jumps().filter(|&(_, w)| w > 0.0).collect();
        Ok(Self { atoms, h })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = KernelShape::Epanechnikov;
        self.atoms.iter().map(|&(z, w)| w * k.density((x - z) / self.h)).sum::<f64>() / self.h
    }
}

/// `n^{-1/5} IQR / 1.349` of the fitted distribution, falling back to its
/// standard deviation when the quartiles coincide.
pub fn default_bandwidth(dist: &StepDistribution, q: &QuantileFunction, n: usize) -> f64 {
    let mut spread = (q.eval(0.75) - q.eval(0.25)) / 1.349;
    if spread <= 0.0 {
        let mean: f64 = dist.jumps().map(|(z, w)| z * w).sum();
        spread = dist.jumps().map(|(z, w)| w * (z - mean).powi(2)).sum::<f64>().sqrt();
    }
    (n as f64).powf(-0.2) * spread
}

/// Plug-in asymptotic variance of `sqrt(n) (M_hat - M)`.
///
/// `F^{-1}` is a step function, so `f(F^{-1}(u))` and `Gamma(F^{-1}(u))` are
/// constant on each quantile segment and the clipped double integral reduces
/// to sums of one-dimensional segment integrals.
pub fn estimate_sigma2(sample: &LtrcSample, spectrum: &Spectrum, plugin: &VariancePlugin) -> Result<VarianceEstimate> {
    let dist = fit_pl(sample);
    let q = pl_quantile(&dist)?;
    if q.segment_values().len() == 1 {
        return Ok(VarianceEstimate { sigma2: 0.0, raw: 0.0, clamped: false, bandwidth: 0.0 });
    }
    let h = match plugin.density_bandwidth {
        Some(h) => h,
        None => default_bandwidth(&dist, &q, sample.len()),
    };
    let density = JumpDensity::new(&dist, h)?;
    let (lo, hi) = (plugin.clip, 1.0 - plugin.clip);

    let mut a = Vec::new();
    let mut gamma = Vec::new();
    let mut b = Vec::new();
    let quad = QuadratureConfig { abs_tol: 1e-15, rel_tol: 1e-12, max_intervals: 200 };
    for (p0, p1, x) in q.segments() {
        let (s0, s1) = (p0.max(lo), p1.min(hi));
        if s1 <= s0 {
            continue;
        }
        let f = density.eval(x);
        if f < plugin.density_floor {
            return Err(SrmError::SingularDensity { value: f, at: x, floor: plugin.density_floor });
        }
        a.push(spectrum.linear_segment_integral(s0, s1) / f);
        gamma.push(risk_set_sum(sample, x, 2)?);
        if plugin.form == VarianceForm::Literal {
            let uu = integrate(|u| u * (1.0 - u) * spectrum.density(u), s0, s1, &quad)?.value;
            b.push(uu / f);
        }
    }

    let raw = match plugin.form {
        VarianceForm::Covariance => {
            // sum_{i,j} Gamma_{min(i,j)} A_i A_j
            let mut suffix = 0.0;
            let mut total = 0.0;
            for i in (0..a.len()).rev() {
                total += gamma[i] * a[i] * (a[i] + 2.0 * suffix);
                suffix += a[i];
            }
            total
        }
        VarianceForm::Literal => {
            let ga: f64 = gamma.iter().zip(&a).map(|(g, a)| g * a).sum();
            let bb: f64 = b.iter().sum();
            ga * ga - bb * bb
        }
    };
    if !raw.is_finite() {
        return Err(SrmError::Numerical("variance plug-in is not finite".into()));
    }
    Ok(VarianceEstimate { sigma2: raw.max(0.0), raw, clamped: raw < 0.0, bandwidth: h })
}

/// Quantile-level quantities entering the Edgeworth correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeworthDiagnostics {
    pub level: f64,
    pub sigma01_sq: f64,
    pub kappa3: f64,
    pub sigma0_sq: f64,
    /// `(1 - x)^2 sigma01^2`; kept for reference only.
    pub sigma1_sq: f64,
    pub n: usize,
}

/// Plug-in `sigma01^2`, `kappa3` and `sigma0^2` at level `x`.
pub fn edgeworth_diagnostics(sample: &LtrcSample, x: f64) -> Result<EdgeworthDiagnostics> {
    if !(0.0..1.0).contains(&x) {
        return Err(SrmError::Domain(format!("level {x} outside [0, 1)")));
    }
    let q = pl_quantile(&fit_pl(sample))?;
    let (sigma01_sq, third) = if x == 0.0 {
        (0.0, 0.0)
    } else {
        let xq = q.eval(x);
        if xq >= sample.max_y() {
            return Err(SrmError::Domain(format!("quantile {xq} at level {x} reaches the largest observation")));
        }
        (risk_set_sum(sample, xq, 2)?, risk_set_sum(sample, xq, 3)?)
    };
    let kappa3 = if sigma01_sq > 0.0 { (-7.5 * sigma01_sq * sigma01_sq + third) / sigma01_sq.powf(1.5) } else { 0.0 };
    Ok(EdgeworthDiagnostics {
        level: x,
        sigma01_sq,
        kappa3,
        sigma0_sq: risk_set_sum(sample, f64::INFINITY, 2)?,
        sigma1_sq: (1.0 - x).powi(2) * sigma01_sq,
        n: sample.len(),
    })
}

/// `E_n2(y) = Phi(y) - n^{-1/2} phi0(y) [kappa3/6 (y^2 - 1) + sigma01/2]`.
pub fn edgeworth_cdf(diag: &EdgeworthDiagnostics, y: f64) -> f64 {
    let norm = std_normal();
    if y.is_infinite() {
        return norm.cdf(y);
    }
    let correction = diag.kappa3 / 6.0 * (y * y - 1.0) + 0.5 * diag.sigma01_sq.sqrt();
    norm.cdf(y) - norm.pdf(y) * correction / (diag.n as f64).sqrt()
}

/// `max |E_n2(y) - Phi(y)|` over a grid.
pub fn edgeworth_sup_deviation(diag: &EdgeworthDiagnostics, grid: impl IntoIterator<Item = f64>) -> f64 {
    let norm = std_normal();
    grid.into_iter().map(|y| (edgeworth_cdf(diag, y) - norm.cdf(y)).abs()).fold(0.0, f64::max)
}

/// Bootstrap settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapPlan {
    pub replicates: usize,
    pub seed: u64,
    pub ci_level: f64,
}

impl Default for BootstrapPlan {
    fn default() -> Self {
        Self { replicates: 1000, seed: 0, ci_level: 0.90 }
    }
}

/// Fewest replicates for which an interval is reported.
pub const MIN_INTERVAL_REPLICATES: usize = 50;
/// Largest tolerated fraction of failed replicates.
pub const MAX_DROP_FRACTION: f64 = 0.10;

impl BootstrapPlan {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(SrmError::Config("bootstrap needs at least one replicate".into()));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(SrmError::Config(format!("confidence level {} outside (0, 1)", self.ci_level)));
        }
        Ok(())
    }
}

/// Percentile interval `[s_(ceil(B a)), s_(ceil(B (1 - a)))]`, `a = (1 - level)/2`.
pub fn percentile_interval(sorted: &[f64], level: f64) -> (f64, f64) {
    let b = sorted.len();
    let tail = 0.5 * (1.0 - level);
    let pick = |p: f64| {
        let idx = ((b as f64 * p).ceil() as usize).clamp(1, b);
        sorted[idx - 1]
    };
    (pick(tail), pick(1.0 - tail))
}

/// Draws `n` indices with replacement.
pub fn resample_indices<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Percentile bootstrap for each spectrum. Replicate `r` uses stream `r` of
/// `plan.seed`, so results do not depend on the thread count.
pub fn bootstrap_ci(
    sample: &LtrcSample,
    kind: &EstimatorKind,
    spectra: &[Spectrum],
    ctx: &EstimationContext,
    plan: &BootstrapPlan,
) -> Result<Vec<EstimateReport>> {
    plan.validate()?;
    let point = PreparedEstimator::prepare(kind, sample, ctx)?;
    let n = sample.len();

    let replicates: Vec<Vec<Option<f64>>> = (0..plan.replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(plan.seed, r as u64);
            let idx = resample_indices(n, &mut rng);
            let fitted = sample.select(&idx).and_then(|s| PreparedEstimator::prepare(kind, &s, ctx));
            match fitted {
                Ok(p) => spectra.iter().map(|s| p.estimate(s).ok()).collect(),
                Err(_) => vec![None; spectra.len()],
            }
        })
        .collect();

    let mut reports = Vec::with_capacity(spectra.len());
    for (j, spectrum) in spectra.iter().enumerate() {
        let mut values: Vec<f64> = replicates.iter().filter_map(|r| r[j]).collect();
        let dropped = plan.replicates - values.len();
        if dropped as f64 > MAX_DROP_FRACTION * plan.replicates as f64 {
            return Err(SrmError::BootstrapFailures { dropped, total: plan.replicates });
        }
        values.sort_by(f64::total_cmp);
        let std_error = (values.len() >= 2).then(|| {
            let m = values.iter().sum::<f64>() / values.len() as f64;
            (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
        });
        let (ci_low, ci_high) = if plan.replicates >= MIN_INTERVAL_REPLICATES {
            let (l, h) = percentile_interval(&values, plan.ci_level);
            (Some(l), Some(h))
        } else {
            (None, None)
        };
        reports.push(EstimateReport {
            estimator: *kind,
            k: spectrum.k().unwrap_or(0.0),
            point: point.estimate(spectrum)?,
            std_error,
            ci_low,
            ci_high,
            n_effective: n,
        });
    }
    Ok(reports)
}

/// `point +- z_{(1 + level)/2} se`.
pub fn normal_interval(point: f64, se: f64, level: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&level) {
        return Err(SrmError::Domain(format!("confidence level {level} outside [0, 1)")));
    }
    let z = std_normal().inverse_cdf(0.5 * (1.0 + level));
    Ok((point - z * se, point + z * se))
}

/// Normal-limit interval for the product-limit estimator.
pub fn asymptotic_ci(
    sample: &LtrcSample,
    spectrum: &Spectrum,
    plugin: &VariancePlugin,
    level: f64,
) -> Result<EstimateReport> {
    let point = crate::estimators::estimate_prod(sample, spectrum)?;
    let var = estimate_sigma2(sample, spectrum, plugin)?;
    let se = (var.sigma2 / sample.len() as f64).sqrt();
    let (lo, hi) = normal_interval(point, se, level)?;
    Ok(EstimateReport {
        estimator: EstimatorKind::Prod,
        k: spectrum.k().unwrap_or(0.0),
        point,
        std_error: Some(se),
        ci_low: Some(lo),
        ci_high: Some(hi),
        n_effective: sample.len(),
    })
}
