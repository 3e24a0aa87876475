//! Spectral risk measure estimators: product-limit plug-in, empirical,
//! kernel-smoothed, maximum likelihood and percentile matching.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SrmError};
use crate::pl::{fit_pl, pl_quantile, LtrcSample, QuantileFunction, StepDistribution};
use crate::quadrature::{integrate, QuadratureConfig};
use crate::severity::Family;
use crate::spectrum::Spectrum;

/// `int_0^1 phi(u) q(u) du` for a step quantile, segment by segment.
pub fn srm_from_quantile(q: &QuantileFunction, spectrum: &Spectrum) -> f64 {
    q.segments().map(|(a, b, v)| v * spectrum.segment_integral(a, b)).sum()
}

/// Smoothing kernel on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelShape {
    /// `K(v) = 0.75 (1 - v^2)`
    #[default]
    Epanechnikov,
    /// `K(v) = 0.5`
    Uniform,
}

impl KernelShape {
    /// `int_{-1}^{v} K`, clamped to `[0, 1]`.
    pub fn cdf(&self, v: f64) -> f64 {
        if v <= -1.0 {
            return 0.0;
        }
        if v >= 1.0 {
            return 1.0;
        }
        match self {
            KernelShape::Epanechnikov => 0.5 + 0.75 * v - 0.25 * v * v * v,
            KernelShape::Uniform => 0.5 + 0.5 * v,
        }
    }

    pub fn density(&self, v: f64) -> f64 {
        if v.abs() > 1.0 {
            return 0.0;
        }
        match self {
            KernelShape::Epanechnikov => 0.75 * (1.0 - v * v),
            KernelShape::Uniform => 0.5,
        }
    }
}

impl std::str::FromStr for KernelShape {
    type Err = SrmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "epanechnikov" | "epa" => Ok(KernelShape::Epanechnikov),
            "uniform" | "rectangular" => Ok(KernelShape::Uniform),
            other => Err(SrmError::Config(format!("unknown kernel `{other}`"))),
        }
    }
}

pub const DEFAULT_BANDWIDTH: f64 = 0.4;
pub const DEFAULT_P1: f64 = 0.5;

/// Estimator selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum EstimatorKind {
    Prod,
    Emp,
    Kernel { bandwidth: f64, shape: KernelShape },
    Ml { family: Family },
    Pm { family: Family, p1: f64 },
}

impl EstimatorKind {
    pub fn kernel() -> Self {
        EstimatorKind::Kernel { bandwidth: DEFAULT_BANDWIDTH, shape: KernelShape::Epanechnikov }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            EstimatorKind::Kernel { bandwidth, .. } if !(bandwidth > 0.0 && bandwidth.is_finite()) => {
                Err(SrmError::Config(format!("bandwidth must be positive, got {bandwidth}")))
            }
            EstimatorKind::Pm { p1, .. } if !(p1 > 0.0 && p1 < 1.0) => {
                Err(SrmError::Config(format!("p1 must lie in (0, 1), got {p1}")))
            }
            _ => Ok(()),
        }
    }

    /// Short label used in tables and CSV output.
    pub fn label(&self) -> String {
        match self {
            EstimatorKind::Prod => "prod".into(),
            EstimatorKind::Emp => "emp".into(),
            EstimatorKind::Kernel { .. } => "kernel".into(),
            EstimatorKind::Ml { family } => format!("ml-{family}"),
            EstimatorKind::Pm { family, .. } => format!("pm-{family}"),
        }
    }

    /// The comparison set: Prod, EMP, kernel, then ML and PM for `family`.
    pub fn standard_set(family: Family) -> Vec<Self> {
        vec![
            EstimatorKind::Prod,
            EstimatorKind::Emp,
            EstimatorKind::kernel(),
            EstimatorKind::Ml { family },
            EstimatorKind::Pm { family, p1: DEFAULT_P1 },
        ]
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = SrmError;

    /// `prod`, `emp`, `kernel`, `ml-exp`, `ml-pareto`, `pm-exp`, `pm-pareto`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "prod" | "pl" => return Ok(EstimatorKind::Prod),
            "emp" => return Ok(EstimatorKind::Emp),
            "kernel" => return Ok(EstimatorKind::kernel()),
            _ => {}
        }
        if let Some((head, fam)) = s.split_once('-') {
            let family: Family = fam.parse()?;
            match head {
                "ml" => return Ok(EstimatorKind::Ml { family }),
                "pm" => return Ok(EstimatorKind::Pm { family, p1: DEFAULT_P1 }),
                _ => {}
            }
        }
        Err(SrmError::Config(format!(
            "unknown estimator `{s}` (expected prod, emp, kernel, ml-exp, ml-pareto, pm-exp or pm-pareto)"
        )))
    }
}

/// How fitted parametric quantiles are indexed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarConvention {
    /// `x0 - theta ln(1 - p)` and `x0 (1 - p)^{-1/alpha}`.
    #[default]
    Quantile,
    /// `x0 - theta ln(p)` and `x0 p^{-1/alpha}`, decreasing in `p`.
    Literal,
}

/// Numerator of the exponential percentile-matching estimator.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "reading", rename_all = "snake_case")]
pub enum PmReading {
    /// `(d - x_[np1]) / ln(1 - p1)`
    #[default]
    Deductible,
    /// `(theta - x_[np1]) / ln(1 - p1)` with a supplied `theta`.
    Literal { theta: f64 },
}

/// Thresholds the parametric estimators need from the sampling design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationContext {
    /// Deductible `d`; the percentile-matching displays are anchored here.
    pub truncation: f64,
    /// Policy limit `u`, possibly `+inf`.
    pub limit: f64,
    /// Support endpoint `x0` of the fitted ground-up law.
    pub anchor: f64,
    pub var_convention: VarConvention,
    pub pm_reading: PmReading,
}

impl EstimationContext {
    pub fn new(truncation: f64, limit: f64, anchor: f64) -> Self {
        Self { truncation, limit, anchor, var_convention: VarConvention::default(), pm_reading: PmReading::default() }
    }
}

/// A fitted shifted exponential (`param = theta`) or Pareto (`param = alpha`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParametricFit {
    pub family: Family,
    pub anchor: f64,
    pub param: f64,
    pub convention: VarConvention,
}

impl ParametricFit {
    pub fn var(&self, p: f64) -> f64 {
        let tail = match self.convention {
            VarConvention::Quantile => 1.0 - p,
            VarConvention::Literal => p,
        };
        match self.family {
            Family::ShiftedExponential => self.anchor - self.param * tail.ln(),
            Family::ParetoI => self.anchor * tail.powf(-1.0 / self.param),
        }
    }

    /// `int_0^1 phi(u) VaR_u du` by adaptive quadrature with analytic end
    /// pieces.
    pub fn srm(&self, spectrum: &Spectrum) -> Result<f64> {
        if self.family == Family::ParetoI && self.param <= 1.0 {
            return Err(SrmError::Estimation(format!("fitted Pareto shape {} has no finite mean", self.param)));
        }
        const EDGE: f64 = 1e-12;
        let quad = QuadratureConfig::relative(1e-10);
        let mut total = 0.0;
        for (a, b) in [(EDGE, 0.5), (0.5, 1.0 - EDGE)] {
            // u = a + s^2 near the lower edge, u = b - s^2 near the upper
            let piece = if b <= 0.5 {
                integrate(|s| 2.0 * s * spectrum.density(a + s * s) * self.var(a + s * s), 0.0, (b - a).sqrt(), &quad)?
            } else {
                integrate(|s| 2.0 * s * spectrum.density(b - s * s) * self.var(b - s * s), 0.0, (b - a).sqrt(), &quad)?
            };
            total += piece.value;
        }
        // phi is continuous at both ends; the VaR integral over each edge is
        // elementary
        let edge_mass = |w: f64| -> f64 {
            // int over a width-w interval at the singular end
            match self.family {
                Family::ShiftedExponential => w * (self.anchor + self.param * (1.0 - w.ln())),
                Family::ParetoI => {
                    let r = 1.0 - 1.0 / self.param;
                    self.anchor * w.powf(r) / r
                }
            }
        };
        let regular_mass = |w: f64| -> f64 {
            match self.family {
                Family::ShiftedExponential => w * self.anchor,
                Family::ParetoI => w * self.anchor,
            }
        };
        let (low, high) = match self.convention {
            VarConvention::Quantile => (regular_mass(EDGE), edge_mass(EDGE)),
            VarConvention::Literal => (edge_mass(EDGE), regular_mass(EDGE)),
        };
        total += spectrum.density(0.0) * low + spectrum.density(1.0) * high;
        if !total.is_finite() {
            return Err(SrmError::Numerical("parametric risk measure is not finite".into()));
        }
        Ok(total)
    }
}

/// `x_(ceil(n p))` of the sorted values, index clamped to `[1, n]`.
pub fn order_statistic(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let idx = ((n as f64 * p).ceil() as usize).clamp(1, n);
    sorted[idx - 1]
}

/// Entry point of observation `i` for the conditional likelihood.
fn entry(t: f64, anchor: f64) -> f64 {
    t.max(anchor)
}

/// Maximum likelihood under left truncation and right censoring.
///
/// With entry `e_i = max(t_i, x0)` the conditional likelihood gives
/// `theta = sum (y_i - e_i) / #events` and
/// `alpha = #events / sum ln(y_i / e_i)`. Under a fixed deductible `d > x0`
/// these are the usual interior-plus-limit formulas.
pub fn fit_ml(sample: &LtrcSample, family: Family, ctx: &EstimationContext) -> Result<ParametricFit> {
    let events = sample.observations().iter().filter(|o| o.delta).count();
    if events == 0 {
        return Err(SrmError::Estimation("no uncensored observations for maximum likelihood".into()));
    }
    let exposure: f64 = sample
        .observations()
        .iter()
        .map(|o| {
            let e = entry(o.t, ctx.anchor);
            match family {
                Family::ShiftedExponential => o.y - e,
                Family::ParetoI => (o.y / e).ln(),
            }
        })
        .sum();
    let param = match family {
        Family::ShiftedExponential => exposure / events as f64,
        Family::ParetoI => events as f64 / exposure,
    };
    if !(param > 0.0 && param.is_finite()) {
        return Err(SrmError::Estimation(format!("maximum likelihood estimate {param} is not positive")));
    }
    Ok(ParametricFit { family, anchor: ctx.anchor, param, convention: ctx.var_convention })
}

/// Percentile matching at level `p1` using `x_[n p1]` of the recorded values.
pub fn fit_pm(sample: &LtrcSample, family: Family, p1: f64, ctx: &EstimationContext) -> Result<ParametricFit> {
    if !(p1 > 0.0 && p1 < 1.0) {
        return Err(SrmError::Config(format!("p1 must lie in (0, 1), got {p1}")));
    }
    let x = order_statistic(sample.sorted_y(), p1);
    if x >= ctx.limit {
        return Err(SrmError::Estimation(format!("percentile x_[np1] = {x} sits at the policy limit")));
    }
    let d = ctx.truncation;
    let param = match family {
        Family::ShiftedExponential => {
            let num = match ctx.pm_reading {
                PmReading::Deductible => d - x,
                PmReading::Literal { theta } => theta - x,
            };
            num / (-p1).ln_1p()
        }
        Family::ParetoI => {
            let denom = (d / x).ln();
            if denom == 0.0 {
                return Err(SrmError::Estimation("percentile x_[np1] equals the deductible".into()));
            }
            (-p1).ln_1p() / denom
        }
    };
    if !(param > 0.0 && param.is_finite()) {
        return Err(SrmError::Estimation(format!("percentile matching estimate {param} is not positive")));
    }
    Ok(ParametricFit { family, anchor: ctx.anchor, param, convention: ctx.var_convention })
}

/// Kernel-smoothed quantile `Q(t) = (1/h) int_0^1 q(x) K((x - t)/h) dx` of
/// a step quantile, with no boundary correction.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelQuantile {
    breakpoints: Vec<f64>,
    /// Telescoped jump weights: `-v_0` at 0, `v_{j-1} - v_j` inside, `v_last` at 1.
    coef: Vec<f64>,
    /// `suffix[i] = sum_{j >= i} coef[j]`.
    suffix: Vec<f64>,
    h: f64,
    shape: KernelShape,
}

impl KernelQuantile {
    pub fn new(q: &QuantileFunction, h: f64, shape: KernelShape) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(SrmError::Config(format!("bandwidth must be positive, got {h}")));
        }
        let bp = q.breakpoints().to_vec();
        let v = q.segment_values();
        let m = v.len();
        let mut coef = Vec::with_capacity(m + 1);
        coef.push(-v[0]);
        for j in 1..m {
            coef.push(v[j - 1] - v[j]);
        }
        coef.push(v[m - 1]);
        let mut suffix = vec![0.0; m + 2];
        for i in (0..=m).rev() {
            suffix[i] = suffix[i + 1] + coef[i];
        }
        Ok(Self { breakpoints: bp, coef, suffix, h, shape })
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    /// `sum_j v_j [G((b_j - t)/h) - G((a_j - t)/h)]`, `G` the kernel CDF.
    pub fn eval(&self, t: f64) -> f64 {
        let lo = self.breakpoints.partition_point(|&p| p <= t - self.h);
        let hi = self.breakpoints.partition_point(|&p| p < t + self.h);
        let window: f64 = (lo..hi).map(|i| self.coef[i] * self.shape.cdf((self.breakpoints[i] - t) / self.h)).sum();
        window + self.suffix[hi]
    }

    /// Points where `Q` changes polynomial piece.
    fn knots(&self) -> Vec<f64> {
        let mut k: Vec<f64> = self
            .breakpoints
            .iter()
            .flat_map(|&p| [p - self.h, p + self.h])
            .chain([0.0, 1.0])
            .filter(|&x| (0.0..=1.0).contains(&x))
            .collect();
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }

    /// `int_0^1 phi(u) Q(u) du`, piece by piece.
    pub fn srm(&self, spectrum: &Spectrum) -> Result<f64> {
        let quad = QuadratureConfig::relative(1e-10);
        let mut cuts = self.knots();
        if let Spectrum::ExpectedShortfall { p } = *spectrum {
            cuts.push(p);
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
        }
        let mut total = 0.0;
        for w in cuts.windows(2) {
            total += integrate(|u| spectrum.density(u) * self.eval(u), w[0], w[1], &quad)?.value;
        }
        Ok(total)
    }
}

/// Estimator state that does not depend on the spectrum, so one fit can be
/// evaluated on a whole grid of `k`.
#[derive(Debug, Clone)]
pub enum PreparedEstimator {
    Step(QuantileFunction),
    Kernel(KernelQuantile),
    Parametric(ParametricFit),
}

impl PreparedEstimator {
    pub fn prepare(kind: &EstimatorKind, sample: &LtrcSample, ctx: &EstimationContext) -> Result<Self> {
        kind.validate()?;
        Ok(match *kind {
            EstimatorKind::Prod => PreparedEstimator::Step(pl_quantile(&fit_pl(sample))?),
            EstimatorKind::Emp => PreparedEstimator::Step(emp_quantile(sample)?),
            EstimatorKind::Kernel { bandwidth, shape } => {
                let q = pl_quantile(&fit_pl(sample))?;
                PreparedEstimator::Kernel(KernelQuantile::new(&q, bandwidth, shape)?)
            }
            EstimatorKind::Ml { family } => PreparedEstimator::Parametric(fit_ml(sample, family, ctx)?),
            EstimatorKind::Pm { family, p1 } => PreparedEstimator::Parametric(fit_pm(sample, family, p1, ctx)?),
        })
    }

    pub fn estimate(&self, spectrum: &Spectrum) -> Result<f64> {
        match self {
            PreparedEstimator::Step(q) => Ok(srm_from_quantile(q, spectrum)),
            PreparedEstimator::Kernel(kq) => kq.srm(spectrum),
            PreparedEstimator::Parametric(fit) => fit.srm(spectrum),
        }
    }
}

/// Empirical quantile of the recorded values: `x_(ceil(n u))`.
pub fn emp_quantile(sample: &LtrcSample) -> Result<QuantileFunction> {
    pl_quantile(&StepDistribution::ecdf(sample.sorted_y())?)
}

pub fn estimate_prod(sample: &LtrcSample, spectrum: &Spectrum) -> Result<f64> {
    Ok(srm_from_quantile(&pl_quantile(&fit_pl(sample))?, spectrum))
}

pub fn estimate_emp(sample: &LtrcSample, spectrum: &Spectrum) -> Result<f64> {
    Ok(srm_from_quantile(&emp_quantile(sample)?, spectrum))
}

pub fn estimate_kernel(sample: &LtrcSample, spectrum: &Spectrum, h: f64, shape: KernelShape) -> Result<f64> {
    KernelQuantile::new(&pl_quantile(&fit_pl(sample))?, h, shape)?.srm(spectrum)
}

pub fn estimate_ml(sample: &LtrcSample, spectrum: &Spectrum, family: Family, ctx: &EstimationContext) -> Result<f64> {
    fit_ml(sample, family, ctx)?.srm(spectrum)
}

pub fn estimate_pm(
    sample: &LtrcSample,
    spectrum: &Spectrum,
    family: Family,
    p1: f64,
    ctx: &EstimationContext,
) -> Result<f64> {
    fit_pm(sample, family, p1, ctx)?.srm(spectrum)
}

/// A point estimate with optional uncertainty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimator: EstimatorKind,
    pub k: f64,
    pub point: f64,
    pub std_error: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub n_effective: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pl::LtrcObservation;
    use crate::severity::{ground_up_srm, SeverityModel};

    fn two_step() -> QuantileFunction {
        QuantileFunction::from_parts(vec![0.0, 0.5, 1.0], vec![1.0, 2.0]).unwrap()
    }

    fn k1() -> Spectrum {
        Spectrum::exponential(1.0).unwrap()
    }

    fn fixed_sample(xs: &[f64], d: f64, u: f64) -> LtrcSample {
        LtrcSample::new(xs.iter().map(|&x| LtrcObservation::new(x.min(u), d, x < u).unwrap()).collect()).unwrap()
    }

    #[test]
    fn step_quantile_examples() {
        for k in [1.0, 20.0, 200.0] {
            let s = Spectrum::exponential(k).unwrap();
            assert!((srm_from_quantile(&QuantileFunction::constant(3.5), &s) - 3.5).abs() < 1e-12);
        }
        let w1 = k1().segment_integral(0.0, 0.5);
        assert!((w1 - 0.377541).abs() < 1e-6);
        assert!((srm_from_quantile(&two_step(), &k1()) - 1.622459).abs() < 1e-6);
        assert!((srm_from_quantile(&two_step(), &Spectrum::Uniform) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn prod_two_point_and_mean() {
        let s = LtrcSample::from_complete(&[1.0, 2.0]).unwrap();
        assert!((estimate_prod(&s, &k1()).unwrap() - 1.622459).abs() < 1e-6);
        let xs = [3.0, 1.0, 7.5, 2.25, 10.0];
        let s = LtrcSample::from_complete(&xs).unwrap();
        let mean = xs.iter().sum::<f64>() / 5.0;
        assert!((estimate_prod(&s, &Spectrum::Uniform).unwrap() - mean).abs() < 1e-12);
        let doubled = s.affine(2.0, 0.0).unwrap();
        let a = estimate_prod(&s, &k1()).unwrap();
        assert!((estimate_prod(&doubled, &k1()).unwrap() - 2.0 * a).abs() < 1e-12);
    }

    #[test]
    fn emp_examples() {
        let one = fixed_sample(&[5.0], 0.0, f64::INFINITY);
        assert_eq!(estimate_emp(&one, &k1()).unwrap(), 5.0);
        let two = fixed_sample(&[1.0, 2.0], 0.0, f64::INFINITY);
        assert!((estimate_emp(&two, &k1()).unwrap() - 1.622459).abs() < 1e-6);
        let same = fixed_sample(&[4.0; 6], 0.0, f64::INFINITY);
        assert!((estimate_emp(&same, &k1()).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn emp_uses_ceiling_index() {
        let sorted = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(order_statistic(&sorted, 0.5), 2.0);
        assert_eq!(order_statistic(&sorted, 0.51), 3.0);
        assert_eq!(order_statistic(&sorted, 0.0), 1.0);
        assert_eq!(order_statistic(&sorted, 1.0), 4.0);
    }

    #[test]
    fn ml_examples() {
        let ctx = EstimationContext::new(4.0, 14.0, 1.0);
        let s = fixed_sample(&[4.5, 5.0, 14.0], 4.0, 14.0);
        let fit = fit_ml(&s, Family::ShiftedExponential, &ctx).unwrap();
        assert!((fit.param - 5.75).abs() < 1e-12);

        let s = fixed_sample(&[4.5, 6.0, 9.0], 4.0, f64::INFINITY);
        let fit = fit_ml(&s, Family::ShiftedExponential, &ctx).unwrap();
        assert!((fit.param - (0.5 + 2.0 + 5.0) / 3.0).abs() < 1e-12);

        let ctx = EstimationContext::new(4.0, f64::INFINITY, 4.0);
        let s = fixed_sample(&[4.4, 4.84], 4.0, f64::INFINITY);
        let fit = fit_ml(&s, Family::ParetoI, &ctx).unwrap();
        assert!((fit.param - 2.0 / (3.0 * 1.1f64.ln())).abs() < 1e-12);
        assert!((fit.param - 6.99471).abs() < 1e-5);
    }

    #[test]
    fn ml_without_events_fails() {
        let ctx = EstimationContext::new(4.0, 14.0, 1.0);
        let s = fixed_sample(&[20.0, 30.0], 4.0, 14.0);
        assert!(matches!(fit_ml(&s, Family::ShiftedExponential, &ctx), Err(SrmError::Estimation(_))));
    }

    #[test]
    fn pm_examples() {
        let d = 4.0;
        let ctx = EstimationContext::new(d, f64::INFINITY, 4.0);
        let s = fixed_sample(&[4.2, 4.8, 6.0], d, f64::INFINITY);
        let fit = fit_pm(&s, Family::ParetoI, 0.5, &ctx).unwrap();
        assert!((fit.param - 0.5f64.ln() / (4.0f64 / 4.8).ln()).abs() < 1e-12);
        assert!((fit.param - 3.8018).abs() < 1e-4);

        // exact inversion at the matched percentile
        let theta = 2.5;
        let x = d - theta * 0.5f64.ln();
        let s = fixed_sample(&[4.1, x, x + 3.0], d, f64::INFINITY);
        let fit = fit_pm(&s, Family::ShiftedExponential, 0.5, &ctx).unwrap();
        assert!((fit.param - theta).abs() < 1e-12);

        let alpha = 3.0;
        let x = d * 0.5f64.powf(-1.0 / alpha);
        let s = fixed_sample(&[4.1, x, x + 3.0], d, f64::INFINITY);
        let fit = fit_pm(&s, Family::ParetoI, 0.5, &ctx).unwrap();
        assert!((fit.param - alpha).abs() < 1e-12);

        let s = fixed_sample(&[4.0, 4.0, 5.0], d, f64::INFINITY);
        assert!(matches!(fit_pm(&s, Family::ParetoI, 0.5, &ctx), Err(SrmError::Estimation(_))));
    }

    #[test]
    fn pm_literal_reading_uses_supplied_theta() {
        let mut ctx = EstimationContext::new(4.0, f64::INFINITY, 1.0);
        ctx.pm_reading = PmReading::Literal { theta: 2.0 };
        let s = fixed_sample(&[4.5, 5.0, 9.0], 4.0, f64::INFINITY);
        let fit = fit_pm(&s, Family::ShiftedExponential, 0.5, &ctx).unwrap();
        assert!((fit.param - (2.0 - 5.0) / 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn parametric_srm_matches_ground_up_quadrature() {
        for (family, param) in [(Family::ShiftedExponential, 1000.0), (Family::ParetoI, 2.0)] {
            let model = SeverityModel::new(family, 1000.0, param).unwrap();
            let fit = ParametricFit { family, anchor: 1000.0, param, convention: VarConvention::Quantile };
            for k in [1.0, 20.0, 200.0] {
                let s = Spectrum::exponential(k).unwrap();
                let a = fit.srm(&s).unwrap();
                let b = ground_up_srm(&model, &s).unwrap();
                // the reference drops its clipped Pareto tail
                let tol = if family == Family::ParetoI { 3e-5 } else { 1e-8 };
                assert!(((a - b) / b).abs() < tol, "{family} k={k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn parametric_pareto_closed_form() {
        // alpha = 2, x0 = 1000: 1000 k/(1-e^-k) sqrt(pi) erf(sqrt k)/sqrt k
        let fit =
            ParametricFit { family: Family::ParetoI, anchor: 1000.0, param: 2.0, convention: VarConvention::Quantile };
        for k in [1.0f64, 10.0, 200.0] {
            let exact =
                1000.0 * k / -(-k).exp_m1() * std::f64::consts::PI.sqrt() * statrs::function::erf::erf(k.sqrt())
                    / k.sqrt();
            let got = fit.srm(&Spectrum::exponential(k).unwrap()).unwrap();
            assert!(((got - exact) / exact).abs() < 1e-8, "k={k}: {got} vs {exact}");
        }
    }

    #[test]
    fn literal_convention_reverses_weights() {
        let q = ParametricFit {
            family: Family::ShiftedExponential,
            anchor: 0.0,
            param: 1.0,
            convention: VarConvention::Quantile,
        };
        let l = ParametricFit { convention: VarConvention::Literal, ..q };
        assert!((q.var(0.9) - l.var(0.1)).abs() < 1e-12);
        let s = Spectrum::exponential(5.0).unwrap();
        assert!(l.srm(&s).unwrap() < q.srm(&s).unwrap());
        // uniform weights cannot tell the two apart
        assert!((l.srm(&Spectrum::Uniform).unwrap() - 1.0).abs() < 1e-8);
        assert!((q.srm(&Spectrum::Uniform).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn pareto_without_mean_is_rejected() {
        let fit =
            ParametricFit { family: Family::ParetoI, anchor: 1.0, param: 0.9, convention: VarConvention::Quantile };
        assert!(matches!(fit.srm(&k1()), Err(SrmError::Estimation(_))));
    }

    #[test]
    fn kernel_constant_quantile() {
        let kq = KernelQuantile::new(&QuantileFunction::constant(7.0), 0.4, KernelShape::Epanechnikov).unwrap();
        for t in [0.4, 0.5, 0.6] {
            assert!((kq.eval(t) - 7.0).abs() < 1e-14);
        }
        // at t = 0 only the right half of the kernel is inside
        assert!((kq.eval(0.0) - 3.5).abs() < 1e-14);
    }

    #[test]
    fn kernel_agrees_with_direct_quadrature() {
        let q = two_step();
        let h = 0.4;
        let kq = KernelQuantile::new(&q, h, KernelShape::Epanechnikov).unwrap();
        let cfg = QuadratureConfig { abs_tol: 1e-14, rel_tol: 1e-13, max_intervals: 1000 };
        for t in [0.05, 0.3, 0.5, 0.77, 1.0] {
            let direct = [(0.0, 0.5, 1.0), (0.5, 1.0, 2.0)]
                .iter()
                .map(|&(a, b, v)| {
                    integrate(|x| v * KernelShape::Epanechnikov.density((x - t) / h) / h, a, b, &cfg).unwrap().value
                })
                .sum::<f64>();
            assert!((kq.eval(t) - direct).abs() < 1e-10, "t={t}");
        }
        assert!((kq.eval(0.5) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn kernel_small_bandwidth_recovers_step() {
        let kq = KernelQuantile::new(&two_step(), 1e-6, KernelShape::Epanechnikov).unwrap();
        assert!((kq.eval(0.25) - 1.0).abs() < 1e-12);
        assert!((kq.eval(0.75) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_srm_matches_plain_integration() {
        let q = QuantileFunction::from_parts(vec![0.0, 0.2, 0.55, 0.9, 1.0], vec![1.0, 3.0, 4.0, 9.0]).unwrap();
        let kq = KernelQuantile::new(&q, 0.4, KernelShape::Uniform).unwrap();
        let s = Spectrum::exponential(10.0).unwrap();
        let cfg = QuadratureConfig { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 20000 };
        let plain = integrate(|u| s.density(u) * kq.eval(u), 0.0, 1.0, &cfg).unwrap().value;
        assert!((kq.srm(&s).unwrap() - plain).abs() < 1e-8);
    }

    #[test]
    fn estimator_names_round_trip() {
        for name in ["prod", "emp", "kernel", "ml-exp", "ml-pareto", "pm-exp", "pm-pareto"] {
            let k: EstimatorKind = name.parse().unwrap();
            assert_eq!(k.label(), name);
        }
        assert!("ml-weibull".parse::<EstimatorKind>().is_err());
        assert!("lasso".parse::<EstimatorKind>().is_err());
        assert!(EstimatorKind::Kernel { bandwidth: 0.0, shape: KernelShape::Uniform }.validate().is_err());
        assert!(EstimatorKind::Pm { family: Family::ParetoI, p1: 1.0 }.validate().is_err());
    }

    #[test]
    fn prepared_estimator_reuses_fit_across_k() {
        let xs = [1.5, 2.0, 2.5, 4.0, 8.0, 3.0];
        let s = LtrcSample::from_complete(&xs).unwrap();
        let ctx = EstimationContext::new(1.0, f64::INFINITY, 1.0);
        for kind in EstimatorKind::standard_set(Family::ShiftedExponential) {
            let p = PreparedEstimator::prepare(&kind, &s, &ctx).unwrap();
            if matches!(kind, EstimatorKind::Kernel { .. }) {
                // the uncorrected kernel quantile bends down near 1
                continue;
            }
            let mut prev = f64::NEG_INFINITY;
            for k in crate::spectrum::DEFAULT_K_GRID {
                let v = p.estimate(&Spectrum::exponential(k).unwrap()).unwrap();
                assert!(v >= prev - 1e-9, "{kind} k={k}");
                prev = v;
            }
        }
    }
}
