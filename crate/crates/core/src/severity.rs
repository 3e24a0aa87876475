//! Ground-up severity laws, deductible/limit windows, synthetic LTRC
//! generation and quadrature of theoretical risk measures.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SrmError};
use crate::pl::LtrcObservation;
use crate::quadrature::{integrate, Integral, QuadratureConfig};
use crate::spectrum::Spectrum;

/// Default floor on the rejection-sampling acceptance rate.
pub const DEFAULT_ACCEPTANCE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    ShiftedExponential,
    ParetoI,
}

impl std::str::FromStr for Family {
    type Err = SrmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exp" | "exponential" | "shifted_exponential" | "shifted-exponential" => Ok(Family::ShiftedExponential),
            "pareto" | "pareto_i" | "pareto-i" | "paretoi" => Ok(Family::ParetoI),
            other => Err(SrmError::Config(format!("unknown family `{other}` (expected exp or pareto)"))),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::ShiftedExponential => "exp",
            Family::ParetoI => "pareto",
        })
    }
}

/// Ground-up loss law.
///
/// * `ShiftedExponential`: `F(x) = 1 - exp(-(x - x0) / theta)`, `x >= x0`
/// * `ParetoI`: `F(x) = 1 - (x0 / x)^alpha`, `x >= x0`
///
/// `shape` holds `theta` (a currency amount) for the exponential and the
/// dimensionless `alpha` for Pareto.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeverityModel {
    pub family: Family,
    pub x0: f64,
    pub shape: f64,
}

impl SeverityModel {
    pub fn new(family: Family, x0: f64, shape: f64) -> Result<Self> {
        if !(x0 > 0.0 && x0.is_finite() && shape > 0.0 && shape.is_finite()) {
            return Err(SrmError::Config(format!(
                "severity parameters must be positive and finite (x0={x0}, shape={shape})"
            )));
        }
        Ok(Self { family, x0, shape })
    }

    pub fn shifted_exponential(x0: f64, theta: f64) -> Result<Self> {
        Self::new(Family::ShiftedExponential, x0, theta)
    }

    pub fn pareto(x0: f64, alpha: f64) -> Result<Self> {
        Self::new(Family::ParetoI, x0, alpha)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.x0 {
            return 0.0;
        }
        match self.family {
            Family::ShiftedExponential => -(-(x - self.x0) / self.shape).exp_m1(),
            Family::ParetoI => 1.0 - (self.x0 / x).powf(self.shape),
        }
    }

    pub fn survival(&self, x: f64) -> f64 {
        if x <= self.x0 {
            return 1.0;
        }
        match self.family {
            Family::ShiftedExponential => (-(x - self.x0) / self.shape).exp(),
            Family::ParetoI => (self.x0 / x).powf(self.shape),
        }
    }

    /// `F^{-1}(p)` without range checks.
    fn quantile_unchecked(&self, p: f64) -> f64 {
        match self.family {
            Family::ShiftedExponential => self.x0 - self.shape * (-p).ln_1p(),
            Family::ParetoI => self.x0 * (-(-p).ln_1p() / self.shape).exp(),
        }
    }

    /// Ground-up mean, `None` when infinite.
    pub fn mean(&self) -> Option<f64> {
        match self.family {
            Family::ShiftedExponential => Some(self.x0 + self.shape),
            Family::ParetoI if self.shape > 1.0 => Some(self.shape * self.x0 / (self.shape - 1.0)),
            Family::ParetoI => None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let e: f64 = Exp1.sample(rng);
        match self.family {
            Family::ShiftedExponential => self.x0 + self.shape * e,
            Family::ParetoI => self.x0 * (e / self.shape).exp(),
        }
    }
}

/// Ground-up quantile `F^{-1}(p)` for `0 <= p < 1`.
pub fn ground_up_quantile(model: &SeverityModel, p: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(SrmError::Domain(format!("probability {p} outside [0, 1)")));
    }
    Ok(model.quantile_unchecked(p))
}

/// Law of a random truncation variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum TruncationLaw {
    Uniform { low: f64, high: f64 },
    Exponential { mean: f64 },
    Normal { mean: f64, sd: f64 },
}

impl TruncationLaw {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            TruncationLaw::Uniform { low, high } => low.is_finite() && high.is_finite() && low < high,
            TruncationLaw::Exponential { mean } => mean > 0.0 && mean.is_finite(),
            TruncationLaw::Normal { mean, sd } => mean.is_finite() && sd > 0.0 && sd.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(SrmError::Config(format!("invalid truncation law {self:?}")))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            TruncationLaw::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            TruncationLaw::Exponential { mean } => {
                let e: f64 = Exp1.sample(rng);
                mean * e
            }
            TruncationLaw::Normal { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum WindowMode {
    /// `T = d` and censoring at `u` for every loss.
    FixedThresholds,
    /// `T` drawn from `law`; a loss is recorded when `T <= min(X, u)`.
    RandomTruncation { law: TruncationLaw },
}

/// Deductible `d`, policy limit `u` (may be `+inf`) and how truncation arises.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowScheme {
    pub deductible: f64,
    pub limit: f64,
    pub mode: WindowMode,
}

impl WindowScheme {
    pub fn fixed(deductible: f64, limit: f64) -> Result<Self> {
        let s = Self { deductible, limit, mode: WindowMode::FixedThresholds };
        s.validate()?;
        Ok(s)
    }

    pub fn random(deductible: f64, limit: f64, law: TruncationLaw) -> Result<Self> {
        let s = Self { deductible, limit, mode: WindowMode::RandomTruncation { law } };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.deductible.is_nan() || self.limit.is_nan() || !(self.deductible < self.limit) {
            return Err(SrmError::Config(format!("deductible {} must be below limit {}", self.deductible, self.limit)));
        }
        if let WindowMode::RandomTruncation { law } = self.mode {
            law.validate()?;
        }
        Ok(())
    }

    /// Turns a ground-up loss into an observation if it is recorded.
    pub fn observe(&self, x: f64, t: f64) -> Option<LtrcObservation> {
        let y = x.min(self.limit);
        let recorded = match self.mode {
            WindowMode::FixedThresholds => x > self.deductible,
            WindowMode::RandomTruncation { .. } => t <= y,
        };
        recorded.then_some(LtrcObservation { y, t, delta: x < self.limit })
    }
}

/// Quantile of the recorded loss `min(X, u) | X > d` under fixed thresholds:
/// `F*^{-1}(p) = F^{-1}(F(d) + p (1 - F(d)))` below the branch point
/// `1 - S(u)/S(d)` and `u` from there on.
pub fn window_quantile(model: &SeverityModel, scheme: &WindowScheme, p: f64) -> Result<f64> {
    scheme.validate()?;
    if !(scheme.deductible > model.x0) {
        return Err(SrmError::Config(format!(
            "deductible {} must exceed the support endpoint {}",
            scheme.deductible, model.x0
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(SrmError::Domain(format!("probability {p} outside [0, 1]")));
    }
    let d = scheme.deductible;
    let u = scheme.limit;
    let branch = 1.0 - model.survival(u) / model.survival(d);
    if p >= branch {
        return Ok(u);
    }
    let q = match model.family {
        Family::ShiftedExponential => d - model.shape * (-p).ln_1p(),
        Family::ParetoI => d * (-(-p).ln_1p() / model.shape).exp(),
    };
    Ok(q.min(u))
}

/// Rejection-sampling budget check shared by the generators.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AcceptanceGuard {
    floor: f64,
    attempts: u64,
}

impl AcceptanceGuard {
    pub(crate) fn new(floor: f64) -> Self {
        Self { floor, attempts: 0 }
    }

    pub(crate) fn attempt(&mut self, accepted: usize) -> Result<()> {
        self.attempts += 1;
        // acceptance rate (accepted + 1) / attempts is an optimistic estimate
        if (accepted as f64 + 1.0) < self.floor * self.attempts as f64 {
            return Err(SrmError::AcceptanceFloor {
                rate: accepted as f64 / self.attempts as f64,
                attempts: self.attempts,
                floor: self.floor,
            });
        }
        Ok(())
    }

    pub(crate) fn attempts(&self) -> u64 {
        self.attempts
    }
}

/// Draws exactly `n` recorded observations.
pub fn sample_ltrc_iid<R: Rng + ?Sized>(
    model: &SeverityModel,
    scheme: &WindowScheme,
    n: usize,
    rng: &mut R,
) -> Result<Vec<LtrcObservation>> {
    sample_ltrc_iid_with_floor(model, scheme, n, rng, DEFAULT_ACCEPTANCE_FLOOR).map(|(v, _)| v)
}

/// As [`sample_ltrc_iid`], also returning the number of ground-up draws.
pub fn sample_ltrc_iid_with_floor<R: Rng + ?Sized>(
    model: &SeverityModel,
    scheme: &WindowScheme,
    n: usize,
    rng: &mut R,
    floor: f64,
) -> Result<(Vec<LtrcObservation>, u64)> {
    if n == 0 {
        return Err(SrmError::Usage("sample size must be at least 1".into()));
    }
    scheme.validate()?;
    let mut out = Vec::with_capacity(n);
    let mut guard = AcceptanceGuard::new(floor);
    while out.len() < n {
        guard.attempt(out.len())?;
        let x = model.sample(rng);
        let t = match scheme.mode {
            WindowMode::FixedThresholds => scheme.deductible,
            WindowMode::RandomTruncation { law } => law.sample(rng),
        };
        if let Some(o) = scheme.observe(x, t) {
            out.push(o);
        }
    }
    Ok((out, guard.attempts()))
}

/// Quadrature settings for theoretical risk measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrmQuadrature {
    pub quad: QuadratureConfig,
    /// The integral runs over `[clip, 1 - clip]`.
    pub clip: f64,
}

impl Default for SrmQuadrature {
    fn default() -> Self {
        Self { quad: QuadratureConfig::default(), clip: 1e-12 }
    }
}

/// `int_0^1 phi(u) q(u) du` by adaptive quadrature.
///
/// Each half of the unit interval is integrated in a square-root variable
/// (`u = s^2` below 1/2, `u = 1 - s^2` above), which absorbs the endpoint
/// singularities of heavy-tailed quantiles. The truncated end pieces
/// `[0, clip]` and `[1 - clip, 1]` are not included; for a Pareto quantile
/// with shape `alpha > 1` their contribution is `O(clip^{1 - 1/alpha})`
/// relative to the quantile scale.
pub fn theoretical_srm<Q: Fn(f64) -> f64>(quantile: Q, spectrum: &Spectrum, cfg: &SrmQuadrature) -> Result<Integral> {
    let eps = cfg.clip.clamp(0.0, 0.25);
    let f = |u: f64| spectrum.density(u) * quantile(u);
    let mut cuts = vec![eps, 0.5, 1.0 - eps];
    if let Spectrum::ExpectedShortfall { p } = *spectrum {
        if p > eps && p < 1.0 - eps && p != 0.5 {
            cuts.push(p);
        }
    }
    cuts.sort_by(f64::total_cmp);

    let mut total = Integral { value: 0.0, error: 0.0, intervals: 0 };
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let piece = if b <= 0.5 {
            integrate(|s| 2.0 * s * f(s * s), a.sqrt(), b.sqrt(), &cfg.quad)?
        } else {
            integrate(|s| 2.0 * s * f(1.0 - s * s), (1.0 - b).sqrt(), (1.0 - a).sqrt(), &cfg.quad)?
        };
        total.value += piece.value;
        total.error += piece.error;
        total.intervals += piece.intervals;
    }
    if !total.value.is_finite() {
        return Err(SrmError::Numerical(format!("risk measure integral is not finite for {spectrum}")));
    }
    Ok(total)
}

/// Theoretical risk measure of the ground-up law.
pub fn ground_up_srm(model: &SeverityModel, spectrum: &Spectrum) -> Result<f64> {
    theoretical_srm(|p| model.quantile_unchecked(p), spectrum, &SrmQuadrature::default()).map(|i| i.value)
}

/// Theoretical risk measure of the recorded loss under fixed thresholds.
pub fn window_srm(model: &SeverityModel, scheme: &WindowScheme, spectrum: &Spectrum) -> Result<f64> {
    window_quantile(model, scheme, 0.0)?;
    theoretical_srm(|p| window_quantile(model, scheme, p).unwrap_or(f64::NAN), spectrum, &SrmQuadrature::default())
        .map(|i| i.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn exp_model() -> SeverityModel {
        SeverityModel::shifted_exponential(1000.0, 1000.0).unwrap()
    }

    fn pareto_model() -> SeverityModel {
        SeverityModel::pareto(1000.0, 2.0).unwrap()
    }

    #[test]
    fn ground_up_quantile_examples() {
        assert_eq!(ground_up_quantile(&exp_model(), 0.0).unwrap(), 1000.0);
        let p = 1.0 - (-1.0f64).exp();
        assert!((ground_up_quantile(&exp_model(), p).unwrap() - 2000.0).abs() < 1e-9);
        assert!((ground_up_quantile(&pareto_model(), 0.75).unwrap() - 2000.0).abs() < 1e-9);
        assert!(ground_up_quantile(&exp_model(), 1.0).is_err());
        assert!(ground_up_quantile(&exp_model(), -0.1).is_err());
    }

    #[test]
    fn invalid_parameters() {
        assert!(SeverityModel::pareto(0.0, 2.0).is_err());
        assert!(SeverityModel::shifted_exponential(1.0, -1.0).is_err());
        assert!(WindowScheme::fixed(5.0, 5.0).is_err());
    }

    #[test]
    fn window_quantile_examples() {
        let scheme = WindowScheme::fixed(4000.0, 14000.0).unwrap();
        let m = SeverityModel::shifted_exponential(1000.0, 1000.0).unwrap();
        assert_eq!(window_quantile(&m, &scheme, 0.0).unwrap(), 4000.0);
        let branch = 1.0 - (-10.0f64).exp();
        assert_eq!(window_quantile(&m, &scheme, branch).unwrap(), 14000.0);
        assert_eq!(window_quantile(&m, &scheme, 1.0).unwrap(), 14000.0);
        let q = window_quantile(&pareto_model(), &scheme, 0.5).unwrap();
        assert!((q - 4000.0 * 2f64.sqrt()).abs() < 1e-9, "{q}");
        let low = WindowScheme::fixed(500.0, 14000.0).unwrap();
        assert!(window_quantile(&m, &low, 0.5).is_err());
    }

    #[test]
    fn window_quantile_is_nondecreasing() {
        let scheme = WindowScheme::fixed(4000.0, 14000.0).unwrap();
        for m in [exp_model(), pareto_model()] {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=1000 {
                let q = window_quantile(&m, &scheme, i as f64 / 1000.0).unwrap();
                assert!(q >= prev);
                prev = q;
            }
            assert_eq!(prev, 14000.0);
        }
    }

    #[test]
    fn fixed_threshold_observations_respect_window() {
        let scheme = WindowScheme::fixed(4000.0, 14000.0).unwrap();
        let mut rng = stream_rng(11, 0);
        let obs = sample_ltrc_iid(&pareto_model(), &scheme, 2000, &mut rng).unwrap();
        assert_eq!(obs.len(), 2000);
        for o in obs {
            assert!(o.y > 4000.0 && o.y <= 14000.0);
            assert_eq!(o.delta, o.y < 14000.0);
            assert_eq!(o.t, 4000.0);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let scheme = WindowScheme::fixed(4000.0, 14000.0).unwrap();
        let a = sample_ltrc_iid(&exp_model(), &scheme, 5, &mut stream_rng(3, 9)).unwrap();
        let b = sample_ltrc_iid(&exp_model(), &scheme, 5, &mut stream_rng(3, 9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn acceptance_floor_aborts() {
        // recording probability exp(-40) is far below the floor
        let scheme = WindowScheme::fixed(41_000.0, 1e9).unwrap();
        let r = sample_ltrc_iid_with_floor(&exp_model(), &scheme, 3, &mut stream_rng(1, 1), 1e-4);
        assert!(matches!(r, Err(SrmError::AcceptanceFloor { .. })));
    }

    #[test]
    fn random_truncation_keeps_t_below_y() {
        let law = TruncationLaw::Uniform { low: 0.0, high: 3000.0 };
        let scheme = WindowScheme::random(4000.0, 14000.0, law).unwrap();
        let obs = sample_ltrc_iid(&exp_model(), &scheme, 1000, &mut stream_rng(5, 0)).unwrap();
        assert!(obs.iter().all(|o| o.t <= o.y && o.y <= 14000.0));
        assert!(obs.iter().any(|o| o.y < 4000.0));
    }

    #[test]
    fn constant_quantile_integrates_to_itself() {
        for k in [1.0, 20.0, 200.0] {
            let s = Spectrum::exponential(k).unwrap();
            let v = theoretical_srm(|_| 7.5, &s, &SrmQuadrature::default()).unwrap().value;
            // the clipped end carries about k * 1e-12 of the mass
            assert!((v - 7.5).abs() < 7.5 * (k + 1.0) * 2e-12, "{k}: {v}");
        }
    }

    #[test]
    fn uniform_spectrum_gives_the_mean() {
        for m in [exp_model(), pareto_model()] {
            let v = ground_up_srm(&m, &Spectrum::Uniform).unwrap();
            let mean = m.mean().unwrap();
            assert!((v / mean - 1.0).abs() < 1e-4, "{v} vs {mean}");
        }
    }

    #[test]
    fn pareto_tail_closed_form() {
        // alpha = 2: int phi(u) x0 (1-u)^{-1/2} du = x0 k/(1-e^{-k}) * gamma_lower(1/2, k) / sqrt(k)
        // and gamma_lower(1/2, k) = sqrt(pi) erf(sqrt(k))
        let k: f64 = 200.0;
        let expected =
            1000.0 * k / -(-k).exp_m1() * std::f64::consts::PI.sqrt() * statrs::function::erf::erf(k.sqrt()) / k.sqrt();
        let v = ground_up_srm(&pareto_model(), &Spectrum::exponential(k).unwrap()).unwrap();
        // the clipped piece above 1 - 1e-12 carries about 1.6e-5 of the total here
        assert!((v / expected - 1.0).abs() < 3e-5, "{v} vs {expected}");
        let exact = theoretical_srm(
            |p| 1000.0 * (1.0 - p).powf(-0.5),
            &Spectrum::exponential(k).unwrap(),
            &SrmQuadrature { clip: 0.0, ..SrmQuadrature::default() },
        )
        .unwrap()
        .value;
        assert!((exact / expected - 1.0).abs() < 1e-8, "{exact} vs {expected}");
    }
}
