//! Monte Carlo experiments: estimator accuracy under the i.i.d. severity
//! designs and the dependent design, bootstrap coverage, and RMSE-ratio
//! figure data.

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dependent::{marginal_srm_oracle, sample_ltrc_dependent, DependentModelConfig};
use crate::error::{Result, SrmError};
use crate::estimators::{EstimationContext, EstimatorKind, PreparedEstimator};
use crate::inference::{bootstrap_ci, BootstrapPlan};
use crate::pl::{LtrcObservation, LtrcSample};
use crate::rng::{cell_stream, stream_rng};
use crate::severity::{
    ground_up_srm, sample_ltrc_iid, window_srm, Family, SeverityModel, TruncationLaw, WindowMode, WindowScheme,
};
use crate::spectrum::{Spectrum, DEFAULT_K_GRID};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Design {
    IidExp,
    IidPareto,
    Dependent,
}

impl Design {
    pub fn label(&self) -> &'static str {
        match self {
            Design::IidExp => "iid-exp",
            Design::IidPareto => "iid-pareto",
            Design::Dependent => "dependent",
        }
    }
}

impl std::fmt::Display for Design {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Design {
    type Err = SrmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid-exp" => Ok(Design::IidExp),
            "iid-pareto" => Ok(Design::IidPareto),
            "dependent" => Ok(Design::Dependent),
            other => {
                Err(SrmError::Usage(format!("unknown design `{other}` (expected iid-exp, iid-pareto or dependent)")))
            }
        }
    }
}

/// How recorded losses are truncated in the i.i.d. designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationChoice {
    /// `T ~ Uniform(0, d - x0)`.
    #[default]
    Random,
    /// `T = d` for every loss.
    Fixed,
}

pub const DESIGN_X0: f64 = 1000.0;
pub const DESIGN_DEDUCTIBLE: f64 = 4000.0;
pub const DESIGN_LIMIT: f64 = 14000.0;

/// Ground-up law and window of an i.i.d. design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IidDesign {
    pub model: SeverityModel,
    pub scheme: WindowScheme,
}

impl IidDesign {
    pub fn new(design: Design, truncation: TruncationChoice) -> Result<Self> {
        let model = match design {
            Design::IidExp => SeverityModel::shifted_exponential(DESIGN_X0, 1000.0)?,
            Design::IidPareto => SeverityModel::pareto(DESIGN_X0, 2.0)?,
            Design::Dependent => return Err(SrmError::Usage("the dependent design is not i.i.d.".into())),
        };
        let scheme = match truncation {
            TruncationChoice::Fixed => WindowScheme::fixed(DESIGN_DEDUCTIBLE, DESIGN_LIMIT)?,
            TruncationChoice::Random => WindowScheme::random(
                DESIGN_DEDUCTIBLE,
                DESIGN_LIMIT,
                TruncationLaw::Uniform { low: 0.0, high: DESIGN_DEDUCTIBLE - DESIGN_X0 },
            )?,
        };
        Ok(Self { model, scheme })
    }

    /// Thresholds handed to the parametric estimators.
    pub fn context(&self) -> EstimationContext {
        let truncation = match self.scheme.mode {
            WindowMode::FixedThresholds => self.scheme.deductible,
            WindowMode::RandomTruncation { .. } => self.model.x0,
        };
        EstimationContext::new(truncation, self.scheme.limit, self.model.x0)
    }

    pub fn family(&self) -> Family {
        self.model.family
    }
}

/// A Monte Carlo plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub design: Design,
    pub n_grid: Vec<usize>,
    pub k_grid: Vec<f64>,
    pub replicates: usize,
    pub estimators: Vec<EstimatorKind>,
    pub master_seed: u64,
    pub truncation: TruncationChoice,
}

pub const DESK_REPLICATES: usize = 1000;
pub const DESK_COVERAGE_INTERVALS: usize = 500;
pub const DESK_COVERAGE_BOOTSTRAP: usize = 200;
pub const ORACLE_DRAWS: usize = 1_000_000;

impl ExperimentPlan {
    /// Desk-scale plan with every estimator that applies to the design.
    pub fn desk(design: Design, master_seed: u64) -> Self {
        let estimators = match design {
            Design::IidExp => EstimatorKind::standard_set(Family::ShiftedExponential),
            Design::IidPareto => EstimatorKind::standard_set(Family::ParetoI),
            Design::Dependent => vec![EstimatorKind::Prod, EstimatorKind::Emp, EstimatorKind::kernel()],
        };
        Self {
            design,
            n_grid: vec![30, 100, 500],
            k_grid: DEFAULT_K_GRID.to_vec(),
            replicates: DESK_REPLICATES,
            estimators,
            master_seed,
            truncation: TruncationChoice::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(SrmError::Usage("at least two replicates are needed".into()));
        }
        if self.n_grid.is_empty() || self.k_grid.is_empty() || self.estimators.is_empty() {
            return Err(SrmError::Usage("sample-size, k and estimator lists must be nonempty".into()));
        }
        if self.n_grid.contains(&0) {
            return Err(SrmError::Usage("sample sizes must be positive".into()));
        }
        if self.n_grid.len() > u32::MAX as usize || self.replicates > u32::MAX as usize {
            return Err(SrmError::Usage("grid too large".into()));
        }
        for k in &self.k_grid {
            Spectrum::exponential(*k).map_err(|e| SrmError::Usage(e.to_string()))?;
        }
        for e in &self.estimators {
            e.validate()?;
            if self.design == Design::Dependent && matches!(e, EstimatorKind::Ml { .. } | EstimatorKind::Pm { .. }) {
                return Err(SrmError::Usage(format!(
                    "estimator {e} needs a parametric severity law; the dependent design supports prod, emp and kernel"
                )));
            }
        }
        Ok(())
    }

    pub fn spectra(&self) -> Result<Vec<Spectrum>> {
        self.k_grid.iter().map(|&k| Spectrum::exponential(k)).collect()
    }
}

/// Summary of one (design, estimator, n, k) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McCell {
    pub design: Design,
    pub estimator: String,
    pub n: usize,
    pub k: f64,
    pub mean: f64,
    /// Divisor `R`, so that `rmse^2 = sd^2 + bias^2`.
    pub sd: f64,
    pub rmse: f64,
    /// Monte Carlo standard error of `rmse`.
    pub rmse_se: f64,
    pub theoretical: f64,
    pub failures: usize,
    /// Risk measure of the recorded-loss law, for fixed thresholds only.
    pub window_theoretical: Option<f64>,
}

impl McCell {
    fn from_values(
        design: Design,
        estimator: String,
        n: usize,
        k: f64,
        values: &[Option<f64>],
        theoretical: f64,
        window_theoretical: Option<f64>,
    ) -> Self {
        let ok: Vec<f64> = values.iter().filter_map(|v| *v).filter(|v| v.is_finite()).collect();
        let failures = values.len() - ok.len();
        let r = ok.len() as f64;
        let (mean, sd, rmse, rmse_se) = if ok.is_empty() {
            (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
        } else {
            let mean = ok.iter().sum::<f64>() / r;
            let var = ok.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / r;
            let bias = mean - theoretical;
            let mse = var + bias * bias;
            // delta method on the mean of squared errors
            let sq: Vec<f64> = ok.iter().map(|v| (v - theoretical).powi(2)).collect();
            let sq_mean = sq.iter().sum::<f64>() / r;
            let sq_var = sq.iter().map(|s| (s - sq_mean).powi(2)).sum::<f64>() / r;
            let rmse = mse.sqrt();
            let se = if rmse > 0.0 { (sq_var / r).sqrt() / (2.0 * rmse) } else { 0.0 };
            (mean, var.sqrt(), rmse, se)
        };
        Self { design, estimator, n, k, mean, sd, rmse, rmse_se, theoretical, failures, window_theoretical }
    }
}

/// Cells plus anything resolved during the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub plan: ExperimentPlan,
    pub cells: Vec<McCell>,
    /// Calibrated truncation location, dependent design only.
    pub mu: Option<f64>,
}

impl McResult {
    pub fn cell(&self, estimator: &str, n: usize, k: f64) -> Option<&McCell> {
        self.cells.iter().find(|c| c.estimator == estimator && c.n == n && c.k == k)
    }
}

/// Estimates of every (estimator, k) on one sample; `None` marks a failure.
fn evaluate_all(
    sample: &[LtrcObservation],
    estimators: &[EstimatorKind],
    spectra: &[Spectrum],
    ctx: &EstimationContext,
) -> Vec<Vec<Option<f64>>> {
    let sample = match LtrcSample::new(sample.to_vec()) {
        Ok(s) => s,
        Err(_) => return vec![vec![None; spectra.len()]; estimators.len()],
    };
    estimators
        .iter()
        .map(|kind| match PreparedEstimator::prepare(kind, &sample, ctx) {
            Ok(p) => spectra.iter().map(|s| p.estimate(s).ok()).collect(),
            Err(_) => vec![None; spectra.len()],
        })
        .collect()
}

/// Runs `replicates` draws per sample size and assembles the cells.
fn run_cells<F>(
    plan: &ExperimentPlan,
    theoretical: &[f64],
    window: &[Option<f64>],
    ctx: &EstimationContext,
    draw: F,
) -> Result<Vec<McCell>>
where
    F: Fn(usize, u64) -> Result<Vec<LtrcObservation>> + Sync,
{
    let spectra = plan.spectra()?;
    let mut cells = Vec::new();
    for (ni, &n) in plan.n_grid.iter().enumerate() {
        // results[r][estimator][k]
        let results: Vec<Vec<Vec<Option<f64>>>> = (0..plan.replicates)
            .into_par_iter()
            .map(|r| {
                let stream = cell_stream(ni as u32, r as u32);
                match draw(n, stream) {
                    Ok(sample) => Ok(evaluate_all(&sample, &plan.estimators, &spectra, ctx)),
                    Err(e @ SrmError::AcceptanceFloor { .. }) => Err(e),
                    Err(_) => Ok(vec![vec![None; spectra.len()]; plan.estimators.len()]),
                }
            })
            .collect::<Result<_>>()?;
        for (ei, est) in plan.estimators.iter().enumerate() {
            for (ki, &k) in plan.k_grid.iter().enumerate() {
                let values: Vec<Option<f64>> = results.iter().map(|r| r[ei][ki]).collect();
                cells.push(McCell::from_values(plan.design, est.label(), n, k, &values, theoretical[ki], window[ki]));
            }
        }
    }
    Ok(cells)
}

/// Accuracy study under an i.i.d. severity design.
pub fn run_iid_experiment(plan: &ExperimentPlan) -> Result<McResult> {
    plan.validate()?;
    let design = IidDesign::new(plan.design, plan.truncation)?;
    let spectra = plan.spectra()?;
    let theoretical: Vec<f64> = spectra.iter().map(|s| ground_up_srm(&design.model, s)).collect::<Result<_>>()?;
    let window: Vec<Option<f64>> = match design.scheme.mode {
        WindowMode::FixedThresholds => {
            spectra.iter().map(|s| window_srm(&design.model, &design.scheme, s).map(Some)).collect::<Result<_>>()?
        }
        WindowMode::RandomTruncation { .. } => vec![None; spectra.len()],
    };
    let ctx = design.context();
    let cells = run_cells(plan, &theoretical, &window, &ctx, |n, stream| {
        let mut rng = stream_rng(plan.master_seed, stream);
        sample_ltrc_iid(&design.model, &design.scheme, n, &mut rng)
    })?;
    Ok(McResult { plan: plan.clone(), cells, mu: None })
}

/// Accuracy study under the dependent design. `cfg.mu` must be calibrated.
pub fn run_dependent_experiment(plan: &ExperimentPlan, cfg: &DependentModelConfig) -> Result<McResult> {
    plan.validate()?;
    let mu = cfg.mu.ok_or_else(|| SrmError::Config("truncation location mu is not calibrated".into()))?;
    let spectra = plan.spectra()?;
    let theoretical = marginal_srm_oracle(cfg, &spectra, ORACLE_DRAWS, plan.master_seed)?;
    let window = vec![None; spectra.len()];
    let ctx = EstimationContext::new(f64::NEG_INFINITY, f64::INFINITY, 0.0);
    let cells = run_cells(plan, &theoretical, &window, &ctx, |n, stream| {
        sample_ltrc_dependent(cfg, n, stream_rng(plan.master_seed, stream))
    })?;
    Ok(McResult { plan: plan.clone(), cells, mu: Some(mu) })
}

/// Fraction of intervals covering the target, with its binomial error.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CoverageTally {
    pub covered: usize,
    pub intervals: usize,
    pub failures: usize,
}

impl CoverageTally {
    pub fn record(&mut self, interval: Option<(f64, f64)>, target: f64) {
        match interval {
            Some((lo, hi)) => {
                self.intervals += 1;
                if lo <= target && target <= hi {
                    self.covered += 1;
                }
            }
            None => self.failures += 1,
        }
    }

    pub fn coverage(&self) -> f64 {
        self.covered as f64 / self.intervals as f64
    }

    pub fn std_error(&self) -> f64 {
        let p = self.coverage();
        (p * (1.0 - p) / self.intervals as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageCell {
    pub design: Design,
    pub n: usize,
    pub k: f64,
    pub nominal: f64,
    pub coverage: f64,
    pub std_error: f64,
    pub intervals: usize,
    pub failures: usize,
    pub theoretical: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub plan: ExperimentPlan,
    pub bootstrap: usize,
    pub level: f64,
    pub cells: Vec<CoverageCell>,
    pub mu: Option<f64>,
}

/// Coverage of the percentile bootstrap interval of the product-limit
/// estimator. `plan.replicates` is the number of intervals per cell.
pub fn run_coverage_experiment(
    plan: &ExperimentPlan,
    bootstrap: usize,
    level: f64,
    dependent: Option<&DependentModelConfig>,
) -> Result<CoverageResult> {
    plan.validate()?;
    let spectra = plan.spectra()?;
    let boot_check = BootstrapPlan { replicates: bootstrap, seed: 0, ci_level: level };
    boot_check.validate()?;

    enum Source {
        Iid(IidDesign),
        Dep(DependentModelConfig),
    }
    let (source, theoretical, mu) = match plan.design {
        Design::Dependent => {
            let cfg = *dependent.ok_or_else(|| SrmError::Config("dependent design needs its configuration".into()))?;
            let mu = cfg.mu.ok_or_else(|| SrmError::Config("truncation location mu is not calibrated".into()))?;
            let th = marginal_srm_oracle(&cfg, &spectra, ORACLE_DRAWS, plan.master_seed)?;
            (Source::Dep(cfg), th, Some(mu))
        }
        d => {
            let design = IidDesign::new(d, plan.truncation)?;
            let th = spectra.iter().map(|s| ground_up_srm(&design.model, s)).collect::<Result<Vec<_>>>()?;
            (Source::Iid(design), th, None)
        }
    };
    let ctx = match &source {
        Source::Iid(d) => d.context(),
        Source::Dep(_) => EstimationContext::new(f64::NEG_INFINITY, f64::INFINITY, 0.0),
    };

    let mut cells = Vec::new();
    for (ni, &n) in plan.n_grid.iter().enumerate() {
        let intervals: Vec<Vec<Option<(f64, f64)>>> = (0..plan.replicates)
            .into_par_iter()
            .map(|r| {
                let mut rng = stream_rng(plan.master_seed, cell_stream(ni as u32, r as u32));
                let obs = match &source {
                    Source::Iid(d) => sample_ltrc_iid(&d.model, &d.scheme, n, &mut rng),
                    Source::Dep(cfg) => sample_ltrc_dependent(cfg, n, rng.clone()),
                };
                let boot_seed = rng.next_u64();
                let none = vec![None; spectra.len()];
                let sample = match obs.and_then(LtrcSample::new) {
                    Ok(s) => s,
                    Err(e @ SrmError::AcceptanceFloor { .. }) => return Err(e),
                    Err(_) => return Ok(none),
                };
                let bp = BootstrapPlan { replicates: bootstrap, seed: boot_seed, ci_level: level };
                Ok(match bootstrap_ci(&sample, &EstimatorKind::Prod, &spectra, &ctx, &bp) {
                    Ok(reports) => reports.iter().map(|r| r.ci_low.zip(r.ci_high)).collect(),
                    Err(_) => none,
                })
            })
            .collect::<Result<_>>()?;
        for (ki, &k) in plan.k_grid.iter().enumerate() {
            let mut tally = CoverageTally::default();
            for iv in &intervals {
                tally.record(iv[ki], theoretical[ki]);
            }
            cells.push(CoverageCell {
                design: plan.design,
                n,
                k,
                nominal: level,
                coverage: tally.coverage(),
                std_error: tally.std_error(),
                intervals: tally.intervals,
                failures: tally.failures,
                theoretical: theoretical[ki],
            });
        }
    }
    Ok(CoverageResult { plan: plan.clone(), bootstrap, level, cells, mu })
}

/// One figure-data row: `ln(RMSE_estimator / RMSE_baseline)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub design: Design,
    pub estimator: String,
    pub n: usize,
    pub k: f64,
    pub log_ratio: f64,
}

/// Log RMSE ratios against `baseline`. Cells whose baseline RMSE is zero or
/// missing are returned separately instead of emitted.
pub fn emit_rmse_ratio_log(result: &McResult, baseline: &EstimatorKind) -> Result<(Vec<RatioRow>, Vec<McCell>)> {
    let base = baseline.label();
    if !result.cells.iter().any(|c| c.estimator == base) {
        return Err(SrmError::Usage(format!("baseline {base} is not among the results")));
    }
    let mut rows = Vec::new();
    let mut flagged = Vec::new();
    for c in &result.cells {
        let b = result.cell(&base, c.n, c.k).map(|b| b.rmse);
        match b {
            Some(b) if b > 0.0 && b.is_finite() && c.rmse.is_finite() => rows.push(RatioRow {
                design: c.design,
                estimator: c.estimator.clone(),
                n: c.n,
                k: c.k,
                log_ratio: if c.estimator == base { 0.0 } else { (c.rmse / b).ln() },
            }),
            _ => flagged.push(c.clone()),
        }
    }
    Ok((rows, flagged))
}
