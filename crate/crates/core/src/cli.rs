//! The `srm` command line.
//!
//! Settings resolve as command line, then `SRM_*` environment variables,
//! then the `--config` TOML file, then built-in defaults.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::dependent::{calibrate_truncation_location, CalibrationSettings, DependentModelConfig};
use crate::error::{Result, SrmError};
use crate::estimators::{EstimationContext, EstimatorKind, KernelShape, DEFAULT_BANDWIDTH, DEFAULT_P1};
use crate::inference::{bootstrap_ci, BootstrapPlan};
use crate::io::{csv_with_header, json_document, parse_claims, write_atomic, ClaimWindow, ClaimsFormat};
use crate::mc::{
    emit_rmse_ratio_log, run_coverage_experiment, run_dependent_experiment, run_iid_experiment, Design, ExperimentPlan,
    TruncationChoice, DESK_COVERAGE_BOOTSTRAP, DESK_COVERAGE_INTERVALS, DESK_REPLICATES,
};
use crate::pl::LtrcSample;
use crate::spectrum::{Spectrum, DEFAULT_K_GRID};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "srm", version, about = "Spectral risk measures from left-truncated right-censored losses")]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, env = "SRM_THREADS")]
    pub threads: Option<usize>,

    /// TOML file with default values for any flag (keys use underscores).
    #[arg(long, global = true, env = "SRM_CONFIG")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Point estimates and bootstrap intervals for a claims file.
    Estimate(EstimateArgs),
    /// Monte Carlo accuracy study.
    Simulate(SimulateArgs),
    /// Bootstrap coverage study.
    Coverage(CoverageArgs),
    /// Calibrate the truncation location of the dependent design.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long, env = "SRM_INPUT")]
    pub input: Option<PathBuf>,
    /// `ltrc` (y,t,delta) or `raw` (claim).
    #[arg(long, env = "SRM_FORMAT")]
    pub format: Option<String>,
    #[arg(long, env = "SRM_DEDUCTIBLE", allow_hyphen_values = true)]
    pub deductible: Option<f64>,
    #[arg(long, env = "SRM_LIMIT")]
    pub limit: Option<f64>,
    /// Support endpoint for ML/PM fits (default: the deductible).
    #[arg(long, env = "SRM_ANCHOR")]
    pub anchor: Option<f64>,
    /// Comma list of prod, emp, kernel, ml-exp, ml-pareto, pm-exp, pm-pareto.
    #[arg(long, env = "SRM_ESTIMATORS")]
    pub estimators: Option<String>,
    /// Comma list of risk aversion coefficients.
    #[arg(long, env = "SRM_K")]
    pub k: Option<String>,
    #[arg(long, env = "SRM_BOOTSTRAP")]
    pub bootstrap: Option<usize>,
    #[arg(long, env = "SRM_LEVEL")]
    pub level: Option<f64>,
    #[arg(long, env = "SRM_SEED")]
    pub seed: Option<u64>,
    #[arg(long, env = "SRM_P1")]
    pub p1: Option<f64>,
    #[arg(long, env = "SRM_BANDWIDTH")]
    pub bandwidth: Option<f64>,
    /// Output directory.
    #[arg(long, env = "SRM_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct DependentArgs {
    #[arg(long, env = "SRM_RHO", allow_hyphen_values = true)]
    pub rho: Option<f64>,
    #[arg(long, env = "SRM_PHI1")]
    pub phi1: Option<f64>,
    /// Default: chosen to hit the censoring target.
    #[arg(long, env = "SRM_PHI2")]
    pub phi2: Option<f64>,
    #[arg(long, env = "SRM_PHI3")]
    pub phi3: Option<f64>,
    /// Skip calibration and use this truncation location.
    #[arg(long, env = "SRM_MU", allow_hyphen_values = true)]
    pub mu: Option<f64>,
    /// Target probability that a draw is observed.
    #[arg(long, env = "SRM_TARGET_ALPHA")]
    pub target_alpha: Option<f64>,
    /// Target censoring percentage.
    #[arg(long, env = "SRM_TARGET_PC")]
    pub target_pc: Option<f64>,
    #[arg(long, env = "SRM_CALIBRATION_DRAWS")]
    pub calibration_draws: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// iid-exp, iid-pareto or dependent.
    #[arg(long, env = "SRM_DESIGN")]
    pub design: Option<String>,
    /// Comma list of sample sizes.
    #[arg(long, env = "SRM_N")]
    pub n: Option<String>,
    #[arg(long, env = "SRM_K")]
    pub k: Option<String>,
    #[arg(long, env = "SRM_REPS")]
    pub reps: Option<usize>,
    #[arg(long, env = "SRM_ESTIMATORS")]
    pub estimators: Option<String>,
    #[arg(long, env = "SRM_SEED")]
    pub seed: Option<u64>,
    /// `random` or `fixed` truncation for the i.i.d. designs.
    #[arg(long, env = "SRM_TRUNCATION")]
    pub truncation: Option<String>,
    /// Baseline estimator of the RMSE-ratio figure data.
    #[arg(long, env = "SRM_BASELINE")]
    pub baseline: Option<String>,
    #[arg(long, env = "SRM_OUT")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub dependent: DependentArgs,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    #[arg(long, env = "SRM_DESIGN")]
    pub design: Option<String>,
    #[arg(long, env = "SRM_N")]
    pub n: Option<String>,
    #[arg(long, env = "SRM_K")]
    pub k: Option<String>,
    /// Intervals per cell.
    #[arg(long, env = "SRM_REPS")]
    pub reps: Option<usize>,
    #[arg(long, env = "SRM_BOOTSTRAP")]
    pub bootstrap: Option<usize>,
    #[arg(long, env = "SRM_LEVEL")]
    pub level: Option<f64>,
    #[arg(long, env = "SRM_SEED")]
    pub seed: Option<u64>,
    #[arg(long, env = "SRM_TRUNCATION")]
    pub truncation: Option<String>,
    #[arg(long, env = "SRM_OUT")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub dependent: DependentArgs,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long, env = "SRM_SEED")]
    pub seed: Option<u64>,
    #[arg(long, env = "SRM_TOLERANCE")]
    pub tolerance: Option<f64>,
    #[arg(long, env = "SRM_OUT")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub dependent: DependentArgs,
}

/// Defaults read from `--config`; every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    input: Option<PathBuf>,
    format: Option<String>,
    deductible: Option<f64>,
    limit: Option<f64>,
    anchor: Option<f64>,
    estimators: Option<String>,
    k: Option<String>,
    n: Option<String>,
    bootstrap: Option<usize>,
    level: Option<f64>,
    seed: Option<u64>,
    p1: Option<f64>,
    bandwidth: Option<f64>,
    out: Option<PathBuf>,
    design: Option<String>,
    reps: Option<usize>,
    truncation: Option<String>,
    baseline: Option<String>,
    rho: Option<f64>,
    phi1: Option<f64>,
    phi2: Option<f64>,
    phi3: Option<f64>,
    mu: Option<f64>,
    target_alpha: Option<f64>,
    target_pc: Option<f64>,
    calibration_draws: Option<usize>,
    tolerance: Option<f64>,
    threads: Option<usize>,
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| SrmError::Config(format!("{}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| SrmError::Config(format!("{}: {e}", p.display())))
        }
    }
}

/// Re-labels a configuration complaint about a flag value as a usage error.
fn as_usage(e: SrmError) -> SrmError {
    match e {
        SrmError::Config(m) | SrmError::Domain(m) => SrmError::Usage(m),
        other => other,
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    let items: Vec<T> = s
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| SrmError::Usage(format!("invalid {what} `{x}`"))))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(SrmError::Usage(format!("empty {what} list")));
    }
    Ok(items)
}

fn parse_k_list(s: Option<String>) -> Result<Vec<f64>> {
    let ks = match s {
        Some(s) => parse_list::<f64>(&s, "k")?,
        None => DEFAULT_K_GRID.to_vec(),
    };
    for &k in &ks {
        Spectrum::exponential(k).map_err(as_usage)?;
    }
    Ok(ks)
}

fn parse_estimators(s: &str, p1: f64, bandwidth: f64) -> Result<Vec<EstimatorKind>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|name| {
            let kind: EstimatorKind = name.parse().map_err(as_usage)?;
            Ok(match kind {
                EstimatorKind::Pm { family, .. } => EstimatorKind::Pm { family, p1 },
                EstimatorKind::Kernel { .. } => EstimatorKind::Kernel { bandwidth, shape: KernelShape::Epanechnikov },
                k => k,
            })
        })
        .collect()
}

fn parse_truncation(s: Option<String>) -> Result<TruncationChoice> {
    match s.as_deref() {
        None | Some("random") => Ok(TruncationChoice::Random),
        Some("fixed") => Ok(TruncationChoice::Fixed),
        Some(other) => Err(SrmError::Usage(format!("unknown truncation `{other}` (expected random or fixed)"))),
    }
}

/// Dependent design settings after calibration.
#[derive(Debug, Clone, Copy, Serialize)]
struct ResolvedDependent {
    model: DependentModelConfig,
    calibration: Option<CalibrationSettings>,
}

fn resolve_dependent(
    args: &DependentArgs,
    file: &FileConfig,
    seed: u64,
    tolerance: Option<f64>,
) -> Result<ResolvedDependent> {
    let base = DependentModelConfig::default();
    let phi1 = args.phi1.or(file.phi1).unwrap_or(base.phi1);
    let phi3 = args.phi3.or(file.phi3).unwrap_or(base.phi3);
    let target_pc = args.target_pc.or(file.target_pc).unwrap_or(base.target_pc);
    let phi2 = match args.phi2.or(file.phi2) {
        Some(p) => p,
        None => DependentModelConfig::phi2_for_censoring(phi1, phi3, target_pc)?,
    };
    let mut model = DependentModelConfig {
        rho: args.rho.or(file.rho).unwrap_or(base.rho),
        phi1,
        phi2,
        phi3,
        mu: args.mu.or(file.mu),
        target_alpha: args.target_alpha.or(file.target_alpha).unwrap_or(base.target_alpha),
        target_pc,
    };
    model.validate(true)?;
    let mut calibration = None;
    if model.mu.is_none() {
        let defaults = CalibrationSettings::default();
        let settings = CalibrationSettings {
            draws: args.calibration_draws.or(file.calibration_draws).unwrap_or(defaults.draws),
            seed,
            tolerance: tolerance.unwrap_or(defaults.tolerance),
            ..defaults
        };
        model.mu = Some(calibrate_truncation_location(&model, model.target_alpha, &settings)?);
        calibration = Some(settings);
    }
    Ok(ResolvedDependent { model, calibration })
}

fn out_dir(arg: Option<PathBuf>, file: &FileConfig) -> PathBuf {
    arg.or_else(|| file.out.clone()).unwrap_or_else(|| PathBuf::from("srm-out"))
}

#[derive(Debug, Serialize)]
struct EstimateConfig {
    command: &'static str,
    input: PathBuf,
    format: ClaimsFormat,
    deductible: Option<f64>,
    limit: f64,
    anchor: Option<f64>,
    estimators: Vec<EstimatorKind>,
    k: Vec<f64>,
    bootstrap: usize,
    level: f64,
    seed: u64,
}

#[derive(Debug, Serialize)]
struct EstimateRow {
    group: String,
    estimator: String,
    k: f64,
    point: f64,
    std_error: Option<f64>,
    ci_low: Option<f64>,
    ci_high: Option<f64>,
    n_effective: usize,
}

#[derive(Debug, Serialize)]
struct GroupFailure {
    group: String,
    estimator: String,
    error: String,
}

fn cmd_estimate(args: EstimateArgs, file: &FileConfig) -> Result<i32> {
    let input =
        args.input.or_else(|| file.input.clone()).ok_or_else(|| SrmError::Usage("--input is required".into()))?;
    let format: ClaimsFormat = args.format.or_else(|| file.format.clone()).as_deref().unwrap_or("ltrc").parse()?;
    let deductible = args.deductible.or(file.deductible);
    let limit = args.limit.or(file.limit).unwrap_or(f64::INFINITY);
    let p1 = args.p1.or(file.p1).unwrap_or(DEFAULT_P1);
    let bandwidth = args.bandwidth.or(file.bandwidth).unwrap_or(DEFAULT_BANDWIDTH);
    let estimators = parse_estimators(
        args.estimators.or_else(|| file.estimators.clone()).as_deref().unwrap_or("prod"),
        p1,
        bandwidth,
    )?;
    for e in &estimators {
        e.validate().map_err(as_usage)?;
    }
    let ks = parse_k_list(args.k.or_else(|| file.k.clone()))?;
    let plan = BootstrapPlan {
        replicates: args.bootstrap.or(file.bootstrap).unwrap_or(1000),
        seed: args.seed.or(file.seed).unwrap_or(0),
        ci_level: args.level.or(file.level).unwrap_or(0.90),
    };
    plan.validate().map_err(as_usage)?;
    let window = match format {
        ClaimsFormat::RawClaims => Some(ClaimWindow::new(
            deductible.ok_or_else(|| SrmError::Config("raw claims need --deductible".into()))?,
            limit,
        )?),
        ClaimsFormat::LtrcTriples => None,
    };
    let anchor = args.anchor.or(file.anchor);
    let claims = parse_claims(&input, format, window.as_ref())?;
    let spectra: Vec<Spectrum> = ks.iter().map(|&k| Spectrum::exponential(k)).collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (group, obs) in &claims.groups {
        let gname = group.clone().unwrap_or_default();
        let sample = LtrcSample::new(obs.clone())?;
        let truncation = deductible
            .unwrap_or_else(|| obs.iter().map(|o| o.t).filter(|t| t.is_finite()).fold(f64::INFINITY, f64::min));
        let truncation = if truncation.is_finite() { truncation } else { sample.sorted_y()[0] };
        let ctx = EstimationContext::new(truncation, limit, anchor.unwrap_or(truncation));
        for kind in &estimators {
            match bootstrap_ci(&sample, kind, &spectra, &ctx, &plan) {
                Ok(reports) => rows.extend(reports.into_iter().map(|r| EstimateRow {
                    group: gname.clone(),
                    estimator: kind.label(),
                    k: r.k,
                    point: r.point,
                    std_error: r.std_error,
                    ci_low: r.ci_low,
                    ci_high: r.ci_high,
                    n_effective: r.n_effective,
                })),
                Err(e) => {
                    failures.push(GroupFailure { group: gname.clone(), estimator: kind.label(), error: e.to_string() })
                }
            }
        }
    }

    let config = EstimateConfig {
        command: "estimate",
        input,
        format,
        deductible,
        limit,
        anchor,
        estimators,
        k: ks,
        bootstrap: plan.replicates,
        level: plan.ci_level,
        seed: plan.seed,
    };
    let dir = out_dir(args.out, file);
    write_atomic(&dir.join("estimates.csv"), csv_with_header(&config, &rows)?.as_bytes())?;
    let body = serde_json::json!({ "rows": rows, "failures": failures });
    write_atomic(&dir.join("estimates.json"), json_document(&config, "estimates", &body)?.as_bytes())?;
    for f in &failures {
        eprintln!("group `{}` estimator {}: {}", f.group, f.estimator, f.error);
    }
    Ok(if failures.is_empty() { EXIT_OK } else { EXIT_COMPUTE })
}

#[derive(Debug, Serialize)]
struct McRow<'a> {
    design: Design,
    estimator: &'a str,
    n: usize,
    k: f64,
    mean: f64,
    sd: f64,
    rmse: f64,
    theoretical: f64,
    failures: usize,
}

#[derive(Debug, Serialize)]
struct SimulateConfig<'a> {
    command: &'static str,
    plan: &'a ExperimentPlan,
    baseline: String,
    dependent: Option<ResolvedDependent>,
}

/// Plan flags shared by `simulate` and `coverage`.
struct PlanFlags {
    design: Option<String>,
    n: Option<String>,
    k: Option<String>,
    reps: Option<usize>,
    seed: Option<u64>,
    truncation: Option<String>,
}

fn design_plan(flags: PlanFlags, default_reps: usize, file: &FileConfig) -> Result<ExperimentPlan> {
    let design: Design = flags.design.or_else(|| file.design.clone()).as_deref().unwrap_or("iid-exp").parse()?;
    let seed = flags.seed.or(file.seed).unwrap_or(0);
    let mut plan = ExperimentPlan::desk(design, seed);
    if let Some(n) = flags.n.or_else(|| file.n.clone()) {
        plan.n_grid = parse_list(&n, "sample size")?;
    }
    plan.k_grid = parse_k_list(flags.k.or_else(|| file.k.clone()))?;
    plan.replicates = flags.reps.or(file.reps).unwrap_or(default_reps);
    plan.truncation = parse_truncation(flags.truncation.or_else(|| file.truncation.clone()))?;
    Ok(plan)
}

fn cmd_simulate(args: SimulateArgs, file: &FileConfig) -> Result<i32> {
    let flags = PlanFlags {
        design: args.design,
        n: args.n,
        k: args.k,
        reps: args.reps,
        seed: args.seed,
        truncation: args.truncation,
    };
    let mut plan = design_plan(flags, DESK_REPLICATES, file)?;
    if let Some(list) = args.estimators.or_else(|| file.estimators.clone()) {
        let p1 = file.p1.unwrap_or(DEFAULT_P1);
        let bw = file.bandwidth.unwrap_or(DEFAULT_BANDWIDTH);
        plan.estimators = parse_estimators(&list, p1, bw)?;
    }
    plan.validate()?;
    let baseline: EstimatorKind =
        args.baseline.or_else(|| file.baseline.clone()).as_deref().unwrap_or("prod").parse().map_err(as_usage)?;

    let (result, dependent) = if plan.design == Design::Dependent {
        let dep = resolve_dependent(&args.dependent, file, plan.master_seed, file.tolerance)?;
        (run_dependent_experiment(&plan, &dep.model)?, Some(dep))
    } else {
        (run_iid_experiment(&plan)?, None)
    };
    let config = SimulateConfig { command: "simulate", plan: &plan, baseline: baseline.label(), dependent };
    let rows: Vec<McRow> = result
        .cells
        .iter()
        .map(|c| McRow {
            design: c.design,
            estimator: &c.estimator,
            n: c.n,
            k: c.k,
            mean: c.mean,
            sd: c.sd,
            rmse: c.rmse,
            theoretical: c.theoretical,
            failures: c.failures,
        })
        .collect();
    let dir = out_dir(args.out, file);
    write_atomic(&dir.join("results.csv"), csv_with_header(&config, &rows)?.as_bytes())?;
    write_atomic(&dir.join("results.json"), json_document(&config, "result", &result)?.as_bytes())?;
    if plan.estimators.contains(&baseline) {
        let (ratios, flagged) = emit_rmse_ratio_log(&result, &baseline)?;
        write_atomic(&dir.join("rmse_ratio.csv"), csv_with_header(&config, &ratios)?.as_bytes())?;
        for c in flagged {
            eprintln!("no RMSE ratio for {} n={} k={}: baseline RMSE is zero or undefined", c.estimator, c.n, c.k);
        }
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct CoverageConfig<'a> {
    command: &'static str,
    plan: &'a ExperimentPlan,
    bootstrap: usize,
    level: f64,
    dependent: Option<ResolvedDependent>,
}

fn cmd_coverage(args: CoverageArgs, file: &FileConfig) -> Result<i32> {
    let flags = PlanFlags {
        design: args.design,
        n: args.n,
        k: args.k,
        reps: args.reps,
        seed: args.seed,
        truncation: args.truncation,
    };
    let mut plan = design_plan(flags, DESK_COVERAGE_INTERVALS, file)?;
    plan.estimators = vec![EstimatorKind::Prod];
    plan.validate()?;
    let bootstrap = args.bootstrap.or(file.bootstrap).unwrap_or(DESK_COVERAGE_BOOTSTRAP);
    let level = args.level.or(file.level).unwrap_or(0.90);
    BootstrapPlan { replicates: bootstrap, seed: 0, ci_level: level }.validate().map_err(as_usage)?;
    let dependent = if plan.design == Design::Dependent {
        Some(resolve_dependent(&args.dependent, file, plan.master_seed, file.tolerance)?)
    } else {
        None
    };
    let result = run_coverage_experiment(&plan, bootstrap, level, dependent.as_ref().map(|d| &d.model))?;
    let config = CoverageConfig { command: "coverage", plan: &plan, bootstrap, level, dependent };
    let dir = out_dir(args.out, file);
    write_atomic(&dir.join("coverage.csv"), csv_with_header(&config, &result.cells)?.as_bytes())?;
    write_atomic(&dir.join("coverage.json"), json_document(&config, "coverage", &result)?.as_bytes())?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct CalibrateConfig {
    command: &'static str,
    seed: u64,
}

fn cmd_calibrate(args: CalibrateArgs, file: &FileConfig) -> Result<i32> {
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let mut dep_args = args.dependent.clone();
    dep_args.mu = None;
    let tolerance = args.tolerance.or(file.tolerance);
    let resolved = resolve_dependent(&dep_args, &FileConfig { mu: None, ..file.clone() }, seed, tolerance)?;
    let config = CalibrateConfig { command: "calibrate", seed };
    let dir = out_dir(args.out, file);
    write_atomic(&dir.join("calibration.json"), json_document(&config, "calibration", &resolved)?.as_bytes())?;
    println!("mu = {}", resolved.model.mu.unwrap());
    Ok(EXIT_OK)
}

fn exit_code(e: &SrmError) -> i32 {
    match e {
        SrmError::Usage(_) | SrmError::Config(_) => EXIT_USAGE,
        _ => EXIT_COMPUTE,
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    let file = load_config(cli.config.as_deref())?;
    let threads = cli.threads.or(file.threads);
    let run = move || match cli.command {
        Command::Estimate(a) => cmd_estimate(a, &file),
        Command::Simulate(a) => cmd_simulate(a, &file),
        Command::Coverage(a) => cmd_coverage(a, &file),
        Command::Calibrate(a) => cmd_calibrate(a, &file),
    };
    match threads {
        Some(0) => Err(SrmError::Usage("--threads must be positive".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| SrmError::Config(e.to_string()))?
            .install(run),
        None => run(),
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
