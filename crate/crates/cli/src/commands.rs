//! Subcommand definitions and implementations.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use vtreg_core::{
    bootstrap_bands, compare_methods, conditional_cdf, default_k, fit_penalized_ml,
    fit_varying_thresholds, implied_from_fit, implied_linear_model, normal_quantile,
    select_lambda_cv, simulate_linear, wald_bands, CoefCurves, ConditionalCdf, Dataset, Fitter,
    ForestParams, GridSpec, GridStrategy, Link, Matrix, MethodSpec, PmlFit, SplineSpec,
    ThresholdGrid, VtConfig, VtFit, DEFAULT_BASIS,
};

use crate::io;
use crate::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "vtreg",
    version,
    about = "Conditional-distribution estimation via varying-thresholds models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw a dataset from a linear model with standard normal covariates
    Simulate(SimulateArgs),
    /// Fit per-threshold binary models and export the coefficient curves
    Fit(FitArgs),
    /// Fit smooth coefficient functions by penalized spline likelihood
    Curves(CurvesArgs),
    /// Export estimated conditional distribution functions for covariate profiles
    Cdf(CdfArgs),
    /// Export conditional quantiles for covariate profiles
    Quantiles(QuantilesArgs),
    /// Bootstrap pointwise confidence bands for the coefficient curves
    Bootstrap(BootstrapArgs),
    /// Fit per-threshold random forests and export Gini importances
    Importance(ImportanceArgs),
    /// Repeated-split prediction comparison of several methods
    Eval(EvalArgs),
    /// Map a linear intercept function onto the implied linear model
    Equiv(EquivArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LinkChoice {
    Logit,
    Probit,
}

impl From<LinkChoice> for Link {
    fn from(c: LinkChoice) -> Link {
        match c {
            LinkChoice::Logit => Link::Logit,
            LinkChoice::Probit => Link::Probit,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GridChoice {
    /// Interior thresholds at empirical quantiles j/k
    EqualMass,
    /// Interior thresholds uniformly spaced on [min, max]
    EqualSpacing,
}

impl From<GridChoice> for GridStrategy {
    fn from(c: GridChoice) -> GridStrategy {
        match c {
            GridChoice::EqualMass => GridStrategy::EqualMass,
            GridChoice::EqualSpacing => GridStrategy::EqualSpacing,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FitterChoice {
    Ml,
    Lasso,
    Forest,
    Spline,
}

#[derive(Args, Debug)]
pub struct DataArgs {
    /// Input CSV (header row, comma delimiter, numeric cells)
    #[arg(long)]
    pub input: PathBuf,
    /// Response column name
    #[arg(long)]
    pub response: String,
    /// Comma-separated covariate columns; default: every other column
    #[arg(long, value_delimiter = ',')]
    pub covariates: Option<Vec<String>>,
    /// Standardize covariates to mean 0 / sd 1 before fitting
    #[arg(long)]
    pub standardize: bool,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset, CliError> {
        let d = io::load_dataset(&self.input, &self.response, self.covariates.as_deref())?;
        if self.standardize {
            let (s, _) = d.standardize()?;
            Ok(s)
        } else {
            Ok(d)
        }
    }

    fn describe(&self) -> serde_json::Value {
        json!({
            "input": self.input,
            "response": self.response,
            "covariates": self.covariates,
            "standardize": self.standardize,
        })
    }
}

#[derive(Args, Debug)]
pub struct GridArgs {
    /// Number of grid intervals; default min(20, distinct responses - 1)
    #[arg(long)]
    pub k: Option<usize>,
    /// Interior threshold placement
    #[arg(long, value_enum, default_value = "equal-mass")]
    pub grid: GridChoice,
    /// Treat the response as ordinal with this many categories
    #[arg(long, conflicts_with_all = ["k", "grid"])]
    pub ordinal: Option<usize>,
}

impl GridArgs {
    fn spec(&self, y: &[f64]) -> GridSpec {
        match self.ordinal {
            Some(categories) => GridSpec::Ordinal { categories },
            None => GridSpec::Continuous {
                k: self.k.unwrap_or_else(|| default_k(y)),
                strategy: self.grid.into(),
            },
        }
    }

    fn build(&self, y: &[f64]) -> Result<ThresholdGrid, CliError> {
        Ok(self.spec(y).build(y)?)
    }

    fn describe(&self, y: &[f64]) -> serde_json::Value {
        match self.ordinal {
            Some(c) => json!({"kind": "ordinal", "categories": c}),
            None => json!({
                "kind": "continuous",
                "k": self.k.unwrap_or_else(|| default_k(y)),
                "strategy": match self.grid {
                    GridChoice::EqualMass => "equal-mass",
                    GridChoice::EqualSpacing => "equal-spacing",
                },
            }),
        }
    }
}

#[derive(Args, Debug)]
pub struct ForestArgs {
    /// Trees per forest
    #[arg(long, default_value_t = 500)]
    pub n_trees: usize,
    /// Features tried per split; default ceil(sqrt(p))
    #[arg(long)]
    pub mtry: Option<usize>,
    /// Minimum observations per leaf
    #[arg(long, default_value_t = 5)]
    pub min_node: usize,
    /// Depth cap
    #[arg(long)]
    pub max_depth: Option<usize>,
}

impl ForestArgs {
    fn params(&self, seed: u64) -> ForestParams {
        ForestParams {
            n_trees: self.n_trees,
            mtry: self.mtry,
            min_node: self.min_node,
            max_depth: self.max_depth,
            seed,
        }
    }

    fn describe(&self) -> serde_json::Value {
        json!({
            "n_trees": self.n_trees,
            "mtry": self.mtry,
            "min_node": self.min_node,
            "max_depth": self.max_depth,
        })
    }
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Observation count
    #[arg(long)]
    pub n: usize,
    /// Intercept followed by the covariate coefficients, e.g. 1,0.5,1
    #[arg(long, value_delimiter = ',', required = true)]
    pub gamma: Vec<f64>,
    /// Noise standard deviation
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value = "logit")]
    pub link: LinkChoice,
    /// Per-threshold fitter (ml or lasso; see `importance` for forests and
    /// `curves` for the smooth spline path)
    #[arg(long, value_enum, default_value = "ml")]
    pub fitter: FitterChoice,
    /// L1 penalty weight for the lasso fitter
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Confidence level for the se_lower/se_upper columns
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CurvesArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value = "logit")]
    pub link: LinkChoice,
    /// Number of cubic B-spline basis functions
    #[arg(long, default_value_t = DEFAULT_BASIS)]
    pub spline_basis: usize,
    /// Difference-penalty weight; omit to select by cross validation
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Candidate penalty weights for cross validation
    #[arg(long, value_delimiter = ',')]
    pub lambda_grid: Option<Vec<f64>>,
    /// Cross-validation folds
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Evaluation points along the response range
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ProfileArgs {
    /// Explicit covariate profile like "x1=0.5,x2=-1" (repeatable);
    /// unnamed covariates sit at their column means
    #[arg(long = "at")]
    pub at: Vec<String>,
    /// Covariate swept over its observed range (others at their means);
    /// default: the first covariate
    #[arg(long)]
    pub sweep: Option<String>,
    /// Number of sweep points
    #[arg(long, default_value_t = 25)]
    pub points: usize,
}

#[derive(Args, Debug)]
pub struct CdfArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value = "logit")]
    pub link: LinkChoice,
    #[arg(long, value_enum, default_value = "ml")]
    pub fitter: FitterChoice,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_BASIS)]
    pub spline_basis: usize,
    #[command(flatten)]
    pub forest: ForestArgs,
    #[command(flatten)]
    pub profiles: ProfileArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct QuantilesArgs {
    #[command(flatten)]
    pub cdf: CdfArgs,
    /// Quantile levels to extract
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75")]
    pub alphas: Vec<f64>,
}

#[derive(Args, Debug)]
pub struct BootstrapArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value = "logit")]
    pub link: LinkChoice,
    #[arg(long, value_enum, default_value = "ml")]
    pub fitter: FitterChoice,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Bootstrap replicates
    #[arg(long, default_value_t = 1000)]
    pub b: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Also emit Wald bands from the per-threshold standard errors
    #[arg(long)]
    pub wald: bool,
    /// Worker threads for the replicates
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ImportanceArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value = "logit")]
    pub link: LinkChoice,
    #[command(flatten)]
    pub forest: ForestArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated methods: glm, vcpar, vclasso, vcrf, oracle
    #[arg(long, value_delimiter = ',', default_value = "glm,vcpar,vcrf")]
    pub methods: Vec<String>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value = "logit")]
    pub link: LinkChoice,
    /// L1 penalty for the vclasso method
    #[arg(long, default_value_t = 0.02)]
    pub lambda: f64,
    #[command(flatten)]
    pub forest: ForestArgs,
    #[arg(long, default_value_t = 50)]
    pub n_splits: usize,
    #[arg(long, default_value_t = 0.8)]
    pub train_frac: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EquivArgs {
    /// Intercept of the linear intercept function
    #[arg(long, conflicts_with = "fit_json")]
    pub alpha0: Option<f64>,
    /// Slope of the linear intercept function (must be negative)
    #[arg(long, conflicts_with = "fit_json", allow_hyphen_values = true)]
    pub slope: Option<f64>,
    /// Constant covariate coefficients
    #[arg(long, value_delimiter = ',', conflicts_with = "fit_json", allow_hyphen_values = true)]
    pub beta: Vec<f64>,
    #[arg(long, value_enum, default_value = "probit")]
    pub link: LinkChoice,
    /// Take (alpha0, slope, beta) from a fitted spline model JSON instead
    #[arg(long)]
    pub fit_json: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Serialized form of a threshold grid.
#[derive(Serialize, Deserialize)]
pub struct GridJson {
    pub kind: String,
    pub thetas: Vec<f64>,
}

impl GridJson {
    pub fn of(grid: &ThresholdGrid) -> Self {
        GridJson {
            kind: match grid.kind() {
                vtreg_core::GridKind::Continuous => "continuous".to_string(),
                vtreg_core::GridKind::Ordinal => "ordinal".to_string(),
            },
            thetas: grid.thetas().to_vec(),
        }
    }
}

/// Serialized form of a penalized spline fit.
#[derive(Serialize, Deserialize)]
pub struct PmlFitJson {
    pub spec: SplineSpecJson,
    pub lambda: f64,
    /// Row-major (p+1) x m coefficient matrix.
    pub alpha: Vec<f64>,
    pub loglik: f64,
    pub converged: bool,
    pub penalized_loglik: f64,
    pub link: String,
    pub p: usize,
}

#[derive(Serialize, Deserialize)]
pub struct SplineSpecJson {
    pub degree: usize,
    pub m: usize,
    pub lo: f64,
    pub hi: f64,
    pub knots: Vec<f64>,
}

impl PmlFitJson {
    pub fn of(fit: &PmlFit) -> Self {
        PmlFitJson {
            spec: SplineSpecJson {
                degree: fit.spec.degree(),
                m: fit.spec.basis_count(),
                lo: fit.spec.lo(),
                hi: fit.spec.hi(),
                knots: fit.spec.knots().to_vec(),
            },
            lambda: fit.lambda,
            alpha: fit.alpha.data().to_vec(),
            loglik: fit.loglik,
            converged: fit.converged,
            penalized_loglik: fit.penalized_loglik,
            link: fit.link.name().to_string(),
            p: fit.p(),
        }
    }

    pub fn into_fit(self, path: &Path) -> Result<PmlFit, CliError> {
        let spec = SplineSpec::new(self.spec.lo, self.spec.hi, self.spec.m)?;
        let rows = self.p + 1;
        if self.alpha.len() != rows * self.spec.m {
            return Err(CliError::Json {
                path: path.to_path_buf(),
                message: format!(
                    "alpha has {} entries, expected {}",
                    self.alpha.len(),
                    rows * self.spec.m
                ),
            });
        }
        let link = match self.link.as_str() {
            "logit" => Link::Logit,
            "probit" => Link::Probit,
            other => {
                return Err(CliError::Json {
                    path: path.to_path_buf(),
                    message: format!("unknown link '{other}'"),
                })
            }
        };
        Ok(PmlFit::from_parts(
            Matrix::from_vec(rows, self.spec.m, self.alpha),
            self.lambda,
            spec,
            link,
            self.loglik,
            self.penalized_loglik,
            self.converged,
        ))
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    PathBuf::from(format!("{}.meta.json", out.display()))
}

fn write_with_sidecar(
    out: &Path,
    content: &str,
    command: &str,
    config: serde_json::Value,
) -> Result<(), CliError> {
    io::write_file(out, content)?;
    let sidecar = json!({
        "tool": "vtreg",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "output": out,
        "config": config,
    });
    let text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    io::write_file(&sidecar_path(out), &text)
}

fn parse_profile(spec: &str, names: &[String], means: &[f64]) -> Result<Vec<f64>, CliError> {
    let mut x = means.to_vec();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (name, value) = part.split_once('=').ok_or_else(|| {
            CliError::config(format!("profile entry '{part}' is not name=value"))
        })?;
        let idx = names
            .iter()
            .position(|n| n == name.trim())
            .ok_or_else(|| CliError::config(format!("unknown covariate '{}'", name.trim())))?;
        x[idx] = value
            .trim()
            .parse::<f64>()
            .map_err(|_| CliError::config(format!("profile value '{value}' is not a number")))?;
    }
    Ok(x)
}

struct Profile {
    sweep_value: Option<f64>,
    x: Vec<f64>,
}

fn resolve_profiles(d: &Dataset, args: &ProfileArgs) -> Result<Vec<Profile>, CliError> {
    let means = d.column_means();
    if !args.at.is_empty() {
        return args
            .at
            .iter()
            .map(|spec| {
                Ok(Profile {
                    sweep_value: None,
                    x: parse_profile(spec, d.names(), &means)?,
                })
            })
            .collect();
    }
    if d.p() == 0 {
        return Ok(vec![Profile {
            sweep_value: None,
            x: Vec::new(),
        }]);
    }
    let sweep_name = args
        .sweep
        .clone()
        .unwrap_or_else(|| d.names()[0].clone());
    let j = d
        .names()
        .iter()
        .position(|n| *n == sweep_name)
        .ok_or_else(|| CliError::config(format!("unknown covariate '{sweep_name}'")))?;
    let col = d.x().column(j);
    let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let points = args.points.max(2);
    Ok((0..points)
        .map(|i| {
            let v = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            let mut x = means.clone();
            x[j] = v;
            Profile {
                sweep_value: Some(v),
                x,
            }
        })
        .collect())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn check_lambda(lambda: Option<f64>) -> Result<(), CliError> {
    match lambda {
        Some(l) if l.is_nan() || l < 0.0 => Err(CliError::config(format!(
            "--lambda must be nonnegative, got {l}"
        ))),
        _ => Ok(()),
    }
}

fn vt_fitter(
    choice: FitterChoice,
    lambda: Option<f64>,
    forest: &ForestArgs,
    seed: u64,
) -> Result<Fitter, CliError> {
    check_lambda(lambda)?;
    match choice {
        FitterChoice::Ml => Ok(Fitter::Ml),
        FitterChoice::Lasso => Ok(Fitter::Lasso {
            lambda: lambda
                .ok_or_else(|| CliError::config("--fitter lasso requires --lambda"))?,
        }),
        FitterChoice::Forest => Ok(Fitter::Forest(forest.params(seed))),
        FitterChoice::Spline => Err(CliError::config(
            "--fitter spline is not a per-threshold fitter here; see `vtreg curves`",
        )),
    }
}

fn fit_vt(d: &Dataset, grid: &ThresholdGrid, link: Link, fitter: &Fitter) -> Result<VtFit, CliError> {
    let fit = fit_varying_thresholds(d, grid, link, fitter)?;
    for (model, theta) in fit.models.iter().zip(fit.grid.interior()) {
        if let Some(b) = model.as_binary() {
            for w in &b.warnings {
                eprintln!("warning: threshold {theta}: {w:?}");
            }
        }
    }
    Ok(fit)
}

fn run_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let (gamma0, rest) = args
        .gamma
        .split_first()
        .ok_or_else(|| CliError::config("--gamma needs at least the intercept"))?;
    let d = simulate_linear(args.n, *gamma0, rest, args.sigma, args.seed)?;
    let config = json!({
        "n": args.n,
        "gamma0": gamma0,
        "gamma": rest,
        "sigma": args.sigma,
        "seed": args.seed,
    });
    write_with_sidecar(&args.out, &io::dataset_csv(&d), "simulate", config)
}

fn run_fit(args: &FitArgs) -> Result<(), CliError> {
    if matches!(args.fitter, FitterChoice::Forest) {
        return Err(CliError::config(
            "the forest fitter has no coefficient curves; use `vtreg importance` or `vtreg cdf`",
        ));
    }
    let fitter = vt_fitter(args.fitter, args.lambda, &default_forest_args(), 0)?;
    let d = args.data.load()?;
    let grid = args.grid.build(d.y())?;
    let fit = fit_vt(&d, &grid, args.link.into(), &fitter)?;
    let curves = fit.coefficient_curves()?;
    let z = normal_quantile((1.0 + args.level) / 2.0);
    let config = json!({
        "data": args.data.describe(),
        "grid": args.grid.describe(d.y()),
        "grid_json": GridJson::of(&grid),
        "link": link_name(args.link),
        "fitter": fitter_name(args.fitter),
        "lambda": args.lambda,
        "level": args.level,
    });
    write_with_sidecar(&args.out, &io::curves_csv(&curves, z), "fit", config)
}

fn default_forest_args() -> ForestArgs {
    ForestArgs {
        n_trees: 500,
        mtry: None,
        min_node: 5,
        max_depth: None,
    }
}

fn link_name(c: LinkChoice) -> &'static str {
    Link::from(c).name()
}

fn fitter_name(c: FitterChoice) -> &'static str {
    match c {
        FitterChoice::Ml => "ml",
        FitterChoice::Lasso => "lasso",
        FitterChoice::Forest => "forest",
        FitterChoice::Spline => "spline",
    }
}

fn run_curves(args: &CurvesArgs) -> Result<(), CliError> {
    check_lambda(args.lambda)?;
    if let Some(grid) = &args.lambda_grid {
        for &l in grid {
            check_lambda(Some(l))?;
        }
    }
    let d = args.data.load()?;
    let spec = SplineSpec::from_response(d.y(), args.spline_basis)?;
    let link: Link = args.link.into();
    let lambda = match (args.lambda, &args.lambda_grid) {
        (Some(l), None) => l,
        (None, Some(grid)) => select_lambda_cv(&d, &spec, link, grid, args.folds, args.seed)?,
        (None, None) => {
            return Err(CliError::config("provide --lambda or --lambda-grid"));
        }
        (Some(_), Some(_)) => {
            return Err(CliError::config(
                "--lambda and --lambda-grid are mutually exclusive",
            ));
        }
    };
    let fit = fit_penalized_ml(&d, &spec, lambda, link)?;
    if !fit.converged {
        eprintln!("warning: optimizer did not reach the convergence tolerance");
    }
    let points = args.points.max(2);
    let y_grid: Vec<f64> = (0..points)
        .map(|i| spec.lo() + (spec.hi() - spec.lo()) * i as f64 / (points - 1) as f64)
        .collect();
    let mut names = vec!["(intercept)".to_string()];
    names.extend(d.names().iter().cloned());
    let mut estimates = Vec::with_capacity(names.len());
    let mut ses = Vec::with_capacity(names.len());
    let mut have_se = true;
    for j in 0..names.len() {
        estimates.push(fit.coef_function(j, &y_grid)?);
        match fit.coef_function_se(j, &y_grid)? {
            Some(se) => ses.push(se),
            None => have_se = false,
        }
    }
    let curves = CoefCurves {
        names,
        thetas: y_grid,
        estimates,
        se: have_se.then_some(ses),
    };
    let z = normal_quantile((1.0 + args.level) / 2.0);
    let config = json!({
        "data": args.data.describe(),
        "link": link_name(args.link),
        "spline_basis": args.spline_basis,
        "lambda": lambda,
        "lambda_grid": args.lambda_grid,
        "folds": args.folds,
        "points": args.points,
        "level": args.level,
        "seed": args.seed,
        "se_approx": fit.se_approx,
    });
    write_with_sidecar(&args.out, &io::curves_csv(&curves, z), "curves", config.clone())?;
    let model_path = args.out.with_extension("model.json");
    let model = serde_json::to_string_pretty(&PmlFitJson::of(&fit)).expect("model serializes");
    write_with_sidecar(&model_path, &model, "curves", config)
}

enum FittedModel {
    Vt(VtFit),
    Spline(PmlFit),
}

fn validate_profile_fitter(args: &CdfArgs) -> Result<(), CliError> {
    check_lambda(args.lambda)?;
    match args.fitter {
        FitterChoice::Spline | FitterChoice::Lasso if args.lambda.is_none() => Err(
            CliError::config(format!("--fitter {} requires --lambda", fitter_name(args.fitter))),
        ),
        _ => Ok(()),
    }
}

fn fit_for_profiles(args: &CdfArgs, d: &Dataset) -> Result<FittedModel, CliError> {
    match args.fitter {
        FitterChoice::Spline => {
            let spec = SplineSpec::from_response(d.y(), args.spline_basis)?;
            let lambda = args
                .lambda
                .ok_or_else(|| CliError::config("--fitter spline requires --lambda"))?;
            Ok(FittedModel::Spline(fit_penalized_ml(
                d,
                &spec,
                lambda,
                args.link.into(),
            )?))
        }
        choice => {
            let grid = args.grid.build(d.y())?;
            let fitter = vt_fitter(choice, args.lambda, &args.forest, args.seed)?;
            Ok(FittedModel::Vt(fit_vt(d, &grid, args.link.into(), &fitter)?))
        }
    }
}

fn cdf_rows(model: &FittedModel, profile: &Profile) -> Result<Vec<(f64, f64)>, CliError> {
    match model {
        FittedModel::Vt(fit) => {
            let cdf = conditional_cdf(fit, &profile.x)?;
            Ok(match cdf {
                ConditionalCdf::PiecewiseLinear { thetas, probs } => {
                    thetas.into_iter().zip(probs).collect()
                }
                ConditionalCdf::Step { points, cumulative } => {
                    points.into_iter().zip(cumulative).collect()
                }
            })
        }
        FittedModel::Spline(fit) => {
            let points = 101;
            let (lo, hi) = (fit.spec.lo(), fit.spec.hi());
            (0..points)
                .map(|i| {
                    let y = lo + (hi - lo) * i as f64 / (points - 1) as f64;
                    Ok((y, fit.cdf(&profile.x, y)?))
                })
                .collect()
        }
    }
}

fn run_cdf(args: &CdfArgs) -> Result<(), CliError> {
    validate_profile_fitter(args)?;
    let d = args.data.load()?;
    let model = fit_for_profiles(args, &d)?;
    let profiles = resolve_profiles(&d, &args.profiles)?;
    let mut out = String::from("profile,sweep_value,theta,prob\n");
    for (idx, profile) in profiles.iter().enumerate() {
        for (theta, prob) in cdf_rows(&model, profile)? {
            out.push_str(&format!(
                "{idx},{},{theta},{prob}\n",
                fmt_opt(profile.sweep_value)
            ));
        }
    }
    let config = cdf_config(args, &d);
    write_with_sidecar(&args.out, &out, "cdf", config)
}

fn cdf_config(args: &CdfArgs, d: &Dataset) -> serde_json::Value {
    json!({
        "data": args.data.describe(),
        "grid": args.grid.describe(d.y()),
        "link": link_name(args.link),
        "fitter": fitter_name(args.fitter),
        "lambda": args.lambda,
        "spline_basis": args.spline_basis,
        "forest": args.forest.describe(),
        "sweep": args.profiles.sweep,
        "at": args.profiles.at,
        "points": args.profiles.points,
        "seed": args.seed,
    })
}

/// Generalized inverse of a tabulated distribution function.
fn quantile_from_rows(rows: &[(f64, f64)], alpha: f64) -> f64 {
    for i in 0..rows.len() {
        if rows[i].1 >= alpha {
            if i == 0 {
                return rows[0].0;
            }
            let (t0, p0) = rows[i - 1];
            let (t1, p1) = rows[i];
            if p1 > p0 {
                return t0 + (alpha - p0) / (p1 - p0) * (t1 - t0);
            }
            return t1;
        }
    }
    rows.last().map(|r| r.0).unwrap_or(f64::NAN)
}

fn run_quantiles(args: &QuantilesArgs) -> Result<(), CliError> {
    for &a in &args.alphas {
        if !(a > 0.0 && a < 1.0) {
            return Err(CliError::config(format!(
                "quantile level {a} must lie in (0, 1)"
            )));
        }
    }
    validate_profile_fitter(&args.cdf)?;
    let d = args.cdf.data.load()?;
    let model = fit_for_profiles(&args.cdf, &d)?;
    let profiles = resolve_profiles(&d, &args.cdf.profiles)?;
    let mut out = String::from("profile,sweep_value,alpha,quantile\n");
    for (idx, profile) in profiles.iter().enumerate() {
        match &model {
            FittedModel::Vt(fit) => {
                let cdf = conditional_cdf(fit, &profile.x)?;
                for &alpha in &args.alphas {
                    out.push_str(&format!(
                        "{idx},{},{alpha},{}\n",
                        fmt_opt(profile.sweep_value),
                        cdf.quantile(alpha)
                    ));
                }
            }
            FittedModel::Spline(_) => {
                let rows = cdf_rows(&model, profile)?;
                for &alpha in &args.alphas {
                    out.push_str(&format!(
                        "{idx},{},{alpha},{}\n",
                        fmt_opt(profile.sweep_value),
                        quantile_from_rows(&rows, alpha)
                    ));
                }
            }
        }
    }
    let mut config = cdf_config(&args.cdf, &d);
    config["alphas"] = json!(args.alphas);
    write_with_sidecar(&args.cdf.out, &out, "quantiles", config)
}

fn run_bootstrap(args: &BootstrapArgs) -> Result<(), CliError> {
    if matches!(args.fitter, FitterChoice::Forest | FitterChoice::Spline) {
        return Err(CliError::config(
            "bootstrap bands need a per-threshold linear predictor (ml or lasso)",
        ));
    }
    let d = args.data.load()?;
    let config = VtConfig {
        link: args.link.into(),
        fitter: vt_fitter(args.fitter, args.lambda, &default_forest_args(), 0)?,
        grid: args.grid.spec(d.y()),
    };
    let bands = if args.threads > 1 {
        crate::bootstrap_bands_threaded(&d, &config, args.b, args.level, args.seed, args.threads)?
    } else {
        bootstrap_bands(&d, &config, args.b, args.level, args.seed)?
    };
    let mut all = vec![&bands];
    let wald;
    if args.wald {
        let grid = config.grid.build(d.y())?;
        let fit = fit_vt(&d, &grid, config.link, &config.fitter)?;
        wald = wald_bands(&fit, args.level)?;
        all.push(&wald);
    }
    let meta = json!({
        "data": args.data.describe(),
        "grid": args.grid.describe(d.y()),
        "link": link_name(args.link),
        "fitter": fitter_name(args.fitter),
        "lambda": args.lambda,
        "b": args.b,
        "level": args.level,
        "seed": args.seed,
        "threads": args.threads,
        "wald": args.wald,
        "dropped_replicates": bands.dropped_replicates,
        "widened_cells": bands.widened,
    });
    write_with_sidecar(&args.out, &io::bands_csv(&all), "bootstrap", meta)
}

fn run_importance(args: &ImportanceArgs) -> Result<(), CliError> {
    let d = args.data.load()?;
    let grid = args.grid.build(d.y())?;
    let fitter = Fitter::Forest(args.forest.params(args.seed));
    let fit = fit_vt(&d, &grid, args.link.into(), &fitter)?;
    let p = d.p();
    let mut mean = vec![0.0; p];
    let mut per_threshold = Vec::with_capacity(fit.models.len());
    for (model, &theta) in fit.models.iter().zip(fit.grid.interior()) {
        let forest = model.as_forest().expect("forest fitter");
        for (m, imp) in mean.iter_mut().zip(&forest.importances) {
            *m += imp;
        }
        per_threshold.push((theta, forest.importances.clone()));
    }
    mean.iter_mut().for_each(|v| *v /= fit.models.len() as f64);
    let config = json!({
        "data": args.data.describe(),
        "grid": args.grid.describe(d.y()),
        "link": link_name(args.link),
        "forest": args.forest.describe(),
        "seed": args.seed,
        "aggregation": "mean over interior thresholds",
    });
    write_with_sidecar(
        &args.out,
        &io::importance_csv(d.names(), &mean),
        "importance",
        config.clone(),
    )?;
    let by_threshold = args.out.with_extension("by_threshold.csv");
    write_with_sidecar(
        &by_threshold,
        &io::importance_by_threshold_csv(d.names(), &per_threshold),
        "importance",
        config,
    )
}

fn parse_methods(args: &EvalArgs) -> Result<Vec<MethodSpec>, CliError> {
    args.methods
        .iter()
        .map(|raw| {
            let name = raw.trim().to_ascii_lowercase();
            let k = args.k_resolved();
            let strategy: GridStrategy = args.grid.grid.into();
            Ok(match name.as_str() {
                "glm" => MethodSpec::Glm,
                "vcpar" => MethodSpec::VtMl {
                    link: args.link.into(),
                    k,
                    strategy,
                },
                "vclasso" => MethodSpec::VtLasso {
                    k,
                    strategy,
                    lambda: args.lambda,
                },
                "vcrf" => MethodSpec::VtForest {
                    link: args.link.into(),
                    k,
                    strategy,
                    params: args.forest.params(args.seed),
                },
                "oracle" => MethodSpec::Oracle,
                other => {
                    return Err(CliError::config(format!(
                        "unknown method '{other}' (expected glm, vcpar, vclasso, vcrf, oracle)"
                    )))
                }
            })
        })
        .collect()
}

impl EvalArgs {
    fn k_resolved(&self) -> usize {
        self.grid.k.unwrap_or(10)
    }
}

fn run_eval(args: &EvalArgs) -> Result<(), CliError> {
    check_lambda(Some(args.lambda))?;
    if args.grid.ordinal.is_some() {
        return Err(CliError::config(
            "the evaluation harness compares continuous-response methods",
        ));
    }
    let d = args.data.load()?;
    let methods = parse_methods(args)?;
    let report = compare_methods(&d, &methods, args.n_splits, args.train_frac, args.seed)?;
    for (split, method) in &report.skipped {
        eprintln!("warning: {method} failed on split {split}; skipped");
    }
    let config = json!({
        "data": args.data.describe(),
        "methods": report.methods,
        "k": args.k_resolved(),
        "strategy": match args.grid.grid {
            GridChoice::EqualMass => "equal-mass",
            GridChoice::EqualSpacing => "equal-spacing",
        },
        "link": link_name(args.link),
        "lambda": args.lambda,
        "forest": args.forest.describe(),
        "n_splits": args.n_splits,
        "train_frac": args.train_frac,
        "seed": args.seed,
    });
    write_with_sidecar(&args.out, &io::eval_csv(&report), "eval", config)
}

fn run_equiv(args: &EquivArgs) -> Result<(), CliError> {
    let (gamma0, gamma, sigma, source) = match &args.fit_json {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let parsed: PmlFitJson =
                serde_json::from_str(&text).map_err(|e| CliError::Json {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
            let fit = parsed.into_fit(path)?;
            let (g0, g, s) = implied_from_fit(&fit)?;
            (g0, g, s, json!({"fit_json": path}))
        }
        None => {
            let alpha0 = args
                .alpha0
                .ok_or_else(|| CliError::config("provide --alpha0 and --slope, or --fit-json"))?;
            let slope = args
                .slope
                .ok_or_else(|| CliError::config("provide --alpha0 and --slope, or --fit-json"))?;
            let (g0, g, s) = implied_linear_model(alpha0, slope, &args.beta, args.link.into())?;
            (
                g0,
                g,
                s,
                json!({"alpha0": alpha0, "slope": slope, "beta": args.beta}),
            )
        }
    };
    let body = serde_json::to_string_pretty(&json!({
        "gamma0": gamma0,
        "gamma": gamma,
        "sigma": sigma,
    }))
    .expect("result serializes");
    let config = json!({
        "link": link_name(args.link),
        "source": source,
    });
    write_with_sidecar(&args.out, &body, "equiv", config)
}

pub fn run(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(args) => run_simulate(args),
        Command::Fit(args) => run_fit(args),
        Command::Curves(args) => run_curves(args),
        Command::Cdf(args) => run_cdf(args),
        Command::Quantiles(args) => run_quantiles(args),
        Command::Bootstrap(args) => run_bootstrap(args),
        Command::Importance(args) => run_importance(args),
        Command::Eval(args) => run_eval(args),
        Command::Equiv(args) => run_equiv(args),
    }
}
