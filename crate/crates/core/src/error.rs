use alloc::string::String;
use thiserror::Error;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Problems with the supplied data (parsing, degenerate columns, dimensions).
    Data,
    /// A model fit could not be carried out or did not produce a usable result.
    Fit,
    /// The requested configuration is invalid before any computation starts.
    Config,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("cell at row {row}, column '{column}' does not parse as a finite number: '{value}'")]
    CsvCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("column '{0}' not found in header")]
    MissingColumn(String),
    #[error("file contains a header but no data rows")]
    NoDataRows,
    #[error("row {row} has {got} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("non-finite value in {place}")]
    NonFinite { place: &'static str },
    #[error("dataset needs at least one observation")]
    EmptyDataset,
    #[error("column '{0}' is constant (sample sd = 0); cannot standardize")]
    ConstantColumn(String),
    #[error("train fraction {frac} leaves an empty part for n = {n}")]
    DegenerateSplit { frac: f64, n: usize },
    #[error("sigma must be > 0, got {0}")]
    NonPositiveSigma(f64),

    #[error("threshold grid needs k >= 2, got {0}")]
    GridTooSmall(usize),
    #[error("ordinal grid needs at least 2 categories, got {0}")]
    TooFewCategories(usize),
    #[error("all response values are identical; no grid can be built")]
    DegenerateResponse,
    #[error("grid has no interior thresholds to fit")]
    NoInteriorThresholds,

    #[error("binary response contains a single class")]
    SingleClass,
    #[error("single-class labels at threshold {theta}; coarsen the grid")]
    SingleClassAtThreshold { theta: f64 },
    #[error("need n > p + 1 observations, got n = {n} with p = {p}")]
    TooFewObservations { n: usize, p: usize },
    #[error("the lasso fitter supports the logit link only")]
    LassoNeedsLogit,
    #[error("covariate vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("weights must be strictly positive")]
    NonPositiveWeight,
    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("standard errors are unavailable for this fitter; use bootstrap bands")]
    NoStandardErrors,
    #[error("the forest fitter has no coefficient functions; bands need a linear predictor")]
    NoCoefficientFunctions,
    #[error("{failed} of {total} bootstrap replicates failed (more than 10%)")]
    BootstrapFailures { failed: usize, total: usize },
    #[error("bootstrap needs at least 2 replicates, got {0}")]
    TooFewReplicates(usize),
    #[error("method '{method}' failed on {failed} of {total} splits (more than 10%)")]
    MethodFailures {
        method: String,
        failed: usize,
        total: usize,
    },

    #[error("y = {y} lies outside the spline span [{lo}, {hi}]")]
    OutsideSpan { y: f64, lo: f64, hi: f64 },
    #[error("cubic spline basis needs at least 4 basis functions, got {0}")]
    BasisTooSmall(usize),
    #[error("coefficient index {index} out of range for p = {p}")]
    CoefIndexOutOfRange { index: usize, p: usize },
    #[error("no penalty candidate produced a successful fit")]
    AllCandidatesFailed,
    #[error("cross validation needs at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("intercept slope must be negative, got {0}")]
    NonNegativeSlope(f64),

    #[error("forest parameters invalid: {0}")]
    BadForestParams(&'static str),

    #[error("confidence level must lie in (0, 1), got {0}")]
    BadLevel(f64),
    #[error("evaluation needs at least one split")]
    NoSplits,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            CsvCell { .. } | MissingColumn(_) | NoDataRows | RaggedRow { .. }
            | NonFinite { .. } | EmptyDataset | ConstantColumn(_) | DegenerateSplit { .. }
            | DegenerateResponse | EmptyInput => ErrorCategory::Data,
            SingleClass
            | SingleClassAtThreshold { .. }
            | TooFewObservations { .. }
            | RankDeficient
            | BootstrapFailures { .. }
            | MethodFailures { .. }
            | AllCandidatesFailed
            | OutsideSpan { .. } => ErrorCategory::Fit,
            _ => ErrorCategory::Config,
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
