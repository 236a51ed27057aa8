//! Crate-wide error type.

use thiserror::Error;

/// Errors returned by this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A CSV row could not be parsed into an event or record.
    #[error("row {row}: invalid {field}: {message}")]
    ParseRow {
        /// 1-based data row number (header excluded).
        row: usize,
        /// Name of the offending field.
        field: &'static str,
        /// What went wrong.
        message: String,
    },

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// CSV-level failure (malformed quoting, wrong field count).
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// A weekly series violated a structural invariant.
    #[error("invalid weekly series: {0}")]
    InvalidSeries(String),

    /// More homes sold than were on the market in some week.
    #[error("year {year} week {week}: sold ({sold}) exceeds on_market ({on_market})")]
    SoldExceedsOnMarket {
        /// Calendar year of the offending week.
        year: i32,
        /// Week number 1..=52.
        week: u32,
        /// Sold count that week.
        sold: u64,
        /// On-market count that week.
        on_market: u64,
    },

    /// Division by an on-market count of zero.
    #[error("year {year} week {week}: on_market is zero, indices undefined")]
    ZeroOnMarket {
        /// Calendar year of the offending week.
        year: i32,
        /// Week number 1..=52.
        week: u32,
    },

    /// An argument was outside its domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A series was too short for the requested operation.
    #[error("series too short: need at least {needed}, got {got}")]
    SeriesTooShort {
        /// Minimum usable length.
        needed: usize,
        /// Actual length.
        got: usize,
    },

    /// A series had zero variance where correlation is required.
    #[error("zero variance in series '{0}'")]
    ZeroVariance(String),

    /// A design-matrix column was constant (zero scale) where scaling is required.
    #[error("constant column '{0}' cannot be standardized")]
    ConstantColumn(String),

    /// A fit or prediction referenced a column the matrix does not have.
    #[error("missing column '{0}'")]
    MissingColumn(String),

    /// The design matrix is rank deficient.
    #[error("rank-deficient design matrix; dependent columns: {}", columns.join(", "))]
    RankDeficient {
        /// Columns that are linear combinations of earlier ones.
        columns: Vec<String>,
    },

    /// An iterative procedure failed to converge.
    #[error("{what} did not converge after {iterations} iterations{}", trace.as_deref().map(|t| format!(": {t}")).unwrap_or_default())]
    NonConvergence {
        /// Name of the procedure.
        what: &'static str,
        /// Iterations spent.
        iterations: usize,
        /// Optional diagnostic trace.
        trace: Option<String>,
    },

    /// A numerical procedure diverged (values became non-finite or
    /// degenerate).
    #[error("computation diverged: {what}")]
    Divergence {
        /// What diverged and, where helpful, how to avoid it.
        what: String,
    },

    /// A model fit failed for a data-dependent reason.
    #[error("fit failed: {0}")]
    FitFailed(String),

    /// Every candidate in a selection grid failed to fit.
    #[error("all {0} candidate fits failed")]
    AllFitsFailed(usize),

    /// Forecasting a regression model without the future regressor rows.
    #[error("model has {expected} regressors but no future regressor rows were supplied")]
    MissingFutureRegressors {
        /// Number of regressors in the fit.
        expected: usize,
    },

    /// MAPE is undefined when an actual value is zero.
    #[error("actual value at index {index} is zero; percentage error undefined")]
    ZeroActual {
        /// 0-based index of the zero actual.
        index: usize,
    },

    /// Malformed model artifact or config JSON.
    #[error("invalid artifact: {0}")]
    Artifact(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Artifact(e.to_string())
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
