//! One module per pipeline-stage group. Each command merges its optional
//! config file with the flags (flags win), validates the result, runs the
//! core routine, and writes its outputs plus the effective-config echo.

mod data;
mod fit;
mod predict;
mod report;

use std::path::PathBuf;

pub use data::{
    run_aggregate, run_decompose, run_design, run_indices, run_synth, run_xcorr, AggregateCmd,
    DecomposeCmd, DesignCmd, IndicesCmd, SynthCmd, XcorrCmd,
};
pub use fit::{
    run_fit_arima, run_fit_ensemble, run_fit_lasso, run_fit_linear, FitArimaCmd, FitEnsembleCmd,
    FitLassoCmd, FitLinearCmd,
};
pub use predict::{run_evaluate, run_forecast, EvaluateCmd, ForecastCmd};
pub use report::{run_report, ReportCmd};

/// Cross-command context from the global flags.
pub struct Ctx {
    pub config: Option<PathBuf>,
    pub threads: usize,
}
