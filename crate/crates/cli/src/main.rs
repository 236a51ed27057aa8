//! `demandcast`: batch pipelines over housing-market files — corpus
//! synthesis, weekly aggregation, index construction, model fitting,
//! forecasting, and a comparison report, one step per subcommand.
//!
//! Every subcommand reads files, writes files atomically, and echoes its
//! effective configuration next to the outputs, so runs are scriptable,
//! cacheable, and reproducible byte for byte. Exit codes: 0 success,
//! 1 usage error, 2 data/model/file error.

mod commands;
mod support;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use support::CliError;

#[derive(Parser)]
#[command(
    name = "demandcast",
    version,
    about = "Housing-demand forecasting pipelines over weekly market files"
)]
struct Cli {
    /// JSON file of subcommand parameters; explicit flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker-thread cap (every pipeline step currently runs single-threaded).
    #[arg(long, global = true, value_name = "N", default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic property-event corpus with known structure
    Synth(commands::SynthCmd),
    /// Aggregate a property-event CSV into a weekly market series
    Aggregate(commands::AggregateCmd),
    /// Compute the demand and showing indices from a weekly series
    Indices(commands::IndicesCmd),
    /// Split a weekly column into trend, seasonal, and remainder parts
    Decompose(commands::DecomposeCmd),
    /// Cross-correlate two weekly columns over a range of lags
    Xcorr(commands::XcorrCmd),
    /// Build a lagged-predictor design matrix from a weekly series
    Design(commands::DesignCmd),
    /// Fit an ordinary or stepwise least-squares model to a design CSV
    FitLinear(commands::FitLinearCmd),
    /// Trace a least-angle/lasso path or solve one penalized fit
    FitLasso(commands::FitLassoCmd),
    /// Fit a seasonal ARIMA model, optionally with lagged index regressors
    FitArima(commands::FitArimaCmd),
    /// Fit the blended linear/tree/network ensemble to a design CSV
    FitEnsemble(commands::FitEnsembleCmd),
    /// Forecast ahead from a fitted ARIMA artifact
    Forecast(commands::ForecastCmd),
    /// Score a fitted ARIMA artifact on a chronological holdout
    Evaluate(commands::EvaluateCmd),
    /// Produce the full model-comparison bundle for a weekly series
    Report(commands::ReportCmd),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes; everything else a
            // clap rejects (unknown flag/subcommand, bad value) is usage.
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        match e {
            CliError::Usage(msg) => {
                eprintln!("demandcast: {msg}");
                std::process::exit(1);
            }
            CliError::Data(msg) => {
                eprintln!("demandcast: {msg}");
                std::process::exit(2);
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.threads == 0 {
        return Err(support::usage("--threads must be at least 1"));
    }
    let ctx = commands::Ctx {
        config: cli.config,
        threads: cli.threads,
    };
    match cli.command {
        Command::Synth(cmd) => commands::run_synth(&ctx, cmd),
        Command::Aggregate(cmd) => commands::run_aggregate(&ctx, cmd),
        Command::Indices(cmd) => commands::run_indices(&ctx, cmd),
        Command::Decompose(cmd) => commands::run_decompose(&ctx, cmd),
        Command::Xcorr(cmd) => commands::run_xcorr(&ctx, cmd),
        Command::Design(cmd) => commands::run_design(&ctx, cmd),
        Command::FitLinear(cmd) => commands::run_fit_linear(&ctx, cmd),
        Command::FitLasso(cmd) => commands::run_fit_lasso(&ctx, cmd),
        Command::FitArima(cmd) => commands::run_fit_arima(&ctx, cmd),
        Command::FitEnsemble(cmd) => commands::run_fit_ensemble(&ctx, cmd),
        Command::Forecast(cmd) => commands::run_forecast(&ctx, cmd),
        Command::Evaluate(cmd) => commands::run_evaluate(&ctx, cmd),
        Command::Report(cmd) => commands::run_report(&ctx, cmd),
    }
}
