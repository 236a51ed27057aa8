//! Model-fitting commands. Each one reads a prepared input (design CSV or
//! weekly CSV), estimates a model, and writes a JSON artifact that the
//! forecast/evaluate steps can rebuild without re-optimizing.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use demandcast_core::arima::{auto_select, fit_regarima, ArimaFit, FitOptions};
use demandcast_core::ensemble::{fit_ensemble, tune_weights, MlpParams};
use demandcast_core::indices::compute_indices;
use demandcast_core::lasso::{lar_path, write_lar_path_csv, PathMode};
use demandcast_core::linear::{self, forward_stepwise, ols_fit, StepwiseCriterion};
use demandcast_core::tsa::read_design_csv;
use demandcast_core::{DesignMatrix, WeeklySeries};

use crate::support::{
    arima_training_data, atomic_write, echo_config, load_config, parse_arima_spec, parse_lag_list,
    read_file, require, spec_to_arg, usage, write_json, CResult, RegressorSpec,
};

use super::Ctx;

fn read_design(path: &Path) -> CResult<DesignMatrix> {
    let bytes = read_file(path)?;
    Ok(read_design_csv(&bytes[..])?)
}

#[derive(Args)]
pub struct FitLinearCmd {
    /// Design CSV produced by the design subcommand.
    #[arg(long, value_name = "FILE")]
    design: Option<PathBuf>,
    /// Fitting mode: ols, stepwise-aic, or stepwise-p.
    #[arg(long)]
    mode: Option<String>,
    /// Entry threshold for stepwise-p.
    #[arg(long)]
    alpha: Option<f64>,
    /// Destination model JSON.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(default)]
pub(crate) struct FitLinearConfig {
    design: Option<PathBuf>,
    mode: String,
    alpha: f64,
    out: Option<PathBuf>,
}

impl Default for FitLinearConfig {
    fn default() -> Self {
        FitLinearConfig {
            design: None,
            mode: "ols".into(),
            alpha: 0.05,
            out: None,
        }
    }
}

pub fn run_fit_linear(ctx: &Ctx, cmd: FitLinearCmd) -> CResult<()> {
    let mut cfg: FitLinearConfig = load_config(ctx.config.as_deref())?;
    if let Some(v) = cmd.design {
        cfg.design = Some(v);
    }
    if let Some(v) = cmd.mode {
        cfg.mode = v;
    }
    if let Some(v) = cmd.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = cmd.out {
        cfg.out = Some(v);
    }
    let design_path = require(cfg.design.clone(), "--design")?;
    let out = require(cfg.out.clone(), "--out")?;
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(usage(format!(
            "--alpha must lie in (0,1), got {}",
            cfg.alpha
        )));
    }

    let dm = read_design(&design_path)?;
    let fit = match cfg.mode.as_str() {
        "ols" => ols_fit(&dm)?,
        "stepwise-aic" => forward_stepwise(&dm, StepwiseCriterion::Aic)?,
        "stepwise-p" => forward_stepwise(&dm, StepwiseCriterion::PValue { alpha: cfg.alpha })?,
        other => {
            return Err(usage(format!(
                "unknown mode '{other}' (expected ols, stepwise-aic, or stepwise-p)"
            )))
        }
    };
    write_json(&out, &fit.to_artifact(&cfg.mode))?;
    echo_config(&out, "fit-linear", ctx.threads, &cfg)
}

#[derive(Args)]
pub struct FitLassoCmd {
    /// Design CSV produced by the design subcommand.
    #[arg(long, value_name = "FILE")]
    design: Option<PathBuf>,
    /// Path flavor: lasso or lar.
    #[arg(long)]
    mode: Option<String>,
    /// Penalty at which to read one solution off the path; omit to write
    /// the whole path as CSV.
    #[arg(long)]
    lambda: Option<f64>,
    /// Destination file (JSON for a single solution, CSV for the path).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(default)]
pub(crate) struct FitLassoConfig {
    design: Option<PathBuf>,
    mode: String,
    lambda: Option<f64>,
    out: Option<PathBuf>,
}

impl Default for FitLassoConfig {
    fn default() -> Self {
        FitLassoConfig {
            design: None,
            mode: "lasso".into(),
            lambda: None,
            out: None,
        }
    }
}

pub fn run_fit_lasso(ctx: &Ctx, cmd: FitLassoCmd) -> CResult<()> {
    let mut cfg: FitLassoConfig = load_config(ctx.config.as_deref())?;
    if let Some(v) = cmd.design {
        cfg.design = Some(v);
    }
    if let Some(v) = cmd.mode {
        cfg.mode = v;
    }
    if let Some(v) = cmd.lambda {
        cfg.lambda = Some(v);
    }
    if let Some(v) = cmd.out {
        cfg.out = Some(v);
    }
    let design_path = require(cfg.design.clone(), "--design")?;
    let out = require(cfg.out.clone(), "--out")?;
    let mode = match cfg.mode.as_str() {
        "lasso" => PathMode::Lasso,
        "lar" => PathMode::Lar,
        other => {
            return Err(usage(format!(
                "unknown mode '{other}' (expected lasso or lar)"
            )))
        }
    };
    if let Some(lambda) = cfg.lambda {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(usage(format!("--lambda must be >= 0, got {lambda}")));
        }
    }

    let dm = read_design(&design_path)?;
    let path = lar_path(&dm, mode)?;
    match cfg.lambda {
        Some(lambda) => {
            let sol = path.coefficients_at(lambda);
            let mut coefficients = Map::new();
            for (name, value) in &sol.coefficients {
                coefficients.insert(name.clone(), json!(value));
            }
            let artifact = json!({
                "model": "lasso",
                "mode": cfg.mode,
                "lambda": lambda,
                "intercept": sol.intercept,
                "coefficients": coefficients,
            });
            write_json(&out, &artifact)?;
        }
        None => {
            let mut buf = Vec::new();
            write_lar_path_csv(&path, &mut buf)?;
            atomic_write(&out, &buf)?;
        }
    }
    echo_config(&out, "fit-lasso", ctx.threads, &cfg)
}

#[derive(Args)]
pub struct FitArimaCmd {
    /// Weekly market CSV.
    #[arg(long, value_name = "FILE")]
    weekly: Option<PathBuf>,
    /// Model orders as p,d,q:P,D,Q:s (bare p,d,q for no seasonal part).
    #[arg(long)]
    spec: Option<String>,
    /// Semicolon-separated candidate specs; the lowest AICc wins.
    #[arg(long, value_name = "SPECS")]
    auto: Option<String>,
    /// Series to model: hdi_sqrt, hdi, or si.
    #[arg(long)]
    target: Option<String>,
    /// Lagged showing-index regressors, e.g. "10" or "5-15".
    #[arg(long, value_name = "LIST")]
    si_lags: Option<String>,
    /// Lagged demand-index regressors.
    #[arg(long, value_name = "LIST")]
    hdi_lags: Option<String>,
    /// Add the weekly median days-on-market regressor.
    #[arg(long, value_name = "BOOL")]
    include_median_dom: Option<bool>,
    /// Add the week-of-year regressor.
    #[arg(long, value_name = "BOOL")]
    include_week_number: Option<bool>,
    /// Force the mean term on or off (default: on for non-differenced models).
    #[arg(long, value_name = "BOOL")]
    with_mean: Option<bool>,
    /// Destination model JSON.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(default)]
pub(crate) struct FitArimaConfig {
    weekly: Option<PathBuf>,
    spec: Option<String>,
    auto: Vec<String>,
    target: String,
    #[serde(flatten)]
    regressors: RegressorSpec,
    with_mean: Option<bool>,
    out: Option<PathBuf>,
}

impl Default for FitArimaConfig {
    fn default() -> Self {
        FitArimaConfig {
            weekly: None,
            spec: None,
            auto: Vec::new(),
            target: "hdi_sqrt".into(),
            regressors: RegressorSpec::default(),
            with_mean: None,
            out: None,
        }
    }
}

pub fn run_fit_arima(ctx: &Ctx, cmd: FitArimaCmd) -> CResult<()> {
    let mut cfg: FitArimaConfig = load_config(ctx.config.as_deref())?;
    if let Some(v) = cmd.weekly {
        cfg.weekly = Some(v);
    }
    if let Some(v) = cmd.spec {
        cfg.spec = Some(v);
    }
    if let Some(v) = cmd.auto {
        cfg.auto = v
            .split(';')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
    }
    if let Some(v) = cmd.target {
        cfg.target = v;
    }
    if let Some(v) = cmd.si_lags {
        cfg.regressors.si_lags = parse_lag_list(&v)?;
    }
    if let Some(v) = cmd.hdi_lags {
        cfg.regressors.hdi_lags = parse_lag_list(&v)?;
    }
    if let Some(v) = cmd.include_median_dom {
        cfg.regressors.include_median_dom = v;
    }
    if let Some(v) = cmd.include_week_number {
        cfg.regressors.include_week_number = v;
    }
    if let Some(v) = cmd.with_mean {
        cfg.with_mean = Some(v);
    }
    if let Some(v) = cmd.out {
        cfg.out = Some(v);
    }
    let weekly_path = require(cfg.weekly.clone(), "--weekly")?;
    let out = require(cfg.out.clone(), "--out")?;

    // Validate the order strings before touching any data files.
    let candidates: Vec<_> = cfg
        .auto
        .iter()
        .map(|s| parse_arima_spec(s))
        .collect::<CResult<_>>()?;
    let single = match &cfg.spec {
        Some(text) => Some(parse_arima_spec(text)?),
        None => None,
    };
    if candidates.is_empty() && single.is_none() {
        return Err(usage("missing --spec (or --auto candidates)"));
    }

    let bytes = read_file(&weekly_path)?;
    let weekly = WeeklySeries::read_csv(&bytes[..])?;
    let idx = compute_indices(&weekly)?;
    let (y, xreg) = arima_training_data(&weekly, &idx, &cfg.target, &cfg.regressors)?;
    let options = FitOptions {
        with_mean: cfg.with_mean,
        ..FitOptions::default()
    };

    let (fit, selection) = if candidates.is_empty() {
        let spec = single.expect("checked above");
        (fit_regarima(&y, &xreg, &spec, &options)?, None)
    } else {
        let report = auto_select(&y, &xreg, &candidates, &options)?;
        let rows: Vec<Value> = report
            .table
            .iter()
            .map(|(spec, outcome)| match outcome {
                Ok(aicc) => json!({"spec": spec_to_arg(spec), "aicc": aicc}),
                Err(message) => json!({"spec": spec_to_arg(spec), "error": message}),
            })
            .collect();
        let summary = json!({
            "chosen": report.chosen_index,
            "table": rows,
            "warnings": report.warnings,
        });
        (report.fit, Some(summary))
    };

    let mut artifact = Map::new();
    artifact.insert("kind".into(), json!("arima"));
    artifact.insert("target".into(), json!(cfg.target));
    artifact.insert("spec".into(), json!(spec_to_arg(&fit.spec)));
    artifact.insert(
        "regressors".into(),
        serde_json::to_value(&cfg.regressors).expect("plain struct serializes"),
    );
    artifact.insert("with_mean".into(), json!(cfg.with_mean));
    artifact.insert("fit".into(), fit.to_artifact());
    if let Some(summary) = selection {
        artifact.insert("selection".into(), summary);
    }
    write_json(&out, &Value::Object(artifact))?;
    echo_config(&out, "fit-arima", ctx.threads, &cfg)
}

/// Rebuilds the shared pieces of an ARIMA artifact.
pub(crate) struct ArimaArtifact {
    pub target: String,
    pub regressors: RegressorSpec,
    pub fit: ArimaFit,
}

pub(crate) fn load_arima_artifact(path: &PathBuf) -> CResult<ArimaArtifact> {
    let value = crate::support::read_json(path)?;
    let obj = value.as_object().ok_or_else(|| {
        crate::support::data(format!("{}: model artifact is not a JSON object", path.display()))
    })?;
    if obj.get("kind").and_then(Value::as_str) != Some("arima") {
        return Err(crate::support::data(format!(
            "{}: expected an arima model artifact (produced by fit-arima)",
            path.display()
        )));
    }
    let target = obj
        .get("target")
        .and_then(Value::as_str)
        .unwrap_or("hdi_sqrt")
        .to_string();
    let regressors = match obj.get("regressors") {
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| {
            crate::support::data(format!("{}: bad regressors block: {e}", path.display()))
        })?,
        None => RegressorSpec::default(),
    };
    let fit_value = obj.get("fit").ok_or_else(|| {
        crate::support::data(format!("{}: missing 'fit' block", path.display()))
    })?;
    let fit = ArimaFit::from_artifact(fit_value)?;
    Ok(ArimaArtifact {
        target,
        regressors,
        fit,
    })
}

#[derive(Args)]
pub struct FitEnsembleCmd {
    /// Design CSV produced by the design subcommand.
    #[arg(long, value_name = "FILE")]
    design: Option<PathBuf>,
    /// Maximum regression-tree depth.
    #[arg(long)]
    max_depth: Option<usize>,
    /// Minimum rows per tree leaf.
    #[arg(long)]
    min_leaf: Option<usize>,
    /// Hidden units in the network.
    #[arg(long)]
    hidden: Option<usize>,
    /// Gradient-descent epochs.
    #[arg(long)]
    epochs: Option<usize>,
    /// Gradient-descent step size.
    #[arg(long)]
    learn_rate: Option<f64>,
    /// Network initialization seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Replace the fixed blend weights with a grid search on the
    /// training rows.
    #[arg(long, value_name = "BOOL")]
    tune: Option<bool>,
    /// Grid step for --tune.
    #[arg(long)]
    tune_step: Option<f64>,
    /// Destination model JSON.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(default)]
pub(crate) struct FitEnsembleConfig {
    design: Option<PathBuf>,
    max_depth: usize,
    min_leaf: usize,
    hidden: usize,
    epochs: usize,
    learn_rate: f64,
    seed: u64,
    tune: bool,
    tune_step: f64,
    out: Option<PathBuf>,
}

impl Default for FitEnsembleConfig {
    fn default() -> Self {
        let mlp = MlpParams::default();
        FitEnsembleConfig {
            design: None,
            max_depth: 6,
            min_leaf: 5,
            hidden: mlp.hidden,
            epochs: mlp.epochs,
            learn_rate: mlp.learn_rate,
            seed: mlp.seed,
            tune: false,
            tune_step: 0.05,
            out: None,
        }
    }
}

pub fn run_fit_ensemble(ctx: &Ctx, cmd: FitEnsembleCmd) -> CResult<()> {
    let mut cfg: FitEnsembleConfig = load_config(ctx.config.as_deref())?;
    if let Some(v) = cmd.design {
        cfg.design = Some(v);
    }
    if let Some(v) = cmd.max_depth {
        cfg.max_depth = v;
    }
    if let Some(v) = cmd.min_leaf {
        cfg.min_leaf = v;
    }
    if let Some(v) = cmd.hidden {
        cfg.hidden = v;
    }
    if let Some(v) = cmd.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = cmd.learn_rate {
        cfg.learn_rate = v;
    }
    if let Some(v) = cmd.seed {
        cfg.seed = v;
    }
    if let Some(v) = cmd.tune {
        cfg.tune = v;
    }
    if let Some(v) = cmd.tune_step {
        cfg.tune_step = v;
    }
    if let Some(v) = cmd.out {
        cfg.out = Some(v);
    }
    let design_path = require(cfg.design.clone(), "--design")?;
    let out = require(cfg.out.clone(), "--out")?;

    let dm = read_design(&design_path)?;
    let params = MlpParams {
        hidden: cfg.hidden,
        epochs: cfg.epochs,
        learn_rate: cfg.learn_rate,
        seed: cfg.seed,
    };
    let mut model = fit_ensemble(&dm, cfg.max_depth, cfg.min_leaf, params)?;
    if cfg.tune {
        let lin = linear::predict(&model.linear, &dm)?;
        let cart = model.cart.predict(&dm)?;
        let mlp = model.mlp.predict(&dm)?;
        model.weights = tune_weights(&lin, &cart, &mlp, dm.target(), cfg.tune_step)?;
    }
    write_json(&out, &model.to_artifact())?;
    echo_config(&out, "fit-ensemble", ctx.threads, &cfg)
}
