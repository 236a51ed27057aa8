//! Forecast and holdout-evaluation commands. Both rebuild the training
//! series and regressor layout recorded in a fit-arima artifact, then
//! project forward at the stored coefficients — no re-optimization.

use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use demandcast_core::arima::{
    evaluate_regarima, forecast_regarima, lagged_xreg_future, write_forecast_csv, FitOptions,
};
use demandcast_core::evaluation::{baseline_forecasts, mape};
use demandcast_core::indices::compute_indices;
use demandcast_core::{IndexSeries, WeeklySeries};

use super::fit::load_arima_artifact;
use super::Ctx;
use crate::support::{
    arima_training_data, atomic_write, data, echo_config, index_target, load_config, read_file,
    require, spec_to_arg, usage, write_json, CResult, RegressorSpec,
};

fn read_weekly(path: &PathBuf) -> CResult<WeeklySeries> {
    let bytes = read_file(path)?;
    Ok(WeeklySeries::read_csv(&bytes[..])?)
}

/// Future regressor rows and per-step persistence-fill counts for a lag
/// layout, empty when the model has no regressors.
fn future_regressors(
    idx: &IndexSeries,
    weekly: &WeeklySeries,
    target: &str,
    reg: &RegressorSpec,
    h: usize,
) -> CResult<(Vec<(String, Vec<f64>)>, Vec<usize>)> {
    if reg.is_empty() {
        return Ok((Vec::new(), vec![0; h]));
    }
    let fut = lagged_xreg_future(idx, weekly, &reg.lag_spec(target), h)?;
    Ok((fut.columns, fut.fill_counts))
}

#[derive(Args)]
pub struct ForecastCmd {
    /// Model JSON produced by fit-arima.
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    /// Weekly market CSV the model was fit on.
    #[arg(long, value_name = "FILE")]
    weekly: Option<PathBuf>,
    /// Steps ahead to forecast.
    #[arg(long, value_name = "N")]
    horizon: Option<usize>,
    /// Two-sided interval coverage in (0,1).
    #[arg(long)]
    level: Option<f64>,
    /// Output scale: target (as fit) or hdi (squares an hdi_sqrt fit).
    #[arg(long)]
    scale: Option<String>,
    /// Destination forecast CSV.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(default)]
pub(crate) struct ForecastConfig {
    model: Option<PathBuf>,
    weekly: Option<PathBuf>,
    horizon: Option<usize>,
    level: f64,
    scale: String,
    out: Option<PathBuf>,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        ForecastConfig {
            model: None,
            weekly: None,
            horizon: None,
            level: 0.95,
            scale: "target".into(),
            out: None,
        }
    }
}

pub fn run_forecast(ctx: &Ctx, cmd: ForecastCmd) -> CResult<()> {
    let mut cfg: ForecastConfig = load_config(ctx.config.as_deref())?;
    if let Some(v) = cmd.model {
        cfg.model = Some(v);
    }
    if let Some(v) = cmd.weekly {
        cfg.weekly = Some(v);
    }
    if let Some(v) = cmd.horizon {
        cfg.horizon = Some(v);
    }
    if let Some(v) = cmd.level {
        cfg.level = v;
    }
    if let Some(v) = cmd.scale {
        cfg.scale = v;
    }
    if let Some(v) = cmd.out {
        cfg.out = Some(v);
    }
    let model_path = require(cfg.model.clone(), "--model")?;
    let weekly_path = require(cfg.weekly.clone(), "--weekly")?;
    let out = require(cfg.out.clone(), "--out")?;
    let h = require(cfg.horizon, "--horizon")?;
    if h == 0 {
        return Err(usage("--horizon must be at least 1"));
    }
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(usage(format!(
            "--level must lie in (0,1), got {}",
            cfg.level
        )));
    }
    if cfg.scale != "target" && cfg.scale != "hdi" {
        return Err(usage(format!(
            "unknown scale '{}' (expected target or hdi)",
            cfg.scale
        )));
    }

    let art = load_arima_artifact(&model_path)?;
    if cfg.scale == "hdi" && art.target != "hdi_sqrt" {
        return Err(usage(
            "--scale hdi requires a model fit on the hdi_sqrt target",
        ));
    }
    let weekly = read_weekly(&weekly_path)?;
    let idx = compute_indices(&weekly)?;
    let (y, xreg) = arima_training_data(&weekly, &idx, &art.target, &art.regressors)?;
    let (xreg_future, fills) = future_regressors(&idx, &weekly, &art.target, &art.regressors, h)?;

    let mut fc = forecast_regarima(&art.fit, &y, &xreg, &xreg_future, h, cfg.level)?;
    fc.xreg_fill = fills;
    if cfg.scale == "hdi" {
        fc = fc.to_hdi_scale();
    }

    let mut buf = Vec::new();
    write_forecast_csv(&fc, &mut buf)?;
    atomic_write(&out, &buf)?;
    echo_config(&out, "forecast", ctx.threads, &cfg)
}

#[derive(Args)]
pub struct EvaluateCmd {
    /// Model JSON produced by fit-arima.
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    /// Weekly market CSV; the last --horizon weeks form the holdout.
    #[arg(long, value_name = "FILE")]
    weekly: Option<PathBuf>,
    /// Holdout length in weeks.
    #[arg(long, value_name = "N")]
    horizon: Option<usize>,
    /// Two-sided interval coverage in (0,1).
    #[arg(long)]
    level: Option<f64>,
    /// Destination report JSON.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(default)]
pub(crate) struct EvaluateConfig {
    model: Option<PathBuf>,
    weekly: Option<PathBuf>,
    horizon: Option<usize>,
    level: f64,
    out: Option<PathBuf>,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        EvaluateConfig {
            model: None,
            weekly: None,
            horizon: None,
            level: 0.95,
            out: None,
        }
    }
}

pub fn run_evaluate(ctx: &Ctx, cmd: EvaluateCmd) -> CResult<()> {
    let mut cfg: EvaluateConfig = load_config(ctx.config.as_deref())?;
    if let Some(v) = cmd.model {
        cfg.model = Some(v);
    }
    if let Some(v) = cmd.weekly {
        cfg.weekly = Some(v);
    }
    if let Some(v) = cmd.horizon {
        cfg.horizon = Some(v);
    }
    if let Some(v) = cmd.level {
        cfg.level = v;
    }
    if let Some(v) = cmd.out {
        cfg.out = Some(v);
    }
    let model_path = require(cfg.model.clone(), "--model")?;
    let weekly_path = require(cfg.weekly.clone(), "--weekly")?;
    let out = require(cfg.out.clone(), "--out")?;
    let h = require(cfg.horizon, "--horizon")?;
    if h == 0 {
        return Err(usage("--horizon must be at least 1"));
    }
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(usage(format!(
            "--level must lie in (0,1), got {}",
            cfg.level
        )));
    }

    let art = load_arima_artifact(&model_path)?;
    let weekly = read_weekly(&weekly_path)?;
    let n = weekly.len();
    if h >= n {
        return Err(data(format!(
            "horizon {h} leaves no training data in a {n}-week series"
        )));
    }

    // Everything the model sees comes from the training prefix; the held-out
    // weeks supply only the actuals.
    let train = WeeklySeries::new(weekly.records()[..n - h].to_vec())?;
    let idx_train = compute_indices(&train)?;
    let (y, xreg) = arima_training_data(&train, &idx_train, &art.target, &art.regressors)?;
    let options = FitOptions {
        with_mean: Some(art.fit.mean.is_some()),
        ..FitOptions::default()
    };
    let scored = evaluate_regarima(
        &y,
        &xreg,
        &art.fit.spec,
        &art.fit.ar,
        &art.fit.ma,
        &art.fit.seasonal_ar,
        &art.fit.seasonal_ma,
        &options,
    )?;
    let (xreg_future, fills) =
        future_regressors(&idx_train, &train, &art.target, &art.regressors, h)?;
    let mut fc = forecast_regarima(&scored, &y, &xreg, &xreg_future, h, cfg.level)?;
    fc.xreg_fill = fills;

    let idx_full = compute_indices(&weekly)?;
    let actual_full = index_target(&idx_full, &art.target)?;
    let actual = &actual_full[n - h..];
    let model_mape = mape(actual, &fc.points)?;
    let base = baseline_forecasts(&y, h)?;
    let constant_mape = mape(actual, &base.constant)?;
    let mean_mape = mape(actual, &base.mean)?;

    let steps: Vec<Value> = (0..h)
        .map(|i| {
            json!({
                "step": i + 1,
                "point": fc.points[i],
                "lower": fc.lower[i],
                "upper": fc.upper[i],
                "actual": actual[i],
            })
        })
        .collect();

    let mut report = Map::new();
    report.insert("kind".into(), json!("evaluation"));
    report.insert("target".into(), json!(art.target));
    report.insert("spec".into(), json!(spec_to_arg(&art.fit.spec)));
    report.insert("horizon".into(), json!(h));
    report.insert("level".into(), json!(cfg.level));
    report.insert("train_weeks".into(), json!(n - h));
    report.insert("mape".into(), json!(model_mape));
    report.insert(
        "baselines".into(),
        json!({"constant": constant_mape, "mean": mean_mape}),
    );
    if art.target == "hdi_sqrt" {
        // The demand index itself is the square of the modeled series.
        let squared = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| x.max(0.0) * x.max(0.0)).collect() };
        let actual_hdi = squared(actual);
        let hdi_scale = json!({
            "mape": mape(&actual_hdi, &squared(&fc.points))?,
            "baselines": {
                "constant": mape(&actual_hdi, &squared(&base.constant))?,
                "mean": mape(&actual_hdi, &squared(&base.mean))?,
            },
        });
        report.insert("hdi_scale".into(), hdi_scale);
    }
    report.insert("xreg_fill".into(), json!(fc.xreg_fill));
    report.insert("steps".into(), json!(steps));

    write_json(&out, &Value::Object(report))?;
    echo_config(&out, "evaluate", ctx.threads, &cfg)
}
