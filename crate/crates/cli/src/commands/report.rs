//! The comparison bundle: demand indices, a seasonal decomposition, the
//! lead/lag correlation scan, and a chronological-holdout scoreboard
//! pitting the naive baselines against the univariate seasonal model, the
//! lagged-regressor model, the harmonic-regression model, and the
//! ensemble. One failed model becomes a status line, not a failed run.

use std::path::PathBuf;

use clap::Args;
use ndarray::s;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use demandcast_core::arima::{
    fit_regarima, forecast_regarima, lagged_xreg_future, ArimaSpec, FitOptions,
};
use demandcast_core::ensemble::{fit_ensemble, predict_ensemble, MlpParams};
use demandcast_core::evaluation::{baseline_forecasts, mape};
use demandcast_core::indices::{compute_indices, write_index_csv};
use demandcast_core::tsa::{
    build_design_matrix, cross_correlation, fourier_terms, seasonal_decompose,
    write_decomposition_csv, write_xcorr_csv, DEFAULT_FOURIER_PERIOD,
};
use demandcast_core::{DesignMatrix, LagSpec, WeeklySeries};

use super::Ctx;
use crate::support::{
    arima_training_data, atomic_write, data, echo_config, load_config, read_file, require, usage,
    write_json, CResult, RegressorSpec,
};

#[derive(Args)]
pub struct ReportCmd {
    /// Weekly market CSV.
    #[arg(long, value_name = "FILE")]
    weekly: Option<PathBuf>,
    /// Holdout length in weeks.
    #[arg(long, value_name = "N")]
    horizon: Option<usize>,
    /// Two-sided interval coverage in (0,1).
    #[arg(long)]
    level: Option<f64>,
    /// Showing-index lag for the regression model.
    #[arg(long)]
    si_lag: Option<usize>,
    /// Network initialization seed for the ensemble.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the bundle.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(default)]
pub(crate) struct ReportConfig {
    weekly: Option<PathBuf>,
    horizon: usize,
    level: f64,
    si_lag: usize,
    seed: u64,
    out: Option<PathBuf>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            weekly: None,
            horizon: 20,
            level: 0.95,
            si_lag: 10,
            seed: 0,
            out: None,
        }
    }
}

/// A scored holdout path, or the reason the model could not produce one.
struct ModelOutcome {
    name: &'static str,
    result: Result<Scored, String>,
}

struct Scored {
    points: Vec<f64>,
    mape_sqrt: f64,
    mape_hdi: f64,
}

fn score(actual_sqrt: &[f64], points: Vec<f64>) -> Result<Scored, String> {
    let mape_sqrt = mape(actual_sqrt, &points).map_err(|e| e.to_string())?;
    let squared = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| x.max(0.0) * x.max(0.0)).collect() };
    let mape_hdi = mape(&squared(actual_sqrt), &squared(&points)).map_err(|e| e.to_string())?;
    Ok(Scored {
        points,
        mape_sqrt,
        mape_hdi,
    })
}

pub fn run_report(ctx: &Ctx, cmd: ReportCmd) -> CResult<()> {
    let mut cfg: ReportConfig = load_config(ctx.config.as_deref())?;
    if let Some(v) = cmd.weekly {
        cfg.weekly = Some(v);
    }
    if let Some(v) = cmd.horizon {
        cfg.horizon = v;
    }
    if let Some(v) = cmd.level {
        cfg.level = v;
    }
    if let Some(v) = cmd.si_lag {
        cfg.si_lag = v;
    }
    if let Some(v) = cmd.seed {
        cfg.seed = v;
    }
    if let Some(v) = cmd.out {
        cfg.out = Some(v);
    }
    let weekly_path = require(cfg.weekly.clone(), "--weekly")?;
    let out = require(cfg.out.clone(), "--out")?;
    let h = cfg.horizon;
    if h == 0 {
        return Err(usage("--horizon must be at least 1"));
    }
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(usage(format!(
            "--level must lie in (0,1), got {}",
            cfg.level
        )));
    }

    let bytes = read_file(&weekly_path)?;
    let weekly = WeeklySeries::read_csv(&bytes[..])?;
    let n = weekly.len();
    if h >= n {
        return Err(data(format!(
            "horizon {h} leaves no training data in a {n}-week series"
        )));
    }
    let idx_full = compute_indices(&weekly)?;

    // Plot-ready series over the full sample.
    let mut buf = Vec::new();
    write_index_csv(&idx_full, &mut buf)?;
    atomic_write(&out.join("indices.csv"), &buf)?;

    let hdi_sqrt_full = idx_full.hdi_sqrt();
    let dec = seasonal_decompose(&hdi_sqrt_full, 52, 2)?;
    let mut buf = Vec::new();
    write_decomposition_csv(&hdi_sqrt_full, &dec, &mut buf)?;
    atomic_write(&out.join("decomposition.csv"), &buf)?;

    let xc = cross_correlation(&idx_full.si(), &idx_full.hdi(), 20)?;
    let mut buf = Vec::new();
    write_xcorr_csv(&xc, &mut buf)?;
    atomic_write(&out.join("xcorr.csv"), &buf)?;

    // Chronological holdout: every model trains on the first n-h weeks and
    // is scored on the square-root demand index of the last h.
    let train = WeeklySeries::new(weekly.records()[..n - h].to_vec())?;
    let idx_train = compute_indices(&train)?;
    let y_train = idx_train.hdi_sqrt();
    let actual_sqrt = hdi_sqrt_full[n - h..].to_vec();
    let level = cfg.level;
    let options = FitOptions::default();

    let mut outcomes: Vec<ModelOutcome> = Vec::new();
    let mut push = |name: &'static str, result: CResult<Vec<f64>>| {
        let result = result
            .map_err(|e| e.to_string())
            .and_then(|points| score(&actual_sqrt, points));
        outcomes.push(ModelOutcome { name, result });
    };

    match baseline_forecasts(&y_train, h) {
        Ok(base) => {
            push("constant", Ok(base.constant));
            push("mean", Ok(base.mean));
        }
        Err(e) => {
            let message = e.to_string();
            push("constant", Err(data(message.clone())));
            push("mean", Err(data(message)));
        }
    }

    push("univariate", {
        let spec = ArimaSpec::new(0, 1, 3, 0, 1, 0, 52);
        (|| {
            let fit = fit_regarima(&y_train, &[], &spec, &options)?;
            Ok(forecast_regarima(&fit, &y_train, &[], &[], h, level)?.points)
        })()
    });

    push("arimax", {
        let reg = RegressorSpec {
            si_lags: vec![cfg.si_lag],
            ..RegressorSpec::default()
        };
        (|| {
            let (y, xreg) = arima_training_data(&train, &idx_train, "hdi_sqrt", &reg)?;
            let spec = ArimaSpec::new(1, 0, 0, 0, 0, 0, 1);
            let fit = fit_regarima(&y, &xreg, &spec, &options)?;
            let fut = lagged_xreg_future(&idx_train, &train, &reg.lag_spec("hdi_sqrt"), h)?;
            Ok(forecast_regarima(&fit, &y, &xreg, &fut.columns, h, level)?.points)
        })()
    });

    push("fourier", {
        (|| {
            let n_train = n - h;
            let (names, cols) = fourier_terms(n_train + h, 3, DEFAULT_FOURIER_PERIOD)?;
            let mut xreg: Vec<(String, Vec<f64>)> = Vec::new();
            let mut xreg_future: Vec<(String, Vec<f64>)> = Vec::new();
            for (j, name) in names.iter().enumerate() {
                let col: Vec<f64> = cols.column(j).to_vec();
                xreg.push((name.clone(), col[..n_train].to_vec()));
                xreg_future.push((name.clone(), col[n_train..].to_vec()));
            }
            let trend: Vec<f64> = (0..n_train + h).map(|t| (t + 1) as f64 / 52.0).collect();
            xreg.push(("trend".into(), trend[..n_train].to_vec()));
            xreg_future.push(("trend".into(), trend[n_train..].to_vec()));
            let spec = ArimaSpec::new(2, 0, 1, 0, 0, 0, 1);
            let fit = fit_regarima(&y_train, &xreg, &spec, &options)?;
            Ok(forecast_regarima(&fit, &y_train, &xreg, &xreg_future, h, level)?.points)
        })()
    });

    push("ensemble", {
        (|| {
            let dm_full = build_design_matrix(&idx_full, &weekly, &LagSpec::full())?;
            let rows = dm_full.nrows();
            if rows <= h {
                return Err(data("series too short for the ensemble holdout"));
            }
            let split = rows - h;
            let names = dm_full.column_names().to_vec();
            let x = dm_full.x();
            let dm_train = DesignMatrix::with_weeks(
                names.clone(),
                x.slice(s![..split, ..]).to_owned(),
                dm_full.target()[..split].to_vec(),
                dm_full.row_weeks()[..split].to_vec(),
            )?;
            let dm_test = DesignMatrix::with_weeks(
                names,
                x.slice(s![split.., ..]).to_owned(),
                dm_full.target()[split..].to_vec(),
                dm_full.row_weeks()[split..].to_vec(),
            )?;
            let params = MlpParams {
                seed: cfg.seed,
                ..MlpParams::default()
            };
            let model = fit_ensemble(&dm_train, 6, 5, params)?;
            Ok(predict_ensemble(&model, &dm_test)?)
        })()
    });

    // Scoreboard CSV.
    let mut comparison = String::from("model,mape_sqrt,mape_hdi,status\n");
    for entry in &outcomes {
        match &entry.result {
            Ok(s) => comparison.push_str(&format!(
                "{},{:.4},{:.4},ok\n",
                entry.name, s.mape_sqrt, s.mape_hdi
            )),
            Err(e) => comparison.push_str(&format!("{},,,{}\n", entry.name, e.replace(',', ";"))),
        }
    }
    atomic_write(&out.join("comparison.csv"), comparison.as_bytes())?;

    // Week-by-week holdout paths for plotting forecasts against actuals.
    let mut paths = String::from("year,week,actual");
    for entry in &outcomes {
        paths.push(',');
        paths.push_str(entry.name);
    }
    paths.push('\n');
    for (i, rec) in weekly.records()[n - h..].iter().enumerate() {
        paths.push_str(&format!("{},{},{}", rec.year, rec.week, actual_sqrt[i]));
        for entry in &outcomes {
            paths.push(',');
            if let Ok(s) = &entry.result {
                paths.push_str(&format!("{}", s.points[i]));
            }
        }
        paths.push('\n');
    }
    atomic_write(&out.join("holdout_paths.csv"), paths.as_bytes())?;

    // Bundle summary.
    let models: Vec<Value> = outcomes
        .iter()
        .map(|entry| match &entry.result {
            Ok(s) => json!({
                "model": entry.name,
                "status": "ok",
                "mape_sqrt": s.mape_sqrt,
                "mape_hdi": s.mape_hdi,
            }),
            Err(e) => json!({"model": entry.name, "status": format!("error: {e}")}),
        })
        .collect();
    let mut report = Map::new();
    report.insert("kind".into(), json!("report"));
    report.insert("weeks".into(), json!(n));
    report.insert("train_weeks".into(), json!(n - h));
    report.insert("horizon".into(), json!(h));
    report.insert("level".into(), json!(cfg.level));
    report.insert("target".into(), json!("hdi_sqrt"));
    report.insert("models".into(), json!(models));
    report.insert(
        "notes".into(),
        json!([
            "univariate is (0,1,3)(0,1,0)[52] on the square-root demand index",
            format!(
                "arimax regresses the index on the showing index lagged {} weeks with AR(1) errors",
                cfg.si_lag
            ),
            "fourier is harmonic regression (3 pairs) with a trend term and ARMA(2,1) errors",
            "ensemble scores the holdout with observed lagged predictors, not forecast ones",
        ]),
    );
    report.insert(
        "files".into(),
        json!({
            "indices": "indices.csv",
            "decomposition": "decomposition.csv",
            "xcorr": "xcorr.csv",
            "comparison": "comparison.csv",
            "holdout_paths": "holdout_paths.csv",
        }),
    );
    write_json(&out.join("report.json"), &Value::Object(report))?;
    echo_config(&out, "report", ctx.threads, &cfg)
}
