//! Multi-step forecasting from a fitted model.
//!
//! Point forecasts run the state recursion forward from the final filtered
//! state on the differenced, regression-adjusted scale, then integrate the
//! differencing back out and re-attach the regression part. Interval
//! half-widths come from the impulse-response weights of the full operator
//! (ARMA and differencing together): the h-step error variance is
//! σ²·Σ_{j<h} ψⱼ². Regression-coefficient uncertainty is not propagated,
//! the usual convention for regression-with-ARIMA-errors intervals.

use std::io::Write;

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::indices::IndexSeries;
use crate::series::WeeklySeries;
use crate::tsa::{difference_with_state, undifference, LagSpec};

use super::model::ArimaFit;
use super::state_space::{psi_weights, StateSpace};
use super::transform::{differencing_polynomial, expand_ar, expand_ma};

/// Forecast paths with symmetric intervals on the modeling scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    pub points: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub half_widths: Vec<f64>,
    /// Two-sided coverage of the intervals, e.g. 0.95.
    pub level: f64,
    /// Per-step count of future regressor cells that had to be filled by
    /// persistence rather than known values.
    pub xreg_fill: Vec<usize>,
}

impl Forecast {
    pub fn horizon(&self) -> usize {
        self.points.len()
    }

    /// Maps a forecast of the square-root index back to the index scale:
    /// each endpoint is clamped at zero and squared. Both operations are
    /// monotone on the clamped range, so interval ordering is preserved;
    /// the mapped interval is no longer symmetric, and `half_widths`
    /// becomes half the mapped interval width.
    pub fn to_hdi_scale(&self) -> Forecast {
        let map = |v: f64| {
            let c = v.max(0.0);
            c * c
        };
        let points: Vec<f64> = self.points.iter().map(|&v| map(v)).collect();
        let lower: Vec<f64> = self.lower.iter().map(|&v| map(v)).collect();
        let upper: Vec<f64> = self.upper.iter().map(|&v| map(v)).collect();
        let half_widths = lower
            .iter()
            .zip(&upper)
            .map(|(l, u)| 0.5 * (u - l))
            .collect();
        Forecast {
            points,
            lower,
            upper,
            half_widths,
            level: self.level,
            xreg_fill: self.xreg_fill.clone(),
        }
    }
}

/// Future regressor columns for a lag structure, with per-step counts of
/// persistence-filled cells.
#[derive(Debug, Clone, PartialEq)]
pub struct FutureRegressors {
    pub columns: Vec<(String, Vec<f64>)>,
    pub fill_counts: Vec<usize>,
}

/// Forecasts `h` steps ahead. `xreg` must carry the training values of
/// exactly the regressors the fit was estimated with, and `xreg_future`
/// their future values for at least `h` steps (ignored when the fit has
/// no regressors).
pub fn forecast_regarima(
    fit: &ArimaFit,
    y: &[f64],
    xreg: &[(String, Vec<f64>)],
    xreg_future: &[(String, Vec<f64>)],
    h: usize,
    level: f64,
) -> Result<Forecast> {
    if h == 0 {
        return Err(Error::InvalidArgument("forecast horizon must be >= 1".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "interval level must lie in (0,1), got {level}"
        )));
    }
    if y.len() != fit.n_obs {
        return Err(Error::InvalidArgument(format!(
            "fit was estimated on {} observations but {} were supplied",
            fit.n_obs,
            y.len()
        )));
    }
    for (name, _) in &fit.beta {
        if !xreg.iter().any(|(c, _)| c == name) {
            return Err(Error::MissingColumn(name.clone()));
        }
    }
    if !fit.beta.is_empty() {
        for (name, _) in &fit.beta {
            match xreg_future.iter().find(|(c, _)| c == name) {
                Some((_, col)) if col.len() >= h => {}
                _ => return Err(Error::MissingFutureRegressors { expected: h }),
            }
        }
    }

    // Regression-adjusted history on the original scale.
    let mean = fit.mean.unwrap_or(0.0);
    let mut z: Vec<f64> = y.iter().map(|&v| v - mean).collect();
    for (name, b) in &fit.beta {
        let col = &xreg.iter().find(|(c, _)| c == name).expect("checked").1;
        if col.len() != y.len() {
            return Err(Error::InvalidArgument(format!(
                "regressor {name} has {} values for {} observations",
                col.len(),
                y.len()
            )));
        }
        for (zi, xi) in z.iter_mut().zip(col.iter()) {
            *zi -= b * xi;
        }
    }

    let spec = &fit.spec;
    let (w, diff_state) =
        difference_with_state(&z, spec.d, spec.seasonal_d, spec.period)?;
    let phi = expand_ar(&fit.ar, &fit.seasonal_ar, spec.period);
    let theta = expand_ma(&fit.ma, &fit.seasonal_ma, spec.period);
    let ss = StateSpace::new(&phi, &theta);
    let out = ss.filter(&[&w])?;

    // State recursion with zero future innovations.
    let mut state = out.predicted_states[0].clone();
    let mut w_future = Vec::with_capacity(h);
    for _ in 0..h {
        w_future.push(state[0]);
        ss.apply_t(&mut state);
    }

    // Integrate the differencing back out over the extended series.
    let mut extended = w.clone();
    extended.extend_from_slice(&w_future);
    let z_full = undifference(&extended, &diff_state);
    debug_assert_eq!(z_full.len(), y.len() + h);

    let mut points = Vec::with_capacity(h);
    for (step, &z_hat) in z_full[y.len()..].iter().enumerate() {
        let mut value = z_hat + mean;
        for (name, b) in &fit.beta {
            let col = &xreg_future
                .iter()
                .find(|(c, _)| c == name)
                .expect("checked")
                .1;
            value += b * col[step];
        }
        points.push(value);
    }

    let diff_poly = differencing_polynomial(spec.d, spec.seasonal_d, spec.period);
    let psi = psi_weights(&phi, &theta, &diff_poly, h);
    let z_crit = Normal::new(0.0, 1.0)
        .expect("unit normal")
        .inverse_cdf(0.5 + level / 2.0);
    let mut cumulative = 0.0;
    let mut half_widths = Vec::with_capacity(h);
    for weight in &psi {
        cumulative += weight * weight;
        half_widths.push(z_crit * (fit.sigma2 * cumulative).sqrt());
    }
    let lower: Vec<f64> = points.iter().zip(&half_widths).map(|(p, w)| p - w).collect();
    let upper: Vec<f64> = points.iter().zip(&half_widths).map(|(p, w)| p + w).collect();

    Ok(Forecast {
        points,
        lower,
        upper,
        half_widths,
        level,
        xreg_fill: vec![0; h],
    })
}

/// Builds future regressor rows for a lag structure over the index and
/// weekly series. A lagged cell is known when the lag reaches back into
/// the observed range (lag L covers steps 1..=L); beyond that, and for
/// contemporaneous columns, the last observed value persists and the cell
/// counts toward that step's fill total. Week numbers follow the calendar
/// and are never filled.
pub fn lagged_xreg_future(
    indices: &IndexSeries,
    weekly: &WeeklySeries,
    lag_spec: &LagSpec,
    h: usize,
) -> Result<FutureRegressors> {
    if h == 0 {
        return Err(Error::InvalidArgument("forecast horizon must be >= 1".into()));
    }
    if indices.records().len() != weekly.len() {
        return Err(Error::InvalidArgument(format!(
            "index series has {} weeks but weekly series has {}",
            indices.records().len(),
            weekly.len()
        )));
    }
    lag_spec.validate()?;
    let si = indices.si();
    let hdi = indices.hdi();
    let n = si.len();
    let mut fill_counts = vec![0usize; h];

    let lagged_column = |values: &[f64], lag: usize, fills: &mut [usize]| -> Vec<f64> {
        (1..=h)
            .map(|step| {
                if lag >= step {
                    values[n + step - 1 - lag]
                } else {
                    fills[step - 1] += 1;
                    values[n - 1]
                }
            })
            .collect()
    };

    let mut columns = Vec::new();
    let mut si_lags = lag_spec.si_lags.clone();
    si_lags.sort_unstable();
    for &lag in &si_lags {
        let col = lagged_column(&si, lag, &mut fill_counts);
        columns.push((format!("SI-L{lag}"), col));
    }
    if lag_spec.include_median_dom {
        let last = *weekly.median_dom().last().expect("non-empty series");
        for fill in fill_counts.iter_mut() {
            *fill += 1;
        }
        columns.push(("median_dom".into(), vec![last; h]));
    }
    if lag_spec.include_week_number {
        let last = weekly.records().last().expect("non-empty series");
        let mut week = crate::week::YearWeek::new(last.year, last.week)
            .expect("validated series week");
        let mut col = Vec::with_capacity(h);
        for _ in 0..h {
            week = week.succ();
            col.push(week.week as f64);
        }
        columns.push(("week".into(), col));
    }
    let mut hdi_lags = lag_spec.hdi_lags.clone();
    hdi_lags.sort_unstable();
    for &lag in &hdi_lags {
        let col = lagged_column(&hdi, lag, &mut fill_counts);
        columns.push((format!("HDI-L{lag}"), col));
    }

    Ok(FutureRegressors {
        columns,
        fill_counts,
    })
}

/// Writes the forecast CSV: `step,point,lower,upper,level,xreg_fill`.
pub fn write_forecast_csv<W: Write>(forecast: &Forecast, writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["step", "point", "lower", "upper", "level", "xreg_fill"])?;
    for (i, point) in forecast.points.iter().enumerate() {
        out.write_record(&[
            (i + 1).to_string(),
            format!("{point}"),
            format!("{}", forecast.lower[i]),
            format!("{}", forecast.upper[i]),
            format!("{}", forecast.level),
            forecast.xreg_fill[i].to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
