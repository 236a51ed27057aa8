//! Seasonal ARIMA modeling with exogenous regressors: exact maximum
//! likelihood via Kalman filtering, information-criterion model selection,
//! multi-step forecasting with intervals, and seeded simulation.

mod artifact;
mod forecast;
mod model;
mod optimize;
mod simulate;
mod state_space;
mod transform;

pub use forecast::{
    forecast_regarima, lagged_xreg_future, write_forecast_csv, Forecast, FutureRegressors,
};
pub use model::{
    auto_select, evaluate_regarima, fit_regarima, ArimaFit, ArimaSpec, FitOptions,
    SelectionReport,
};
pub use simulate::simulate_arima;
