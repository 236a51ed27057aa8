//! Housing-demand forecasting from property-showing activity.
//!
//! The pipeline ingests raw property events, aggregates them into weekly
//! market series, derives demand indices, and fits a family of forecasting
//! models (regularized linear, seasonal ARIMA with exogenous regressors,
//! and a blended tree/network ensemble) with rolling-origin evaluation.

pub mod arima;
pub mod ensemble;
pub mod error;
pub mod evaluation;
pub mod indices;
pub mod ingest;
pub mod lasso;
pub mod linear;
pub mod series;
pub mod synth;
pub mod tsa;
pub mod week;

pub use error::{Error, Result};
pub use indices::IndexSeries;
pub use series::{WeeklyRecord, WeeklySeries};
pub use tsa::{DesignMatrix, LagSpec};
pub use week::YearWeek;
