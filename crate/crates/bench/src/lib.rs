//! Shared fixtures for the criterion benchmarks: a deterministic synthetic
//! weekly series and the full lagged design matrix built from it.

use demandcast_core::indices::compute_indices;
use demandcast_core::synth::{generate_weekly, SynthParams};
use demandcast_core::tsa::build_design_matrix;
use demandcast_core::{DesignMatrix, IndexSeries, LagSpec, WeeklySeries};

/// Generates a seeded weekly series of the requested length.
pub fn synthetic_weekly(n_weeks: usize) -> WeeklySeries {
    let params = SynthParams {
        seed: 42,
        n_weeks,
        ..SynthParams::default()
    };
    let (weekly, _) = generate_weekly(&params).expect("synthetic series generates");
    weekly
}

/// Demand and showing indices for the fixture series.
pub fn synthetic_indices(weekly: &WeeklySeries) -> IndexSeries {
    compute_indices(weekly).expect("indices compute")
}

/// The full 35-predictor design matrix used by the regression benchmarks.
pub fn synthetic_design(n_weeks: usize) -> DesignMatrix {
    let weekly = synthetic_weekly(n_weeks);
    let idx = synthetic_indices(&weekly);
    build_design_matrix(&idx, &weekly, &LagSpec::full()).expect("design matrix builds")
}
