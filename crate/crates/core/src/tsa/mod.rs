//! Time-series primitives shared by all models: differencing, seasonal
//! decomposition, cross-correlation, and design-matrix construction.

pub mod decompose;
pub mod design;
pub mod diff;
pub mod xcorr;

pub use decompose::{seasonal_decompose, write_decomposition_csv, Decomposition};
pub use design::{
    build_design_matrix, fourier_terms, read_design_csv, write_design_csv, DesignMatrix, LagSpec,
    DEFAULT_FOURIER_PERIOD,
};
pub use diff::{difference, difference_with_state, undifference, DifferenceState};
pub use xcorr::{cross_correlation, write_xcorr_csv, CrossCorrelation};
