//! Seeded simulation of the model, for tests and synthetic studies.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

use super::model::ArimaSpec;
use super::transform::{expand_ar, expand_ma};

/// Simulates a series of length `n` whose differenced values follow the
/// stationary ARMA part of `spec` with the given coefficients and
/// innovation standard deviation. The ARMA recursion burns in from zeros;
/// integration seeds the pre-sample levels at zero.
pub fn simulate_arima(
    spec: &ArimaSpec,
    ar: &[f64],
    ma: &[f64],
    seasonal_ar: &[f64],
    seasonal_ma: &[f64],
    sigma: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    spec.validate()?;
    if ar.len() != spec.p
        || ma.len() != spec.q
        || seasonal_ar.len() != spec.seasonal_p
        || seasonal_ma.len() != spec.seasonal_q
    {
        return Err(Error::InvalidArgument(
            "coefficient lengths must match the model orders".into(),
        ));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "innovation sd must be positive, got {sigma}"
        )));
    }
    let removed = spec.diff_loss();
    if n <= removed {
        return Err(Error::SeriesTooShort {
            needed: removed + 1,
            got: n,
        });
    }
    let m = n - removed;

    let phi = expand_ar(ar, seasonal_ar, spec.period);
    let theta = expand_ma(ma, seasonal_ma, spec.period);
    let burn = 300 + 10 * (phi.len() + theta.len());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let total = burn + m;
    let mut eps = Vec::with_capacity(total);
    let mut w = Vec::with_capacity(total);
    for t in 0..total {
        let e: f64 = normal.sample(&mut rng);
        let mut value = e;
        for (i, &coef) in phi.iter().enumerate() {
            if t > i {
                value += coef * w[t - 1 - i];
            }
        }
        for (j, &coef) in theta.iter().enumerate() {
            if t > j {
                value += coef * eps[t - 1 - j];
            }
        }
        eps.push(e);
        w.push(value);
    }
    let mut series: Vec<f64> = w[burn..].to_vec();

    // Integrate seasonal differencing first, then regular, mirroring the
    // order the fitting side removes them in reverse.
    for _ in 0..spec.seasonal_d {
        let s = spec.period;
        let mut out = vec![0.0; s];
        for (t, &v) in series.iter().enumerate() {
            let prev = out[t];
            out.push(prev + v);
        }
        series = out;
    }
    for _ in 0..spec.d {
        let mut out = vec![0.0];
        for (t, &v) in series.iter().enumerate() {
            let prev = out[t];
            out.push(prev + v);
        }
        series = out;
    }
    debug_assert_eq!(series.len(), n);
    Ok(series)
}
