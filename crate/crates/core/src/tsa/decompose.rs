//! Iterative seasonal/trend decomposition by weekly-subseries means.
//!
//! Each iteration estimates the seasonal cycle as the mean of the detrended
//! values at each week position, then re-estimates the trend as a centered
//! moving average of the deseasonalized series. The cycle is recentered to
//! mean zero each pass, with the level folded into the trend, so seasonal +
//! trend + remainder always reconstructs the input exactly.

use std::io::Write;

use crate::error::{Error, Result};

/// Additive decomposition of a series into trend, seasonal, and remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    trend: Vec<f64>,
    seasonal: Vec<f64>,
    remainder: Vec<f64>,
    cycle: Vec<f64>,
}

impl Decomposition {
    pub fn trend(&self) -> &[f64] {
        &self.trend
    }

    /// Full-length periodic seasonal component.
    pub fn seasonal(&self) -> &[f64] {
        &self.seasonal
    }

    pub fn remainder(&self) -> &[f64] {
        &self.remainder
    }

    /// One period of the seasonal pattern (mean zero).
    pub fn cycle(&self) -> &[f64] {
        &self.cycle
    }

    /// 1-based position of the seasonal maximum within the cycle.
    pub fn peak_position(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.cycle.iter().enumerate() {
            if v > self.cycle[best] {
                best = i;
            }
        }
        best + 1
    }
}

/// Mean of `x[t-half ..= t+half]`, the window shrinking at the endpoints.
fn centered_moving_average(x: &[f64], half: usize) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|t| {
            let lo = t.saturating_sub(half);
            let hi = (t + half).min(n - 1);
            x[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Decomposes `x` additively with the given seasonal period.
///
/// `iterations` is clamped to the documented 1..=10 range by validation;
/// two passes are enough for the weekly housing series.
pub fn seasonal_decompose(x: &[f64], period: usize, iterations: usize) -> Result<Decomposition> {
    if period < 2 {
        return Err(Error::InvalidArgument(format!(
            "decomposition period must be >= 2, got {period}"
        )));
    }
    if !(1..=10).contains(&iterations) {
        return Err(Error::InvalidArgument(format!(
            "decomposition iterations must be in 1..=10, got {iterations}"
        )));
    }
    let n = x.len();
    if n < 2 * period {
        return Err(Error::SeriesTooShort {
            needed: 2 * period,
            got: n,
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidSeries(
            "decomposition input contains non-finite values".into(),
        ));
    }

    let half = period / 2;
    let mut trend = vec![0.0; n];
    let mut cycle = vec![0.0; period];
    for _ in 0..iterations {
        // Seasonal cycle: mean of detrended values at each week position.
        let mut sums = vec![0.0; period];
        let mut counts = vec![0usize; period];
        for t in 0..n {
            sums[t % period] += x[t] - trend[t];
            counts[t % period] += 1;
        }
        for w in 0..period {
            cycle[w] = sums[w] / counts[w] as f64;
        }

        let deseasonalized: Vec<f64> =
            (0..n).map(|t| x[t] - cycle[t % period]).collect();
        trend = centered_moving_average(&deseasonalized, half);

        // Move the cycle's level into the trend so the cycle has mean zero.
        let level = cycle.iter().sum::<f64>() / period as f64;
        for c in cycle.iter_mut() {
            *c -= level;
        }
        for t in trend.iter_mut() {
            *t += level;
        }
    }

    let seasonal: Vec<f64> = (0..n).map(|t| cycle[t % period]).collect();
    let remainder: Vec<f64> = (0..n).map(|t| x[t] - trend[t] - seasonal[t]).collect();
    Ok(Decomposition {
        trend,
        seasonal,
        remainder,
        cycle,
    })
}

/// Writes the decomposition CSV: `t,observed,trend,seasonal,remainder`
/// with t 1-based.
pub fn write_decomposition_csv<W: Write>(
    x: &[f64],
    dec: &Decomposition,
    writer: W,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["t", "observed", "trend", "seasonal", "remainder"])?;
    for t in 0..x.len() {
        out.write_record([
            (t + 1).to_string(),
            format!("{}", x[t]),
            format!("{}", dec.trend()[t]),
            format!("{}", dec.seasonal()[t]),
            format!("{}", dec.remainder()[t]),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    #[test]
    fn constant_series_is_pure_trend() {
        let x = vec![7.5; 120];
        let dec = seasonal_decompose(&x, 52, 2).unwrap();
        for t in 0..x.len() {
            assert_relative_eq!(dec.trend()[t], 7.5, epsilon = 1e-12);
            assert_relative_eq!(dec.seasonal()[t], 0.0, epsilon = 1e-12);
            assert_relative_eq!(dec.remainder()[t], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn pure_sinusoid_is_pure_seasonal() {
        let amplitude = 3.0;
        let x: Vec<f64> = (0..156)
            .map(|t| amplitude * (TAU * (t as f64 - 8.0) / 52.0).sin())
            .collect();
        let dec = seasonal_decompose(&x, 52, 2).unwrap();
        for t in 0..x.len() {
            assert!(
                dec.trend()[t].abs() < 0.02 * amplitude,
                "trend[{t}] = {}",
                dec.trend()[t]
            );
            assert_relative_eq!(dec.seasonal()[t], x[t], epsilon = 0.05 * amplitude);
        }
    }

    #[test]
    fn reconstruction_is_exact() {
        let x: Vec<f64> = (0..140)
            .map(|t| {
                10.0 + 0.05 * t as f64
                    + 2.0 * (TAU * t as f64 / 52.0).cos()
                    + ((t * 37) % 11) as f64 * 0.1
            })
            .collect();
        let dec = seasonal_decompose(&x, 52, 3).unwrap();
        for t in 0..x.len() {
            let rebuilt = dec.trend()[t] + dec.seasonal()[t] + dec.remainder()[t];
            assert_relative_eq!(rebuilt, x[t], epsilon = 1e-9);
        }
    }

    #[test]
    fn cycle_has_mean_zero() {
        let x: Vec<f64> = (0..156)
            .map(|t| 5.0 + (TAU * t as f64 / 52.0).sin() + 0.01 * t as f64)
            .collect();
        let dec = seasonal_decompose(&x, 52, 2).unwrap();
        let mean: f64 = dec.cycle().iter().sum::<f64>() / 52.0;
        assert!(mean.abs() < 1e-9);
        // Any full-period window of the periodic seasonal has the same mean.
        let window: f64 = dec.seasonal()[37..89].iter().sum::<f64>() / 52.0;
        assert!(window.abs() < 1e-9);
    }

    #[test]
    fn peak_position_tracks_the_cycle_maximum() {
        let x: Vec<f64> = (0..156)
            .map(|t| (TAU * (t as f64 + 1.0 - 34.0) / 52.0).cos())
            .collect();
        let dec = seasonal_decompose(&x, 52, 2).unwrap();
        assert_eq!(dec.peak_position(), 34);
    }

    #[test]
    fn short_series_rejected() {
        assert!(matches!(
            seasonal_decompose(&vec![1.0; 103], 52, 2),
            Err(Error::SeriesTooShort { needed: 104, got: 103 })
        ));
    }

    #[test]
    fn csv_has_expected_shape() {
        let x: Vec<f64> = (0..104).map(|t| t as f64).collect();
        let dec = seasonal_decompose(&x, 52, 1).unwrap();
        let mut buf = Vec::new();
        write_decomposition_csv(&x, &dec, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,observed,trend,seasonal,remainder");
        assert_eq!(text.lines().count(), 105);
    }
}
