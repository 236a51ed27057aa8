//! Lagged cross-correlation between two aligned series.

use std::io::Write;

use crate::error::{Error, Result};

/// Cross-correlations over lags −max_lag..=max_lag, with the white-noise
/// significance bound 2/√n.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCorrelation {
    lags: Vec<i64>,
    correlations: Vec<f64>,
    significance_bound: f64,
}

impl CrossCorrelation {
    pub fn pairs(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.lags.iter().copied().zip(self.correlations.iter().copied())
    }

    pub fn correlation_at(&self, lag: i64) -> Option<f64> {
        let pos = self.lags.iter().position(|&k| k == lag)?;
        Some(self.correlations[pos])
    }

    /// Lag with the largest correlation (smallest lag wins ties).
    pub fn argmax_lag(&self) -> i64 {
        let mut best = 0usize;
        for i in 1..self.lags.len() {
            if self.correlations[i] > self.correlations[best] {
                best = i;
            }
        }
        self.lags[best]
    }

    /// 2/√n threshold for judging a correlation significant.
    pub fn significance_bound(&self) -> f64 {
        self.significance_bound
    }
}

/// Correlation of (a_t, b_{t+k}) for each lag k, both series centered and
/// scaled by their full-sample mean and standard deviation; the lagged
/// cross-product is averaged over the overlap length, so identical series
/// give exactly 1 at lag 0.
pub fn cross_correlation(a: &[f64], b: &[f64], max_lag: usize) -> Result<CrossCorrelation> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "cross-correlation needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n <= max_lag + 2 {
        return Err(Error::SeriesTooShort {
            needed: max_lag + 3,
            got: n,
        });
    }

    let nf = n as f64;
    let mean = |x: &[f64]| x.iter().sum::<f64>() / nf;
    let (ma, mb) = (mean(a), mean(b));
    let sd = |x: &[f64], m: f64| (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / nf).sqrt();
    let (sa, sb) = (sd(a, ma), sd(b, mb));
    if sa == 0.0 {
        return Err(Error::ZeroVariance("first series".into()));
    }
    if sb == 0.0 {
        return Err(Error::ZeroVariance("second series".into()));
    }

    let m = max_lag as i64;
    let mut lags = Vec::with_capacity(2 * max_lag + 1);
    let mut correlations = Vec::with_capacity(2 * max_lag + 1);
    for k in -m..=m {
        let (lo, hi) = if k >= 0 {
            (0usize, n - k as usize)
        } else {
            ((-k) as usize, n)
        };
        let overlap = (hi - lo) as f64;
        let mut cross = 0.0;
        for t in lo..hi {
            let u = (t as i64 + k) as usize;
            cross += (a[t] - ma) * (b[u] - mb);
        }
        lags.push(k);
        correlations.push(cross / overlap / (sa * sb));
    }

    Ok(CrossCorrelation {
        lags,
        correlations,
        significance_bound: 2.0 / nf.sqrt(),
    })
}

/// Writes the cross-correlation CSV: `lag,correlation,significance_bound`.
pub fn write_xcorr_csv<W: Write>(xc: &CrossCorrelation, writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["lag", "correlation", "significance_bound"])?;
    for (lag, r) in xc.pairs() {
        out.write_record([
            lag.to_string(),
            format!("{r}"),
            format!("{}", xc.significance_bound()),
        ])?;
    }
    out.flush()?;
    Ok(())
}
