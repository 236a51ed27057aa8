//! Demand indices derived from weekly market series.
//!
//! HDI (housing demand index) is the share of on-market homes sold in a
//! week; SI (showing index) is showings per on-market home. Models target
//! the square root of HDI, which is closer to normally distributed, so the
//! transform and its inverse live here too.

use std::io::{Read, Write};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::series::WeeklySeries;

/// One week of demand indices.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexRecord {
    pub year: i32,
    pub week: u32,
    /// Sold / on-market, in [0, 1].
    pub hdi: f64,
    /// Showings / on-market, ≥ 0.
    pub si: f64,
    /// √hdi, the modeling target.
    pub hdi_sqrt: f64,
}

/// Per-week demand indices aligned to a source [`WeeklySeries`].
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSeries {
    records: Vec<IndexRecord>,
}

impl IndexSeries {
    pub fn records(&self) -> &[IndexRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn hdi(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.hdi).collect()
    }

    pub fn si(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.si).collect()
    }

    pub fn hdi_sqrt(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.hdi_sqrt).collect()
    }
}

/// Computes HDI, SI, and √HDI for every week.
///
/// Fails on any week with zero on-market homes, since the ratios are
/// undefined there.
pub fn compute_indices(series: &WeeklySeries) -> Result<IndexSeries> {
    let mut records = Vec::with_capacity(series.len());
    for r in series.records() {
        if r.on_market == 0 {
            return Err(Error::ZeroOnMarket {
                year: r.year,
                week: r.week,
            });
        }
        let denom = r.on_market as f64;
        let hdi = r.sold as f64 / denom;
        records.push(IndexRecord {
            year: r.year,
            week: r.week,
            hdi,
            si: r.showings as f64 / denom,
            hdi_sqrt: hdi.sqrt(),
        });
    }
    Ok(IndexSeries { records })
}

/// Maps a √HDI-scale value back to HDI scale.
pub fn inverse_transform(hdi_sqrt_value: f64) -> Result<f64> {
    if !hdi_sqrt_value.is_finite() || hdi_sqrt_value < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "inverse transform requires a finite value >= 0, got {hdi_sqrt_value}"
        )));
    }
    Ok(hdi_sqrt_value * hdi_sqrt_value)
}

/// Price elasticity of demand: relative quantity change over relative
/// price change.
pub fn price_elasticity(dq_over_q: f64, dp_over_p: f64) -> Result<f64> {
    if dp_over_p == 0.0 || !dp_over_p.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "price elasticity requires a nonzero finite relative price change, got {dp_over_p}"
        )));
    }
    Ok(dq_over_q / dp_over_p)
}

/// Formats a value with 10 significant digits in plain decimal notation.
pub(crate) fn format_sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = 9 - exponent;
    if (0..=20).contains(&decimals) {
        format!("{x:.*}", decimals as usize)
    } else {
        format!("{x:.9e}")
    }
}

/// Writes the index CSV: `year,week,hdi,si,hdi_sqrt` with 10 significant
/// digits per value.
pub fn write_index_csv<W: Write>(indices: &IndexSeries, writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["year", "week", "hdi", "si", "hdi_sqrt"])?;
    for r in indices.records() {
        out.write_record([
            r.year.to_string(),
            r.week.to_string(),
            format_sig10(r.hdi),
            format_sig10(r.si),
            format_sig10(r.hdi_sqrt),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct IndexCsvRow {
    year: i32,
    week: u32,
    hdi: f64,
    si: f64,
    hdi_sqrt: f64,
}

/// Reads an index CSV written by [`write_index_csv`].
pub fn read_index_csv<R: Read>(reader: R) -> Result<IndexSeries> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut records = Vec::new();
    for (i, row) in rdr.deserialize::<IndexCsvRow>().enumerate() {
        let row = row.map_err(|e| Error::ParseRow {
            row: i + 1,
            field: "record",
            message: e.to_string(),
        })?;
        records.push(IndexRecord {
            year: row.year,
            week: row.week,
            hdi: row.hdi,
            si: row.si,
            hdi_sqrt: row.hdi_sqrt,
        });
    }
    if records.is_empty() {
        return Err(Error::InvalidSeries("index CSV has no rows".into()));
    }
    Ok(IndexSeries { records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::WeeklyRecord;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn series(rows: &[(u64, u64, u64)]) -> WeeklySeries {
        let records = rows
            .iter()
            .enumerate()
            .map(|(i, &(showings, sold, on_market))| WeeklyRecord {
                year: 2011,
                week: (i + 2) as u32,
                showings,
                sold,
                on_market,
                median_dom: 0.0,
                mean_dom: 0.0,
            })
            .collect();
        WeeklySeries::new(records).unwrap()
    }

    #[test]
    fn published_excerpt_rows_reproduced() {
        // (showings, sold, on_market) for 2011 weeks 02-05 of the published
        // data-structure excerpt, against independently computed ratios.
        let src = series(&[
            (11672, 58, 15850),
            (13250, 82, 16153),
            (13732, 87, 16410),
            (12978, 153, 16637),
        ]);
        let idx = compute_indices(&src).unwrap();
        let hdi = [
            0.0036593059936908517,
            0.0050764563858106855,
            0.00530164533820841,
            0.009196369537777244,
        ];
        let si = [
            0.736403785488959,
            0.8202810623413608,
            0.8368068251066423,
            0.780068521969105,
        ];
        let hdi_sqrt = [
            0.06049219779187107,
            0.07124925533513095,
            0.07281239824513687,
            0.09589770350627404,
        ];
        for (i, r) in idx.records().iter().enumerate() {
            assert_relative_eq!(r.hdi, hdi[i], max_relative = 1e-15);
            assert_relative_eq!(r.si, si[i], max_relative = 1e-15);
            assert_relative_eq!(r.hdi_sqrt, hdi_sqrt[i], max_relative = 1e-15);
            assert_relative_eq!(r.hdi_sqrt * r.hdi_sqrt, r.hdi, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_sold_gives_zero_indices() {
        let idx = compute_indices(&series(&[(100, 0, 5000)])).unwrap();
        assert_eq!(idx.records()[0].hdi, 0.0);
        assert_eq!(idx.records()[0].hdi_sqrt, 0.0);
    }

    #[test]
    fn zero_on_market_names_week() {
        match compute_indices(&series(&[(0, 0, 0)])).unwrap_err() {
            Error::ZeroOnMarket { year, week } => {
                assert_eq!((year, week), (2011, 2));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn inverse_transform_basics() {
        assert_eq!(inverse_transform(0.5).unwrap(), 0.25);
        assert_eq!(inverse_transform(0.0).unwrap(), 0.0);
        assert!(inverse_transform(-0.1).is_err());
    }

    #[test]
    fn inverse_transform_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let x: f64 = rng.random_range(0.0..1.0);
            assert_relative_eq!(inverse_transform(x.sqrt()).unwrap(), x, epsilon = 1e-12);
        }
    }

    #[test]
    fn elasticity_arithmetic() {
        assert_relative_eq!(price_elasticity(0.10, 0.05).unwrap(), 2.0, epsilon = 1e-15);
        assert_eq!(price_elasticity(0.0, 0.05).unwrap(), 0.0);
        for x in [0.01, -0.3, 2.5] {
            assert_relative_eq!(price_elasticity(x, x).unwrap(), 1.0, epsilon = 1e-15);
        }
        assert!(price_elasticity(0.1, 0.0).is_err());
    }

    #[test]
    fn sqrt_transform_preserves_ordering() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let a: f64 = rng.random_range(0.0..1.0);
            let b: f64 = rng.random_range(0.0..1.0);
            assert_eq!(a < b, a.sqrt() < b.sqrt());
        }
    }

    #[test]
    fn hdi_invariant_under_common_scaling() {
        let base = compute_indices(&series(&[(100, 58, 15850)])).unwrap();
        let scaled = compute_indices(&series(&[(100, 58 * 3, 15850 * 3)])).unwrap();
        assert_relative_eq!(
            base.records()[0].hdi,
            scaled.records()[0].hdi,
            epsilon = 1e-15
        );
    }

    #[test]
    fn csv_round_trip_and_precision() {
        let idx = compute_indices(&series(&[(11672, 58, 15850), (13250, 82, 16153)])).unwrap();
        let mut buf = Vec::new();
        write_index_csv(&idx, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("year,week,hdi,si,hdi_sqrt\n"));
        assert!(text.contains("0.003659305994"), "{text}");
        let back = read_index_csv(&buf[..]).unwrap();
        for (a, b) in idx.records().iter().zip(back.records()) {
            assert_eq!((a.year, a.week), (b.year, b.week));
            assert_relative_eq!(a.hdi, b.hdi, max_relative = 5e-10);
            assert_relative_eq!(a.si, b.si, max_relative = 5e-10);
            assert_relative_eq!(a.hdi_sqrt, b.hdi_sqrt, max_relative = 5e-10);
        }
    }

    #[test]
    fn sig10_formatting() {
        assert_eq!(format_sig10(0.0), "0");
        assert_eq!(format_sig10(1.0), "1.000000000");
        assert_eq!(format_sig10(0.0036593059936908517), "0.003659305994");
        assert_eq!(format_sig10(-12.5), "-12.50000000");
        assert_eq!(format_sig10(1.5e25), "1.500000000e25");
    }
}
