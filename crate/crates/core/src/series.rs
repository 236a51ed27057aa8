//! Weekly market series: the aggregated record stream every model consumes.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::week::YearWeek;

/// One week of aggregated market activity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklyRecord {
    /// Calendar year.
    pub year: i32,
    /// Week number 1..=52.
    pub week: u32,
    /// Count of home showings during the week.
    pub showings: u64,
    /// Count of homes sold during the week.
    pub sold: u64,
    /// Count of listings active on the market during the week.
    pub on_market: u64,
    /// Median days-on-market over the week's sold homes (0 when none sold).
    pub median_dom: f64,
    /// Mean days-on-market over the week's sold homes (0 when none sold).
    pub mean_dom: f64,
}

impl WeeklyRecord {
    /// The week this record describes.
    pub fn year_week(&self) -> YearWeek {
        YearWeek {
            year: self.year,
            week: self.week,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(1..=52).contains(&self.week) {
            return Err(Error::InvalidSeries(format!(
                "week {} outside 1..=52 in year {}",
                self.week, self.year
            )));
        }
        if self.sold > self.on_market {
            return Err(Error::SoldExceedsOnMarket {
                year: self.year,
                week: self.week,
                sold: self.sold,
                on_market: self.on_market,
            });
        }
        if self.median_dom < 0.0 || self.mean_dom < 0.0 {
            return Err(Error::InvalidSeries(format!(
                "negative days-on-market in {} week {}",
                self.year, self.week
            )));
        }
        Ok(())
    }
}

/// A gap-free run of consecutive weekly records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklySeries {
    records: Vec<WeeklyRecord>,
}

impl WeeklySeries {
    /// Builds a series, checking the per-record invariants and that weeks are
    /// strictly consecutive (52 rolls over to week 1 of the next year).
    pub fn new(records: Vec<WeeklyRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InvalidSeries("empty weekly series".into()));
        }
        for r in &records {
            r.validate()?;
        }
        for pair in records.windows(2) {
            let expect = pair[0].year_week().succ();
            if pair[1].year_week() != expect {
                return Err(Error::InvalidSeries(format!(
                    "weeks not consecutive: {} followed by {}",
                    pair[0].year_week(),
                    pair[1].year_week()
                )));
            }
        }
        Ok(Self { records })
    }

    /// The records, in week order.
    pub fn records(&self) -> &[WeeklyRecord] {
        &self.records
    }

    /// Number of weeks.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// Always false: a series is non-empty by construction.
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// First week in the series.
    pub fn start(&self) -> YearWeek {
        self.records[0].year_week()
    }

    /// Showings counts as a float series.
    pub fn showings(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.showings as f64).collect()
    }

    /// Sold counts as a float series.
    pub fn sold(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.sold as f64).collect()
    }

    /// On-market counts as a float series.
    pub fn on_market(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.on_market as f64).collect()
    }

    /// Median days-on-market as a float series.
    pub fn median_dom(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.median_dom).collect()
    }

    /// Week-of-year numbers (1..=52) as a float series.
    pub fn week_numbers(&self) -> Vec<f64> {
        self.records.iter().map(|r| f64::from(r.week)).collect()
    }

    /// Writes the weekly CSV: `year,week,showings,sold,on_market,median_dom,mean_dom,dom_missing`.
    ///
    /// `dom_missing` is 1 for weeks with no sales (where both DOM stats are 0).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "year",
            "week",
            "showings",
            "sold",
            "on_market",
            "median_dom",
            "mean_dom",
            "dom_missing",
        ])?;
        for r in &self.records {
            out.write_record([
                r.year.to_string(),
                r.week.to_string(),
                r.showings.to_string(),
                r.sold.to_string(),
                r.on_market.to_string(),
                format_float(r.median_dom),
                format_float(r.mean_dom),
                if r.sold == 0 { "1" } else { "0" }.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a weekly CSV produced by [`WeeklySeries::write_csv`].
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut records = Vec::new();
        for (i, row) in rdr.deserialize::<WeeklyCsvRow>().enumerate() {
            let row = row.map_err(|e| Error::ParseRow {
                row: i + 1,
                field: "record",
                message: e.to_string(),
            })?;
            records.push(WeeklyRecord {
                year: row.year,
                week: row.week,
                showings: row.showings,
                sold: row.sold,
                on_market: row.on_market,
                median_dom: row.median_dom,
                mean_dom: row.mean_dom,
            });
        }
        Self::new(records)
    }

    /// Reads a weekly CSV from a file path.
    pub fn read_csv_path(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

#[derive(Deserialize)]
struct WeeklyCsvRow {
    year: i32,
    week: u32,
    showings: u64,
    sold: u64,
    on_market: u64,
    median_dom: f64,
    mean_dom: f64,
    #[serde(default)]
    #[allow(dead_code)]
    dom_missing: Option<u8>,
}

/// Prints a float without trailing `.0` noise: `14` for 14.0, `14.5` for 14.5.
pub(crate) fn format_float(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(year: i32, week: u32) -> WeeklyRecord {
        WeeklyRecord {
            year,
            week,
            showings: 10,
            sold: 1,
            on_market: 5,
            median_dom: 14.0,
            mean_dom: 15.5,
        }
    }

    #[test]
    fn consecutive_weeks_accepted() {
        let s = WeeklySeries::new(vec![rec(2011, 51), rec(2011, 52), rec(2012, 1)]).unwrap();
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn gap_rejected() {
        let err = WeeklySeries::new(vec![rec(2011, 1), rec(2011, 3)]).unwrap_err();
        assert!(matches!(err, Error::InvalidSeries(_)));
    }

    #[test]
    fn empty_rejected() {
        assert!(WeeklySeries::new(vec![]).is_err());
    }

    #[test]
    fn sold_above_on_market_rejected() {
        let mut r = rec(2011, 1);
        r.sold = 9;
        r.on_market = 3;
        let err = WeeklySeries::new(vec![r]).unwrap_err();
        assert!(matches!(err, Error::SoldExceedsOnMarket { .. }));
    }

    #[test]
    fn csv_round_trip() {
        let s = WeeklySeries::new(vec![rec(2011, 52), rec(2012, 1)]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "year,week,showings,sold,on_market,median_dom,mean_dom,dom_missing"
        ));
        let back = WeeklySeries::read_csv(&buf[..]).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn dom_missing_flag_tracks_zero_sales() {
        let mut r = rec(2011, 1);
        r.sold = 0;
        r.median_dom = 0.0;
        r.mean_dom = 0.0;
        let s = WeeklySeries::new(vec![r]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().ends_with(",1"));
    }
}
