//! Named-column design matrices of lagged, calendar, and Fourier predictors.

use std::collections::HashSet;
use std::io::{Read, Write};

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::indices::IndexSeries;
use crate::series::WeeklySeries;
use crate::week::YearWeek;

/// Default Fourier period: weeks per year, 365.25 / 7.
pub const DEFAULT_FOURIER_PERIOD: f64 = 52.18;

/// Which lagged and calendar predictors to build, and for which target.
///
/// SI lags may include 0 (the contemporaneous showing index); HDI lags must
/// be strictly positive since HDI at lag 0 is the target itself.
#[derive(Debug, Clone, PartialEq)]
pub struct LagSpec {
    pub target_name: String,
    pub si_lags: Vec<usize>,
    pub hdi_lags: Vec<usize>,
    pub include_median_dom: bool,
    pub include_week_number: bool,
}

impl LagSpec {
    /// The 35-predictor layout: SI and its 5..20-week lags, median days on
    /// market, week of year, and the 5..20-week HDI lags.
    pub fn full() -> Self {
        let mut si_lags = vec![0];
        si_lags.extend(5..=20);
        Self {
            target_name: "hdi_sqrt".into(),
            si_lags,
            hdi_lags: (5..=20).collect(),
            include_median_dom: true,
            include_week_number: true,
        }
    }

    pub fn max_lag(&self) -> usize {
        self.si_lags
            .iter()
            .chain(self.hdi_lags.iter())
            .copied()
            .max()
            .unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.si_lags.is_empty()
            && self.hdi_lags.is_empty()
            && !self.include_median_dom
            && !self.include_week_number
        {
            return Err(Error::InvalidArgument(
                "lag spec selects no predictors".into(),
            ));
        }
        let distinct = |lags: &[usize]| lags.iter().collect::<HashSet<_>>().len() == lags.len();
        if !distinct(&self.si_lags) || !distinct(&self.hdi_lags) {
            return Err(Error::InvalidArgument("lag values must be distinct".into()));
        }
        if self.hdi_lags.contains(&0) {
            return Err(Error::InvalidArgument(
                "HDI lags must be positive (lag 0 is the target)".into(),
            ));
        }
        Ok(())
    }

    /// Column names in canonical order: SI lags ascending, median_dom,
    /// week, HDI lags ascending.
    pub fn column_names(&self) -> Vec<String> {
        let mut si = self.si_lags.clone();
        si.sort_unstable();
        let mut hdi = self.hdi_lags.clone();
        hdi.sort_unstable();
        let mut names: Vec<String> = si.iter().map(|l| format!("SI-L{l}")).collect();
        if self.include_median_dom {
            names.push("median_dom".into());
        }
        if self.include_week_number {
            names.push("week".into());
        }
        names.extend(hdi.iter().map(|l| format!("HDI-L{l}")));
        names
    }
}

/// A named-column predictor matrix with an aligned target vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    column_names: Vec<String>,
    x: Array2<f64>,
    target: Vec<f64>,
    /// Calendar week per row when the matrix came from a weekly series.
    row_weeks: Vec<YearWeek>,
}

impl DesignMatrix {
    pub fn new(column_names: Vec<String>, x: Array2<f64>, target: Vec<f64>) -> Result<Self> {
        Self::with_weeks(column_names, x, target, Vec::new())
    }

    pub fn with_weeks(
        column_names: Vec<String>,
        x: Array2<f64>,
        target: Vec<f64>,
        row_weeks: Vec<YearWeek>,
    ) -> Result<Self> {
        if column_names.len() != x.ncols() {
            return Err(Error::InvalidArgument(format!(
                "{} column names for {} columns",
                column_names.len(),
                x.ncols()
            )));
        }
        if target.len() != x.nrows() {
            return Err(Error::InvalidArgument(format!(
                "target length {} does not match {} rows",
                target.len(),
                x.nrows()
            )));
        }
        if !row_weeks.is_empty() && row_weeks.len() != x.nrows() {
            return Err(Error::InvalidArgument(
                "row week annotations do not match row count".into(),
            ));
        }
        let unique: HashSet<&String> = column_names.iter().collect();
        if unique.len() != column_names.len() {
            return Err(Error::InvalidArgument("duplicate column names".into()));
        }
        if x.iter().any(|v| !v.is_finite()) || target.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(
                "design matrix contains non-finite values".into(),
            ));
        }
        Ok(Self {
            column_names,
            x,
            target,
            row_weeks,
        })
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn row_weeks(&self) -> &[YearWeek] {
        &self.row_weeks
    }

    pub fn nrows(&self) -> usize {
        self.x.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.x.ncols()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Result<ArrayView1<'_, f64>> {
        let idx = self
            .column_index(name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
        Ok(self.x.column(idx))
    }

    /// New matrix keeping only the named columns, in the given order.
    pub fn select_columns(&self, names: &[&str]) -> Result<DesignMatrix> {
        let mut x = Array2::zeros((self.nrows(), names.len()));
        for (j, name) in names.iter().enumerate() {
            x.column_mut(j).assign(&self.column(name)?);
        }
        DesignMatrix::with_weeks(
            names.iter().map(|s| s.to_string()).collect(),
            x,
            self.target.clone(),
            self.row_weeks.clone(),
        )
    }

    /// New matrix keeping only the given rows, in the given order.
    pub fn subset_rows(&self, rows: &[usize]) -> Result<DesignMatrix> {
        let mut x = Array2::zeros((rows.len(), self.ncols()));
        let mut target = Vec::with_capacity(rows.len());
        let mut weeks = Vec::new();
        for (i, &r) in rows.iter().enumerate() {
            if r >= self.nrows() {
                return Err(Error::InvalidArgument(format!(
                    "row index {r} out of range ({} rows)",
                    self.nrows()
                )));
            }
            x.row_mut(i).assign(&self.x.row(r));
            target.push(self.target[r]);
            if !self.row_weeks.is_empty() {
                weeks.push(self.row_weeks[r]);
            }
        }
        DesignMatrix::with_weeks(self.column_names.clone(), x, target, weeks)
    }
}

/// Builds the lagged design matrix over an index/weekly series pair.
///
/// Rows run from the first week with full lag history to the end, so the
/// row count is the series length minus the maximum lag. The target column
/// is chosen by the lag spec's `target_name` (hdi_sqrt, hdi, or si).
pub fn build_design_matrix(
    idx: &IndexSeries,
    weekly: &WeeklySeries,
    spec: &LagSpec,
) -> Result<DesignMatrix> {
    spec.validate()?;
    if idx.len() != weekly.len() {
        return Err(Error::InvalidArgument(format!(
            "index series has {} weeks but weekly series has {}",
            idx.len(),
            weekly.len()
        )));
    }
    let n = idx.len();
    let max_lag = spec.max_lag();
    if max_lag >= n {
        return Err(Error::SeriesTooShort {
            needed: max_lag + 1,
            got: n,
        });
    }

    let target_full: Vec<f64> = match spec.target_name.as_str() {
        "hdi_sqrt" => idx.hdi_sqrt(),
        "hdi" => idx.hdi(),
        "si" => idx.si(),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown design target '{other}' (expected hdi_sqrt, hdi, or si)"
            )))
        }
    };
    let si = idx.si();
    let hdi = idx.hdi();

    let names = spec.column_names();
    let rows = n - max_lag;
    let mut x = Array2::zeros((rows, names.len()));
    let mut target = Vec::with_capacity(rows);
    let mut weeks = Vec::with_capacity(rows);
    for (row, t) in (max_lag..n).enumerate() {
        for (col, name) in names.iter().enumerate() {
            let v = if let Some(lag) = name.strip_prefix("SI-L") {
                let lag: usize = lag.parse().expect("generated name");
                si[t - lag]
            } else if let Some(lag) = name.strip_prefix("HDI-L") {
                let lag: usize = lag.parse().expect("generated name");
                hdi[t - lag]
            } else if name == "median_dom" {
                weekly.records()[t].median_dom
            } else {
                f64::from(weekly.records()[t].week)
            };
            x[(row, col)] = v;
        }
        target.push(target_full[t]);
        let rec = &weekly.records()[t];
        let yw = YearWeek::new(rec.year, rec.week)
            .ok_or_else(|| Error::InvalidSeries(format!("invalid week {}", rec.week)))?;
        weeks.push(yw);
    }

    DesignMatrix::with_weeks(names, x, target, weeks)
}

/// Fourier predictor columns sin(2πjt/period), cos(2πjt/period) for
/// j = 1..=k at t = 1..=n, named `sin_j`/`cos_j`.
pub fn fourier_terms(n: usize, k: usize, period: f64) -> Result<(Vec<String>, Array2<f64>)> {
    if k == 0 {
        return Err(Error::InvalidArgument("fourier order must be >= 1".into()));
    }
    if (2 * k) as f64 >= period {
        return Err(Error::InvalidArgument(format!(
            "fourier order {k} too large for period {period} (need 2K < period)"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument(
            "fourier terms need at least one row".into(),
        ));
    }
    let mut names = Vec::with_capacity(2 * k);
    let mut x = Array2::zeros((n, 2 * k));
    for j in 1..=k {
        names.push(format!("sin_{j}"));
        names.push(format!("cos_{j}"));
        for t in 1..=n {
            let angle = std::f64::consts::TAU * j as f64 * t as f64 / period;
            x[(t - 1, 2 * (j - 1))] = angle.sin();
            x[(t - 1, 2 * (j - 1) + 1)] = angle.cos();
        }
    }
    Ok((names, x))
}

/// Writes a design matrix CSV: `year,week,target,<columns...>` (year/week
/// blank when the matrix has no calendar annotation).
pub fn write_design_csv<W: Write>(dm: &DesignMatrix, writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    let mut header = vec!["year".to_string(), "week".to_string(), "target".to_string()];
    header.extend(dm.column_names().iter().cloned());
    out.write_record(&header)?;
    for r in 0..dm.nrows() {
        let mut rec = Vec::with_capacity(3 + dm.ncols());
        if dm.row_weeks().is_empty() {
            rec.push(String::new());
            rec.push(String::new());
        } else {
            rec.push(dm.row_weeks()[r].year.to_string());
            rec.push(dm.row_weeks()[r].week.to_string());
        }
        rec.push(format!("{}", dm.target()[r]));
        for c in 0..dm.ncols() {
            rec.push(format!("{}", dm.x()[(r, c)]));
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a design matrix CSV written by [`write_design_csv`].
pub fn read_design_csv<R: Read>(reader: R) -> Result<DesignMatrix> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|s| s.to_string()).collect();
    if headers.len() < 4 || headers[0] != "year" || headers[1] != "week" || headers[2] != "target" {
        return Err(Error::ParseRow {
            row: 0,
            field: "header",
            message: "expected year,week,target,<predictors...>".into(),
        });
    }
    let names: Vec<String> = headers[3..].to_vec();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut target = Vec::new();
    let mut weeks = Vec::new();
    let mut has_weeks = true;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::ParseRow {
            row: i + 1,
            field: "record",
            message: e.to_string(),
        })?;
        let parse = |idx: usize, field: &'static str| -> Result<f64> {
            rec.get(idx)
                .unwrap_or("")
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::ParseRow {
                    row: i + 1,
                    field,
                    message: e.to_string(),
                })
        };
        if rec.get(0).unwrap_or("").trim().is_empty() {
            has_weeks = false;
        } else if has_weeks {
            let year = parse(0, "year")? as i32;
            let week = parse(1, "week")? as u32;
            let yw = YearWeek::new(year, week).ok_or(Error::ParseRow {
                row: i + 1,
                field: "week",
                message: format!("week {week} out of range"),
            })?;
            weeks.push(yw);
        }
        target.push(parse(2, "target")?);
        let mut row = Vec::with_capacity(names.len());
        for j in 0..names.len() {
            row.push(parse(3 + j, "predictor")?);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidSeries("design CSV has no rows".into()));
    }
    let mut x = Array2::zeros((rows.len(), names.len()));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            x[(i, j)] = v;
        }
    }
    let weeks = if has_weeks { weeks } else { Vec::new() };
    DesignMatrix::with_weeks(names, x, target, weeks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indices::compute_indices;
    use crate::series::WeeklyRecord;
    use approx::assert_relative_eq;

    fn demo_series(n: usize) -> (IndexSeries, WeeklySeries) {
        let mut year = 2011;
        let mut week = 1;
        let records: Vec<WeeklyRecord> = (0..n)
            .map(|t| {
                let rec = WeeklyRecord {
                    year,
                    week,
                    showings: 1000 + 13 * t as u64,
                    sold: 40 + (t as u64 % 7),
                    on_market: 15000 + 10 * t as u64,
                    median_dom: 40.0 + (t % 5) as f64,
                    mean_dom: 45.0,
                };
                week += 1;
                if week > 52 {
                    week = 1;
                    year += 1;
                }
                rec
            })
            .collect();
        let weekly = WeeklySeries::new(records).unwrap();
        let idx = compute_indices(&weekly).unwrap();
        (idx, weekly)
    }

    fn lag_spec(si: &[usize], hdi: &[usize], dom: bool, week: bool) -> LagSpec {
        LagSpec {
            target_name: "hdi_sqrt".into(),
            si_lags: si.to_vec(),
            hdi_lags: hdi.to_vec(),
            include_median_dom: dom,
            include_week_number: week,
        }
    }

    #[test]
    fn row_count_arithmetic() {
        let (idx, weekly) = demo_series(30);
        let dm = build_design_matrix(&idx, &weekly, &lag_spec(&[5], &[], false, false)).unwrap();
        assert_eq!(dm.nrows(), 25);
        assert_eq!(dm.ncols(), 1);
        assert_eq!(dm.column_names(), ["SI-L5"]);
    }

    #[test]
    fn full_spec_has_35_columns() {
        let (idx, weekly) = demo_series(60);
        let dm = build_design_matrix(&idx, &weekly, &LagSpec::full()).unwrap();
        assert_eq!(dm.ncols(), 35);
        assert_eq!(dm.nrows(), 40);
        assert_eq!(dm.column_names()[0], "SI-L0");
        assert_eq!(dm.column_names()[16], "SI-L20");
        assert_eq!(dm.column_names()[17], "median_dom");
        assert_eq!(dm.column_names()[18], "week");
        assert_eq!(dm.column_names()[19], "HDI-L5");
        assert_eq!(dm.column_names()[34], "HDI-L20");
    }

    #[test]
    fn lagged_cells_match_source() {
        let (idx, weekly) = demo_series(40);
        let spec = lag_spec(&[7, 0], &[5], true, true);
        let dm = build_design_matrix(&idx, &weekly, &spec).unwrap();
        let si = idx.si();
        let hdi = idx.hdi();
        let max_lag = 7;
        for (row, t) in (max_lag..40).enumerate() {
            assert_relative_eq!(dm.column("SI-L7").unwrap()[row], si[t - 7]);
            assert_relative_eq!(dm.column("SI-L0").unwrap()[row], si[t]);
            assert_relative_eq!(dm.column("HDI-L5").unwrap()[row], hdi[t - 5]);
            assert_relative_eq!(
                dm.column("median_dom").unwrap()[row],
                weekly.records()[t].median_dom
            );
            assert_relative_eq!(
                dm.column("week").unwrap()[row],
                f64::from(weekly.records()[t].week)
            );
            assert_relative_eq!(dm.target()[row], idx.hdi_sqrt()[t]);
        }
    }

    #[test]
    fn prepending_history_leaves_shared_rows_unchanged() {
        // The long series is the short one with 5 extra leading weeks; every
        // target week common to both must produce an identical matrix row.
        let spec = lag_spec(&[3, 8], &[2], false, false);
        let (idx_long, weekly_long) = demo_series(50);
        let short_records: Vec<WeeklyRecord> = weekly_long.records()[5..]
            .iter()
            .enumerate()
            .map(|(i, r)| WeeklyRecord {
                year: 2011 + (i / 52) as i32,
                week: (i % 52) as u32 + 1,
                ..r.clone()
            })
            .collect();
        let weekly_short = WeeklySeries::new(short_records).unwrap();
        let idx_short = compute_indices(&weekly_short).unwrap();

        let dm_long = build_design_matrix(&idx_long, &weekly_long, &spec).unwrap();
        let dm_short = build_design_matrix(&idx_short, &weekly_short, &spec).unwrap();
        assert_eq!(dm_long.nrows(), dm_short.nrows() + 5);
        for r in 0..dm_short.nrows() {
            assert_eq!(dm_short.target()[r], dm_long.target()[r + 5]);
            for c in 0..dm_short.ncols() {
                assert_eq!(dm_short.x()[(r, c)], dm_long.x()[(r + 5, c)]);
            }
        }
    }

    #[test]
    fn hdi_lag_zero_rejected() {
        let (idx, weekly) = demo_series(30);
        assert!(build_design_matrix(&idx, &weekly, &lag_spec(&[], &[0], false, false)).is_err());
    }

    #[test]
    fn empty_spec_rejected() {
        let (idx, weekly) = demo_series(30);
        assert!(build_design_matrix(&idx, &weekly, &lag_spec(&[], &[], false, false)).is_err());
    }

    #[test]
    fn fourier_shapes_and_full_cycle() {
        let (names, x) = fourier_terms(10, 2, 52.18).unwrap();
        assert_eq!(names, ["sin_1", "cos_1", "sin_2", "cos_2"]);
        assert_eq!(x.dim(), (10, 4));

        // At t = period (integer period), one full cycle: sin 0, cos 1.
        let period = 52.0;
        let (_, x) = fourier_terms(52, 1, period).unwrap();
        assert!(x[(51, 0)].abs() < 1e-9);
        assert_relative_eq!(x[(51, 1)], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn fourier_columns_nearly_orthogonal() {
        let (_, x) = fourier_terms(5218, 3, 52.18).unwrap();
        let n = x.nrows() as f64;
        for i in 0..x.ncols() {
            for j in (i + 1)..x.ncols() {
                let a = x.column(i);
                let b = x.column(j);
                let ma = a.sum() / n;
                let mb = b.sum() / n;
                let mut num = 0.0;
                let mut va = 0.0;
                let mut vb = 0.0;
                for t in 0..x.nrows() {
                    num += (a[t] - ma) * (b[t] - mb);
                    va += (a[t] - ma) * (a[t] - ma);
                    vb += (b[t] - mb) * (b[t] - mb);
                }
                let r = num / (va.sqrt() * vb.sqrt());
                assert!(r.abs() < 0.01, "columns {i},{j}: r = {r}");
            }
        }
    }

    #[test]
    fn fourier_order_guard() {
        assert!(fourier_terms(100, 27, 52.18).is_err());
        assert!(fourier_terms(100, 26, 52.18).is_ok());
    }

    #[test]
    fn design_csv_round_trip() {
        let (idx, weekly) = demo_series(30);
        let dm =
            build_design_matrix(&idx, &weekly, &lag_spec(&[0, 5], &[3], true, true)).unwrap();
        let mut buf = Vec::new();
        write_design_csv(&dm, &mut buf).unwrap();
        let back = read_design_csv(&buf[..]).unwrap();
        assert_eq!(back.column_names(), dm.column_names());
        assert_eq!(back.nrows(), dm.nrows());
        assert_eq!(back.row_weeks(), dm.row_weeks());
        for r in 0..dm.nrows() {
            assert_relative_eq!(back.target()[r], dm.target()[r], max_relative = 1e-12);
            for c in 0..dm.ncols() {
                assert_relative_eq!(back.x()[(r, c)], dm.x()[(r, c)], max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn select_and_subset() {
        let (idx, weekly) = demo_series(30);
        let dm =
            build_design_matrix(&idx, &weekly, &lag_spec(&[0, 5], &[3], true, false)).unwrap();
        let sel = dm.select_columns(&["median_dom", "SI-L5"]).unwrap();
        assert_eq!(sel.column_names(), ["median_dom", "SI-L5"]);
        assert_eq!(sel.nrows(), dm.nrows());
        assert!(dm.select_columns(&["nope"]).is_err());

        let sub = dm.subset_rows(&[0, 2, 4]).unwrap();
        assert_eq!(sub.nrows(), 3);
        assert_relative_eq!(sub.target()[1], dm.target()[2]);
        assert_eq!(sub.row_weeks()[1], dm.row_weeks()[2]);
    }
}
