//! Fixed 52-week calendar.
//!
//! Every year is partitioned into exactly 52 weeks. Week `w` covers the
//! seven days starting at January 1 plus `7*(w-1)` days; the one or two
//! trailing days of the year (day 365, and 366 in leap years) fold into
//! week 52. This keeps the seasonal period at exactly 52 and is
//! deterministic and locale-free.

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

/// A (year, week) pair under the fixed 52-week calendar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct YearWeek {
    /// Calendar year.
    pub year: i32,
    /// Week number, 1..=52.
    pub week: u32,
}

impl YearWeek {
    /// Builds a year-week pair, validating the week range.
    pub fn new(year: i32, week: u32) -> Option<Self> {
        (1..=52).contains(&week).then_some(Self { year, week })
    }

    /// The week containing `date`.
    pub fn from_date(date: NaiveDate) -> Self {
        let week = (date.ordinal0() / 7).min(51) + 1;
        Self {
            year: date.year(),
            week,
        }
    }

    /// The week immediately after this one (52 rolls over to week 1).
    pub fn succ(self) -> Self {
        if self.week == 52 {
            Self {
                year: self.year + 1,
                week: 1,
            }
        } else {
            Self {
                year: self.year,
                week: self.week + 1,
            }
        }
    }

    /// Number of weeks from `base` to `self` (0 when equal, negative when earlier).
    pub fn index_from(self, base: YearWeek) -> i64 {
        i64::from(self.year - base.year) * 52 + i64::from(self.week) - i64::from(base.week)
    }

    /// First calendar day of this week.
    pub fn start_date(self) -> NaiveDate {
        let jan1 = NaiveDate::from_ymd_opt(self.year, 1, 1).expect("valid date");
        jan1 + chrono::Duration::days(i64::from(self.week - 1) * 7)
    }

    /// Last calendar day of this week (week 52 runs through December 31).
    pub fn end_date(self) -> NaiveDate {
        if self.week == 52 {
            NaiveDate::from_ymd_opt(self.year, 12, 31).expect("valid date")
        } else {
            self.start_date() + chrono::Duration::days(6)
        }
    }

    /// Number of days in this week (7, except 8 or 9 for week 52).
    pub fn num_days(self) -> i64 {
        (self.end_date() - self.start_date()).num_days() + 1
    }
}

impl std::fmt::Display for YearWeek {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} week {:02}", self.year, self.week)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jan_first_is_week_one() {
        let d = NaiveDate::from_ymd_opt(2011, 1, 1).unwrap();
        assert_eq!(YearWeek::from_date(d), YearWeek { year: 2011, week: 1 });
    }

    #[test]
    fn day_seven_starts_week_two() {
        let d = NaiveDate::from_ymd_opt(2011, 1, 8).unwrap();
        assert_eq!(YearWeek::from_date(d).week, 2);
        let d = NaiveDate::from_ymd_opt(2011, 1, 7).unwrap();
        assert_eq!(YearWeek::from_date(d).week, 1);
    }

    #[test]
    fn trailing_days_fold_into_week_52() {
        // 2011 has 365 days: day 365 would start "week 53".
        let d = NaiveDate::from_ymd_opt(2011, 12, 31).unwrap();
        assert_eq!(YearWeek::from_date(d).week, 52);
        // leap year: both trailing days fold.
        let d = NaiveDate::from_ymd_opt(2012, 12, 31).unwrap();
        assert_eq!(YearWeek::from_date(d).week, 52);
        assert_eq!(YearWeek::new(2012, 52).unwrap().num_days(), 9);
        assert_eq!(YearWeek::new(2011, 52).unwrap().num_days(), 8);
        assert_eq!(YearWeek::new(2011, 13).unwrap().num_days(), 7);
    }

    #[test]
    fn rollover_and_index() {
        let w52 = YearWeek { year: 2011, week: 52 };
        let w1 = w52.succ();
        assert_eq!(w1, YearWeek { year: 2012, week: 1 });
        assert_eq!(w1.index_from(w52), 1);
        assert_eq!(w52.index_from(w1), -1);
        let base = YearWeek { year: 2011, week: 1 };
        assert_eq!(YearWeek { year: 2013, week: 5 }.index_from(base), 2 * 52 + 4);
    }

    #[test]
    fn every_day_maps_into_its_week_range() {
        let mut d = NaiveDate::from_ymd_opt(2012, 1, 1).unwrap();
        let end = NaiveDate::from_ymd_opt(2012, 12, 31).unwrap();
        while d <= end {
            let yw = YearWeek::from_date(d);
            assert!(yw.start_date() <= d && d <= yw.end_date(), "{d} not in {yw}");
            d += chrono::Duration::days(1);
        }
    }
}
