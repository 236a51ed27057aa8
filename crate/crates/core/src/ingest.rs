//! Raw property-event ingestion: parse, filter, aggregate to weekly series.
//!
//! The event CSV schema is `listing_id,event_kind,date,property_class,days_on_market`
//! with ISO dates and `days_on_market` present exactly on sold events.

use std::collections::HashMap;
use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{WeeklyRecord, WeeklySeries};
use crate::week::YearWeek;

/// Kind of a raw property event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// A scheduled home showing.
    Showing,
    /// A property inspection appointment.
    Inspection,
    /// An open-house appointment.
    OpenHouse,
    /// Listing entered the market.
    Listed,
    /// Listing withdrawn from the market.
    Delisted,
    /// Listing sold.
    Sold,
    /// Anything else the scheduling system recorded.
    Other,
}

impl EventKind {
    fn parse(s: &str) -> Self {
        match s {
            "showing" => Self::Showing,
            "inspection" => Self::Inspection,
            "open_house" => Self::OpenHouse,
            "listed" => Self::Listed,
            "delisted" => Self::Delisted,
            "sold" => Self::Sold,
            _ => Self::Other,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Self::Showing => "showing",
            Self::Inspection => "inspection",
            Self::OpenHouse => "open_house",
            Self::Listed => "listed",
            Self::Delisted => "delisted",
            Self::Sold => "sold",
            Self::Other => "other",
        }
    }

    // Canonical same-day ordering: listing openings before closings so a
    // same-day list-and-sell forms a one-day interval.
    fn rank(self) -> u8 {
        match self {
            Self::Listed => 0,
            Self::Showing => 1,
            Self::Inspection => 2,
            Self::OpenHouse => 3,
            Self::Sold => 4,
            Self::Delisted => 5,
            Self::Other => 6,
        }
    }
}

/// Market segment of the listed property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyClass {
    /// Single residential unit.
    Residential,
    /// Rental property.
    Rental,
    /// Retail property.
    Retail,
    /// Bundled units sold together.
    Bundle,
}

impl PropertyClass {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "residential" => Some(Self::Residential),
            "rental" => Some(Self::Rental),
            "retail" => Some(Self::Retail),
            "bundle" => Some(Self::Bundle),
            _ => None,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Self::Residential => "residential",
            Self::Rental => "rental",
            Self::Retail => "retail",
            Self::Bundle => "bundle",
        }
    }
}

/// One raw scheduling-system record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyEvent {
    /// Opaque listing identifier.
    pub listing_id: String,
    /// What happened.
    pub event_kind: EventKind,
    /// When it happened.
    pub date: NaiveDate,
    /// Market segment of the listing.
    pub property_class: PropertyClass,
    /// Days between listing and sale; present exactly on sold events.
    pub days_on_market: Option<u32>,
}

const EVENT_HEADER: [&str; 5] = [
    "listing_id",
    "event_kind",
    "date",
    "property_class",
    "days_on_market",
];

/// Parses the event CSV, preserving input order.
///
/// Unknown event kinds map to [`EventKind::Other`]; any other malformed
/// field is an error carrying the 1-based data row number.
pub fn parse_events<R: Read>(reader: R) -> Result<Vec<PropertyEvent>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    {
        let headers = rdr.headers()?;
        let got: Vec<&str> = headers.iter().map(str::trim).collect();
        if got != EVENT_HEADER {
            return Err(Error::ParseRow {
                row: 0,
                field: "header",
                message: format!("expected {:?}, got {:?}", EVENT_HEADER.join(","), got.join(",")),
            });
        }
    }

    let mut events = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| Error::ParseRow {
            row: row_no,
            field: "record",
            message: e.to_string(),
        })?;
        events.push(parse_row(&row, row_no)?);
    }
    Ok(events)
}

fn parse_row(row: &csv::StringRecord, row_no: usize) -> Result<PropertyEvent> {
    let field = |idx: usize| row.get(idx).unwrap_or("").trim();

    let listing_id = field(0);
    if listing_id.is_empty() {
        return Err(Error::ParseRow {
            row: row_no,
            field: "listing_id",
            message: "empty".into(),
        });
    }

    let event_kind = EventKind::parse(field(1));

    let date = NaiveDate::parse_from_str(field(2), "%Y-%m-%d").map_err(|e| Error::ParseRow {
        row: row_no,
        field: "date",
        message: format!("'{}': {e}", field(2)),
    })?;

    let property_class = PropertyClass::parse(field(3)).ok_or_else(|| Error::ParseRow {
        row: row_no,
        field: "property_class",
        message: format!("unknown class '{}'", field(3)),
    })?;

    let dom_raw = field(4);
    let days_on_market = if dom_raw.is_empty() {
        None
    } else {
        Some(dom_raw.parse::<u32>().map_err(|e| Error::ParseRow {
            row: row_no,
            field: "days_on_market",
            message: format!("'{dom_raw}': {e}"),
        })?)
    };

    // days_on_market present iff sold.
    match (event_kind, days_on_market) {
        (EventKind::Sold, None) => {
            return Err(Error::ParseRow {
                row: row_no,
                field: "days_on_market",
                message: "missing on sold event".into(),
            })
        }
        (k, Some(_)) if k != EventKind::Sold => {
            return Err(Error::ParseRow {
                row: row_no,
                field: "days_on_market",
                message: format!("present on {} event", k.as_str()),
            })
        }
        _ => {}
    }

    Ok(PropertyEvent {
        listing_id: listing_id.to_string(),
        event_kind,
        date,
        property_class,
        days_on_market,
    })
}

/// Writes events in the event CSV schema.
pub fn write_events_csv<W: Write>(events: &[PropertyEvent], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(EVENT_HEADER)?;
    for e in events {
        out.write_record([
            e.listing_id.as_str(),
            e.event_kind.as_str(),
            &e.date.format("%Y-%m-%d").to_string(),
            e.property_class.as_str(),
            &e.days_on_market.map(|d| d.to_string()).unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Keeps residential showings, listings, delistings, and sales.
///
/// Inspections, open houses, and `other` events are dropped so the showing
/// counts measure home showings only; rental, retail, and bundled
/// properties are excluded entirely.
pub fn filter_events(events: Vec<PropertyEvent>) -> Vec<PropertyEvent> {
    events
        .into_iter()
        .filter(|e| {
            e.property_class == PropertyClass::Residential
                && matches!(
                    e.event_kind,
                    EventKind::Showing | EventKind::Listed | EventKind::Delisted | EventKind::Sold
                )
        })
        .collect()
}

/// Aggregates filtered events into a gap-free weekly series.
///
/// Per week: `showings` and `sold` are event counts, `on_market` counts
/// listing intervals (listed to the first sold/delisted after it) that
/// overlap the week, and the DOM stats summarize that week's sold events.
/// A listing sold and later relisted contributes one interval per stint.
/// Weeks with no events of some kind are still emitted. The result is
/// independent of input order.
pub fn aggregate_weekly(events: &[PropertyEvent]) -> Result<WeeklySeries> {
    if events.is_empty() {
        return Err(Error::InvalidSeries("no events to aggregate".into()));
    }

    let base = YearWeek::from_date(events.iter().map(|e| e.date).min().expect("non-empty"));
    let last = YearWeek::from_date(events.iter().map(|e| e.date).max().expect("non-empty"));
    let n = usize::try_from(last.index_from(base) + 1).expect("last >= base");

    let week_idx = |date: NaiveDate| -> usize {
        usize::try_from(YearWeek::from_date(date).index_from(base)).expect("date >= base")
    };

    let mut showings = vec![0u64; n];
    let mut doms: Vec<Vec<f64>> = vec![Vec::new(); n];
    for e in events {
        match e.event_kind {
            EventKind::Showing => showings[week_idx(e.date)] += 1,
            EventKind::Sold => {
                let dom = e.days_on_market.ok_or_else(|| Error::InvalidSeries(format!(
                    "sold event for listing {} on {} lacks days_on_market",
                    e.listing_id, e.date
                )))?;
                doms[week_idx(e.date)].push(f64::from(dom));
            }
            _ => {}
        }
    }

    // Rebuild listing intervals from listed/sold/delisted events, processed
    // in canonical (date, kind) order so the result is permutation-invariant.
    let mut per_listing: HashMap<&str, Vec<&PropertyEvent>> = HashMap::new();
    for e in events {
        if matches!(
            e.event_kind,
            EventKind::Listed | EventKind::Sold | EventKind::Delisted
        ) {
            per_listing.entry(&e.listing_id).or_default().push(e);
        }
    }

    let mut on_market = vec![0u64; n];
    let corpus_end = last.end_date();
    for evs in per_listing.values_mut() {
        evs.sort_by_key(|e| (e.date, e.event_kind.rank()));
        let mut open: Option<NaiveDate> = None;
        let mut mark = |start: NaiveDate, end: NaiveDate| {
            for w in week_idx(start)..=week_idx(end) {
                on_market[w] += 1;
            }
        };
        for e in evs.iter() {
            match e.event_kind {
                EventKind::Listed => {
                    if open.is_none() {
                        open = Some(e.date);
                    }
                }
                EventKind::Sold => match open.take() {
                    Some(start) => mark(start, e.date),
                    // Sold with no recorded listing start: count the sale week.
                    None => mark(e.date, e.date),
                },
                EventKind::Delisted => {
                    if let Some(start) = open.take() {
                        mark(start, e.date);
                    }
                }
                _ => {}
            }
        }
        if let Some(start) = open {
            mark(start, corpus_end);
        }
    }

    let mut records = Vec::with_capacity(n);
    let mut yw = base;
    for w in 0..n {
        let dom_week = &mut doms[w];
        dom_week.sort_by(f64::total_cmp);
        let sold = dom_week.len() as u64;
        let (median_dom, mean_dom) = if dom_week.is_empty() {
            (0.0, 0.0)
        } else {
            (median_sorted(dom_week), dom_week.iter().sum::<f64>() / dom_week.len() as f64)
        };
        records.push(WeeklyRecord {
            year: yw.year,
            week: yw.week,
            showings: showings[w],
            sold,
            on_market: on_market[w],
            median_dom,
            mean_dom,
        });
        yw = yw.succ();
    }

    WeeklySeries::new(records)
}

pub(crate) fn median_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn ev(id: &str, kind: EventKind, date: &str, dom: Option<u32>) -> PropertyEvent {
        PropertyEvent {
            listing_id: id.into(),
            event_kind: kind,
            date: d(date),
            property_class: PropertyClass::Residential,
            days_on_market: dom,
        }
    }

    #[test]
    fn parses_single_row() {
        let csv = "listing_id,event_kind,date,property_class,days_on_market\n\
                   L1,showing,2011-01-12,residential,\n";
        let events = parse_events(csv.as_bytes()).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].listing_id, "L1");
        assert_eq!(events[0].event_kind, EventKind::Showing);
        assert_eq!(events[0].date, d("2011-01-12"));
        assert_eq!(events[0].property_class, PropertyClass::Residential);
        assert_eq!(events[0].days_on_market, None);
    }

    #[test]
    fn invalid_date_errors_with_row() {
        let csv = "listing_id,event_kind,date,property_class,days_on_market\n\
                   L1,showing,2011-01-12,residential,\n\
                   L2,showing,2011-13-40,residential,\n";
        match parse_events(csv.as_bytes()).unwrap_err() {
            Error::ParseRow { row, field, .. } => {
                assert_eq!(row, 2);
                assert_eq!(field, "date");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn out_of_order_rows_preserved() {
        let csv = "listing_id,event_kind,date,property_class,days_on_market\n\
                   L1,showing,2011-03-01,residential,\n\
                   L2,showing,2011-01-05,residential,\n";
        let events = parse_events(csv.as_bytes()).unwrap();
        assert_eq!(events[0].date, d("2011-03-01"));
        assert_eq!(events[1].date, d("2011-01-05"));
    }

    #[test]
    fn unknown_kind_maps_to_other() {
        let csv = "listing_id,event_kind,date,property_class,days_on_market\n\
                   L1,walkthrough,2011-01-12,residential,\n";
        let events = parse_events(csv.as_bytes()).unwrap();
        assert_eq!(events[0].event_kind, EventKind::Other);
    }

    #[test]
    fn dom_must_match_sold() {
        let missing = "listing_id,event_kind,date,property_class,days_on_market\n\
                       L1,sold,2011-01-12,residential,\n";
        assert!(matches!(
            parse_events(missing.as_bytes()).unwrap_err(),
            Error::ParseRow { row: 1, field: "days_on_market", .. }
        ));
        let stray = "listing_id,event_kind,date,property_class,days_on_market\n\
                     L1,showing,2011-01-12,residential,9\n";
        assert!(matches!(
            parse_events(stray.as_bytes()).unwrap_err(),
            Error::ParseRow { row: 1, field: "days_on_market", .. }
        ));
    }

    #[test]
    fn filter_keeps_residential_market_events() {
        let mut rental = ev("L2", EventKind::Showing, "2011-01-12", None);
        rental.property_class = PropertyClass::Rental;
        let events = vec![
            ev("L1", EventKind::Showing, "2011-01-12", None),
            rental,
            ev("L3", EventKind::OpenHouse, "2011-01-12", None),
            ev("L4", EventKind::Inspection, "2011-01-12", None),
            ev("L5", EventKind::Sold, "2011-01-12", Some(10)),
        ];
        let kept = filter_events(events);
        let ids: Vec<_> = kept.iter().map(|e| e.listing_id.as_str()).collect();
        assert_eq!(ids, ["L1", "L5"]);
    }

    #[test]
    fn single_listing_lifecycle() {
        // Listed week 1, shown twice week 2, sold week 3 with dom 14.
        let events = vec![
            ev("L1", EventKind::Listed, "2011-01-03", None),
            ev("L1", EventKind::Showing, "2011-01-10", None),
            ev("L1", EventKind::Showing, "2011-01-11", None),
            ev("L1", EventKind::Sold, "2011-01-17", Some(14)),
        ];
        let series = aggregate_weekly(&events).unwrap();
        let recs = series.records();
        assert_eq!(recs.len(), 3);
        let triple = |r: &WeeklyRecord| (r.showings, r.sold, r.on_market, r.median_dom, r.mean_dom);
        assert_eq!(triple(&recs[0]), (0, 0, 1, 0.0, 0.0));
        assert_eq!(triple(&recs[1]), (2, 0, 1, 0.0, 0.0));
        assert_eq!(triple(&recs[2]), (0, 1, 1, 14.0, 14.0));
    }

    #[test]
    fn aggregation_is_permutation_invariant() {
        let mut events = vec![
            ev("L1", EventKind::Listed, "2011-01-03", None),
            ev("L1", EventKind::Sold, "2011-02-01", Some(29)),
            ev("L2", EventKind::Listed, "2011-01-05", None),
            ev("L2", EventKind::Delisted, "2011-01-20", None),
            ev("L3", EventKind::Listed, "2011-01-03", None),
            ev("L1", EventKind::Showing, "2011-01-12", None),
            ev("L3", EventKind::Showing, "2011-01-12", None),
        ];
        let forward = aggregate_weekly(&events).unwrap();
        events.reverse();
        let reversed = aggregate_weekly(&events).unwrap();
        assert_eq!(forward, reversed);
        // Rotate for a non-trivial permutation.
        events.rotate_left(3);
        assert_eq!(forward, aggregate_weekly(&events).unwrap());
    }

    #[test]
    fn showings_total_preserved_and_on_market_untouched_by_showings() {
        let base = vec![
            ev("L1", EventKind::Listed, "2011-01-03", None),
            ev("L1", EventKind::Sold, "2011-01-25", Some(22)),
        ];
        let without = aggregate_weekly(&base).unwrap();
        let mut with = base.clone();
        with.push(ev("L1", EventKind::Showing, "2011-01-12", None));
        with.push(ev("L1", EventKind::Showing, "2011-01-13", None));
        let with = aggregate_weekly(&with).unwrap();

        let total: u64 = with.records().iter().map(|r| r.showings).sum();
        assert_eq!(total, 2);
        for (a, b) in without.records().iter().zip(with.records()) {
            assert_eq!(a.on_market, b.on_market);
            assert_eq!(a.sold, b.sold);
        }
    }

    #[test]
    fn relisting_counts_two_intervals() {
        let events = vec![
            ev("L1", EventKind::Listed, "2011-01-03", None),
            ev("L1", EventKind::Sold, "2011-01-10", Some(7)),
            ev("L1", EventKind::Listed, "2011-02-07", None),
            ev("L1", EventKind::Delisted, "2011-02-21", None),
        ];
        let series = aggregate_weekly(&events).unwrap();
        let on_market: Vec<u64> = series.records().iter().map(|r| r.on_market).collect();
        // Weeks 1-2 active (first stint), weeks 3-5 vacant, weeks 6-8 active.
        assert_eq!(on_market, vec![1, 1, 0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn open_interval_runs_to_corpus_end() {
        let events = vec![
            ev("L1", EventKind::Listed, "2011-01-03", None),
            ev("L2", EventKind::Showing, "2011-01-26", None),
        ];
        let series = aggregate_weekly(&events).unwrap();
        assert!(series.records().iter().all(|r| r.on_market == 1));
        assert_eq!(series.len(), 4);
    }

    #[test]
    fn empty_weeks_still_emitted() {
        let events = vec![
            ev("L1", EventKind::Showing, "2011-01-03", None),
            ev("L2", EventKind::Showing, "2011-02-15", None),
        ];
        let series = aggregate_weekly(&events).unwrap();
        assert_eq!(series.len(), 7);
        assert_eq!(series.records()[3].showings, 0);
    }

    #[test]
    fn events_csv_round_trip() {
        let events = vec![
            ev("L1", EventKind::Listed, "2011-01-03", None),
            ev("L1", EventKind::Sold, "2011-01-17", Some(14)),
        ];
        let mut buf = Vec::new();
        write_events_csv(&events, &mut buf).unwrap();
        let back = parse_events(&buf[..]).unwrap();
        assert_eq!(back, events);
    }
}
