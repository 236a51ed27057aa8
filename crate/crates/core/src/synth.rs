//! Seeded synthetic corpora with the qualitative structure of weekly
//! housing-demand data.
//!
//! The generator produces weekly counts whose showings carry a trend and an
//! annual cycle peaking in late summer, whose sales are a lagged conversion
//! of past showings (kernel peaked at a ten-week delay, so the lagged
//! showing index is genuinely predictive), and whose active inventory is a
//! bounded random walk. [`generate_events`] expands the same count processes
//! into dated listing/showing/sale/delisting events that aggregate back to
//! the emitted weekly series field-for-field; its days-on-market statistics
//! come from the constructed listing lifetimes rather than the weekly
//! formula. All output is a pure function of the parameters.

use std::collections::BTreeMap;

use chrono::Duration;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::io::Write;

use crate::error::{Error, Result};
use crate::ingest::{median_sorted, EventKind, PropertyClass, PropertyEvent};
use crate::series::{WeeklyRecord, WeeklySeries};
use crate::week::YearWeek;

/// Parameters of the synthetic market.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub seed: u64,
    pub n_weeks: usize,
    pub start_year: i32,
    pub start_week: u32,
    /// Expected weekly showings before trend, season, and noise.
    pub showings_base: f64,
    /// Linear drift per week, relative to the base.
    pub trend_slope: f64,
    /// Relative amplitude of the annual cycle, in [0, 1).
    pub seasonal_amplitude: f64,
    /// Week of year at which showings peak.
    pub peak_week: u32,
    /// Lag (weeks) → fraction of showings that convert to a sale that many
    /// weeks later. Non-negative, sums to at most 1.
    pub conversion_lags: BTreeMap<usize, f64>,
    /// Standard deviation of the multiplicative lognormal noise.
    pub noise_sd: f64,
    /// Center of the active-inventory random walk.
    pub on_market_base: f64,
}

/// Week-to-week persistence of the showings noise: buyer-interest shocks
/// decay over a couple of months rather than resetting, which is what makes
/// the lagged showing index genuinely predictive of later sales.
const SHOWINGS_NOISE_PERSISTENCE: f64 = 0.9;

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            seed: 1,
            n_weeks: 156,
            start_year: 2011,
            start_week: 15,
            showings_base: 12000.0,
            trend_slope: 0.002,
            seasonal_amplitude: 0.30,
            peak_week: 34,
            conversion_lags: default_conversion_lags(),
            noise_sd: 0.05,
            on_market_base: 16000.0,
        }
    }
}

/// Symmetric triangular conversion kernel peaking at a ten-week lag
/// (support 5..=15), scaled so roughly half a percent of showings convert —
/// the weekly sold/on-market ratio this implies matches observed magnitudes.
pub fn default_conversion_lags() -> BTreeMap<usize, f64> {
    let mut kernel = BTreeMap::new();
    let raw: Vec<(usize, f64)> = (5..=15)
        .map(|lag| (lag, 1.0 - (lag as f64 - 10.0).abs() / 6.0))
        .collect();
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    for (lag, w) in raw {
        kernel.insert(lag, 0.005 * w / total);
    }
    kernel
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_weeks == 0 {
            return Err(Error::InvalidArgument("n_weeks must be positive".into()));
        }
        if YearWeek::new(self.start_year, self.start_week).is_none() {
            return Err(Error::InvalidArgument(format!(
                "invalid start week {} of year {}",
                self.start_week, self.start_year
            )));
        }
        if !(self.showings_base > 0.0 && self.showings_base.is_finite()) {
            return Err(Error::InvalidArgument(
                "showings_base must be a positive count".into(),
            ));
        }
        if !(self.on_market_base >= 1.0 && self.on_market_base.is_finite()) {
            return Err(Error::InvalidArgument(
                "on_market_base must be at least 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.seasonal_amplitude) {
            return Err(Error::InvalidArgument(format!(
                "seasonal_amplitude must lie in [0, 1), got {}",
                self.seasonal_amplitude
            )));
        }
        if !(1..=52).contains(&self.peak_week) {
            return Err(Error::InvalidArgument(format!(
                "peak_week must lie in 1..=52, got {}",
                self.peak_week
            )));
        }
        if !(0.0..=0.5).contains(&self.noise_sd) {
            return Err(Error::InvalidArgument(format!(
                "noise_sd must lie in [0, 0.5], got {}",
                self.noise_sd
            )));
        }
        let mut total = 0.0;
        for (&lag, &w) in &self.conversion_lags {
            if lag > 52 {
                return Err(Error::InvalidArgument(format!(
                    "conversion lag {lag} exceeds a year"
                )));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "conversion weight at lag {lag} must be non-negative, got {w}"
                )));
            }
            total += w;
        }
        if total > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "conversion weights sum to {total}, more than 1"
            )));
        }
        // The linear trend factor must stay positive over the generated
        // range, including the pre-history that feeds the conversion lags.
        let max_lag = self.max_lag() as f64;
        let lo = 1.0 - self.trend_slope * max_lag;
        let hi = 1.0 + self.trend_slope * (self.n_weeks as f64 - 1.0);
        if !(lo > 0.0 && hi > 0.0 && self.trend_slope.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "trend_slope {} drives expected showings non-positive",
                self.trend_slope
            )));
        }
        Ok(())
    }

    fn max_lag(&self) -> usize {
        self.conversion_lags.keys().copied().max().unwrap_or(0)
    }

    /// Week of year for week offset `t` from the start (t may be negative).
    fn week_of_year(&self, t: i64) -> u32 {
        let shifted = (i64::from(self.start_week) - 1 + t).rem_euclid(52);
        (shifted + 1) as u32
    }

    fn seasonal_factor(&self, t: i64) -> f64 {
        let phase = (self.week_of_year(t) as f64 - self.peak_week as f64)
            * std::f64::consts::TAU
            / 52.0;
        1.0 + self.seasonal_amplitude * phase.cos()
    }

    fn trend_factor(&self, t: i64) -> f64 {
        1.0 + self.trend_slope * t as f64
    }
}

/// The component series behind a generated corpus, for inspection and
/// regression tests.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthTruth {
    pub params: SynthParams,
    /// Trend factor per output week.
    pub trend: Vec<f64>,
    /// Seasonal factor per output week.
    pub seasonal: Vec<f64>,
    /// Noise-free expected showings per output week.
    pub expected_showings: Vec<f64>,
    /// Conversion kernel applied to realized showings, before noise.
    pub expected_sold: Vec<f64>,
}

impl SynthTruth {
    pub fn to_json(&self) -> Value {
        json!({
            "params": self.params,
            "components": {
                "trend": self.trend,
                "seasonal": self.seasonal,
                "expected_showings": self.expected_showings,
                "expected_sold": self.expected_sold,
            },
        })
    }
}

/// Writes the ground-truth record as pretty JSON.
pub fn write_truth_json<W: Write>(truth: &SynthTruth, mut writer: W) -> Result<()> {
    let text = serde_json::to_string_pretty(&truth.to_json())
        .map_err(|e| Error::InvalidArgument(format!("cannot serialize truth record: {e}")))?;
    writer.write_all(text.as_bytes())?;
    writer.write_all(b"\n")?;
    Ok(())
}

/// Mean-one lognormal multiplier with the given log-scale deviation.
fn lognoise(rng: &mut ChaCha8Rng, sd: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    (sd * z - 0.5 * sd * sd).exp()
}

/// Internal count processes shared by the weekly and event generators.
struct CountProcesses {
    /// Realized showings for weeks -max_lag..n, index shifted by max_lag.
    showings: Vec<u64>,
    sold: Vec<u64>,
    on_market: Vec<u64>,
    truth: SynthTruth,
}

fn generate_counts(params: &SynthParams) -> Result<CountProcesses> {
    params.validate()?;
    let n = params.n_weeks;
    let max_lag = params.max_lag();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    // Showings, including the pre-history that feeds the conversion lags.
    // The log-noise is a stationary AR(1): shocks to buyer interest persist
    // for a few weeks, so recent showings carry real information about
    // upcoming sales beyond the deterministic components.
    let rho = SHOWINGS_NOISE_PERSISTENCE;
    let sd = params.noise_sd;
    let mut showings = Vec::with_capacity(max_lag + n);
    let mut trend = Vec::with_capacity(n);
    let mut seasonal = Vec::with_capacity(n);
    let mut expected_showings = Vec::with_capacity(n);
    let mut log_shock = 0.0;
    for t in -(max_lag as i64)..n as i64 {
        let z: f64 = StandardNormal.sample(&mut rng);
        log_shock = if t == -(max_lag as i64) {
            sd * z
        } else {
            rho * log_shock + (1.0 - rho * rho).sqrt() * sd * z
        };
        let tr = params.trend_factor(t);
        let se = params.seasonal_factor(t);
        let expected = params.showings_base * tr * se;
        let value = (expected * (log_shock - 0.5 * sd * sd).exp()).round();
        showings.push(value.max(0.0) as u64);
        if t >= 0 {
            trend.push(tr);
            seasonal.push(se);
            expected_showings.push(expected);
        }
    }

    // Sales: conversion kernel over realized past showings.
    let mut sold = Vec::with_capacity(n);
    let mut expected_sold = Vec::with_capacity(n);
    for t in 0..n {
        let mut expected = 0.0;
        for (&lag, &w) in &params.conversion_lags {
            expected += w * showings[t + max_lag - lag] as f64;
        }
        expected_sold.push(expected);
        sold.push((expected * lognoise(&mut rng, params.noise_sd)).round().max(0.0) as u64);
    }

    // Active inventory: a reflected random walk around the base. Steps are
    // clamped below so the event generator can always realize the path with
    // non-negative weekly listing arrivals.
    let churn = weekly_churn(params);
    let base = params.on_market_base;
    let lo = (0.7 * base).ceil().max(1.0);
    let hi = (1.3 * base).floor().max(lo);
    let mut on_market = Vec::with_capacity(n);
    let mut current = base.round().clamp(lo, hi);
    on_market.push(current as u64);
    for t in 0..n.saturating_sub(1) {
        let z: f64 = StandardNormal.sample(&mut rng);
        let mut next = current + (0.005 * base * z).round();
        if next > hi {
            next = hi - (next - hi);
        }
        if next < lo {
            next = lo + (lo - next);
        }
        let floor = current - (sold[t] + churn) as f64;
        next = next.max(floor).clamp(1.0, hi);
        on_market.push(next as u64);
        current = next;
    }
    for t in 0..n {
        sold[t] = sold[t].min(on_market[t]);
    }

    Ok(CountProcesses {
        showings,
        sold,
        on_market,
        truth: SynthTruth {
            params: params.clone(),
            trend,
            seasonal,
            expected_showings,
            expected_sold,
        },
    })
}

/// Target number of non-sale delistings per week (stale listings churning
/// off the market): one percent of the inventory base, at least one.
fn weekly_churn(params: &SynthParams) -> u64 {
    ((0.01 * params.on_market_base).round() as u64).max(1)
}

/// Generates the weekly series and its ground-truth components.
///
/// Days-on-market columns follow a mild counter-seasonal pattern (sales
/// close faster when demand peaks) around a sixty-day center.
pub fn generate_weekly(params: &SynthParams) -> Result<(WeeklySeries, SynthTruth)> {
    let counts = generate_counts(params)?;
    let n = params.n_weeks;
    let max_lag = params.max_lag();
    // Fresh stream for the DOM columns so the count processes match the
    // event generator draw-for-draw.
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(1));

    let mut records = Vec::with_capacity(n);
    let mut yw = YearWeek::new(params.start_year, params.start_week)
        .expect("validated start week");
    for t in 0..n {
        let counter_season = 1.0 - 0.25 * (params.seasonal_factor(t as i64) - 1.0)
            / params.seasonal_amplitude.max(1e-9);
        let median_raw = 60.0 * counter_season * lognoise(&mut rng, params.noise_sd);
        // Medians of integer day counts land on halves; means skew right.
        let median_dom = ((2.0 * median_raw).round() / 2.0).max(1.0);
        let mean_dom = median_dom * 1.12;
        records.push(WeeklyRecord {
            year: yw.year,
            week: yw.week,
            showings: counts.showings[max_lag + t],
            sold: counts.sold[t],
            on_market: counts.on_market[t],
            median_dom,
            mean_dom,
        });
        yw = yw.succ();
    }
    Ok((WeeklySeries::new(records)?, counts.truth))
}

/// Generates a dated event stream plus the weekly series it aggregates to.
///
/// The weekly counts equal [`generate_weekly`]'s for the same parameters;
/// the DOM statistics are computed from the constructed listing lifetimes,
/// exactly as aggregation computes them.
pub fn generate_events(params: &SynthParams) -> Result<(Vec<PropertyEvent>, WeeklySeries)> {
    let counts = generate_counts(params)?;
    let n = params.n_weeks;
    let max_lag = params.max_lag();
    let churn = weekly_churn(params);
    // Event-level choices use their own stream, keyed off the seed, so the
    // count processes stay identical to the weekly generator's.
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0x9E37_79B9_7F4A_7C15);

    let start = YearWeek::new(params.start_year, params.start_week).expect("validated");
    let mut week = start;
    let mut weeks = Vec::with_capacity(n);
    for _ in 0..n {
        weeks.push(week);
        week = week.succ();
    }

    let mut events = Vec::new();
    let mut next_id: u64 = 0;
    // Open listings as (listing date, id), kept in listing-date order.
    let mut pool: Vec<(chrono::NaiveDate, u64)> = Vec::new();
    let mut new_listing = |pool: &mut Vec<(chrono::NaiveDate, u64)>,
                           events: &mut Vec<PropertyEvent>,
                           date: chrono::NaiveDate| {
        let id = next_id;
        next_id += 1;
        pool.push((date, id));
        events.push(PropertyEvent {
            listing_id: format!("L{id:06}"),
            event_kind: EventKind::Listed,
            date,
            property_class: PropertyClass::Residential,
            days_on_market: None,
        });
    };

    let mut dom_stats = Vec::with_capacity(n);
    // Arrivals for week 0 are the whole initial inventory.
    let mut arrivals = counts.on_market[0];
    for t in 0..n {
        let week_start = weeks[t].start_date();
        let om = counts.on_market[t];
        let sold = counts.sold[t];
        let showings = counts.showings[max_lag + t];

        for _ in 0..arrivals {
            new_listing(&mut pool, &mut events, week_start);
        }
        debug_assert_eq!(pool.len() as u64, om);

        // Showings reference open listings, spread over the week.
        for i in 0..showings {
            let day = (i * 7 / showings.max(1)) as i64;
            let (_, id) = pool[((i as usize).wrapping_mul(7919)) % pool.len()];
            events.push(PropertyEvent {
                listing_id: format!("L{id:06}"),
                event_kind: EventKind::Showing,
                date: week_start + Duration::days(day),
                property_class: PropertyClass::Residential,
                days_on_market: None,
            });
        }

        // Sales midweek: each closes the open listing whose age is nearest
        // a lognormal target around sixty days.
        let sale_date = week_start + Duration::days(3);
        let mut doms = Vec::with_capacity(sold as usize);
        for _ in 0..sold {
            let z: f64 = StandardNormal.sample(&mut rng);
            let target_age = (60.0 * (0.4 * z).exp()).round().max(0.0) as i64;
            let target_date = sale_date - Duration::days(target_age);
            let idx = match pool.binary_search_by_key(&target_date, |&(d, _)| d) {
                Ok(i) => i,
                Err(i) => {
                    // Between neighbors: pick the closer listing date.
                    if i == 0 {
                        0
                    } else if i >= pool.len() {
                        pool.len() - 1
                    } else {
                        let before = (target_date - pool[i - 1].0).num_days().abs();
                        let after = (pool[i].0 - target_date).num_days().abs();
                        if before <= after {
                            i - 1
                        } else {
                            i
                        }
                    }
                }
            };
            let (listed, id) = pool.remove(idx);
            let dom = (sale_date - listed).num_days().max(0) as u32;
            doms.push(f64::from(dom));
            events.push(PropertyEvent {
                listing_id: format!("L{id:06}"),
                event_kind: EventKind::Sold,
                date: sale_date,
                property_class: PropertyClass::Residential,
                days_on_market: Some(dom),
            });
        }
        doms.sort_by(f64::total_cmp);
        dom_stats.push(if doms.is_empty() {
            (0.0, 0.0)
        } else {
            (
                median_sorted(&doms),
                doms.iter().sum::<f64>() / doms.len() as f64,
            )
        });

        // Non-sale churn on the week's last day: oldest listings leave. The
        // delist count absorbs any inventory drop the walk demands beyond
        // the sales, so next week's arrivals stay non-negative.
        let delist_date = weeks[t].end_date();
        let target = if t + 1 < n {
            let drop_needed =
                om as i64 - counts.on_market[t + 1] as i64 - sold as i64;
            (churn as i64).max(drop_needed)
        } else {
            churn as i64
        };
        let delists = target.max(0).min(pool.len() as i64) as usize;
        for _ in 0..delists {
            let (_, id) = pool.remove(0);
            events.push(PropertyEvent {
                listing_id: format!("L{id:06}"),
                event_kind: EventKind::Delisted,
                date: delist_date,
                property_class: PropertyClass::Residential,
                days_on_market: None,
            });
        }
        if t + 1 < n {
            arrivals = counts.on_market[t + 1] - pool.len() as u64;
        }
    }

    let mut records = Vec::with_capacity(n);
    for t in 0..n {
        records.push(WeeklyRecord {
            year: weeks[t].year,
            week: weeks[t].week,
            showings: counts.showings[max_lag + t],
            sold: counts.sold[t],
            on_market: counts.on_market[t],
            median_dom: dom_stats[t].0,
            mean_dom: dom_stats[t].1,
        });
    }
    Ok((events, WeeklySeries::new(records)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indices::compute_indices;
    use crate::ingest::{aggregate_weekly, write_events_csv};
    use crate::tsa::{cross_correlation, seasonal_decompose};
    use approx::assert_relative_eq;

    /// Small but structured market for event-level tests.
    fn small_params(seed: u64) -> SynthParams {
        let mut conversion_lags = BTreeMap::new();
        conversion_lags.insert(8, 0.03);
        conversion_lags.insert(10, 0.06);
        conversion_lags.insert(12, 0.03);
        SynthParams {
            seed,
            n_weeks: 30,
            showings_base: 80.0,
            on_market_base: 150.0,
            conversion_lags,
            ..SynthParams::default()
        }
    }

    #[test]
    fn degenerate_parameters_give_constant_showings() {
        let params = SynthParams {
            trend_slope: 0.0,
            seasonal_amplitude: 0.0,
            noise_sd: 0.0,
            n_weeks: 40,
            ..SynthParams::default()
        };
        let (weekly, truth) = generate_weekly(&params).unwrap();
        assert!(weekly
            .records()
            .iter()
            .all(|r| r.showings == params.showings_base.round() as u64));
        assert!(truth.trend.iter().all(|&v| v == 1.0));
        assert!(truth.seasonal.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn conversion_peak_shows_up_in_the_cross_correlation() {
        let mut hits = 0;
        for seed in 0..20 {
            let params = SynthParams {
                seed,
                ..SynthParams::default()
            };
            let (weekly, _) = generate_weekly(&params).unwrap();
            let xc = cross_correlation(&weekly.showings(), &weekly.sold(), 20).unwrap();
            let best = xc.argmax_lag();
            if (9..=11).contains(&best) {
                hits += 1;
            }
        }
        assert!(hits >= 18, "conversion lag recovered in only {hits}/20 seeds");
    }

    #[test]
    fn seasonal_peak_lands_near_the_configured_week() {
        let params = SynthParams::default();
        let (weekly, _) = generate_weekly(&params).unwrap();
        let decomp = seasonal_decompose(&weekly.showings(), 52, 2).unwrap();
        // Cycle positions are relative to the start week; map back to a
        // calendar week of year before checking.
        let peak = (params.start_week - 1 + decomp.peak_position() as u32 - 1) % 52 + 1;
        assert!((30..=38).contains(&peak), "seasonal peak at week {peak}");
    }

    #[test]
    fn demand_index_stays_in_a_realistic_band() {
        let (weekly, _) = generate_weekly(&SynthParams::default()).unwrap();
        let indices = compute_indices(&weekly).unwrap();
        for (i, hdi) in indices.hdi().iter().enumerate() {
            assert!(
                *hdi > 0.0 && *hdi < 0.2,
                "week {i}: demand index {hdi} out of band"
            );
        }
    }

    #[test]
    fn events_aggregate_back_to_the_emitted_weekly_series() {
        for seed in [3u64, 17, 40] {
            let (events, weekly) = generate_events(&small_params(seed)).unwrap();
            let aggregated = aggregate_weekly(&events).unwrap();
            assert_eq!(aggregated, weekly, "seed {seed}");
        }
    }

    #[test]
    fn event_stream_counts_match_the_weekly_series() {
        let (events, weekly) = generate_events(&small_params(9)).unwrap();
        let count = |kind: EventKind| events.iter().filter(|e| e.event_kind == kind).count() as u64;
        let showings: u64 = weekly.records().iter().map(|r| r.showings).sum();
        let sold: u64 = weekly.records().iter().map(|r| r.sold).sum();
        assert_eq!(count(EventKind::Showing), showings);
        assert_eq!(count(EventKind::Sold), sold);
        assert_eq!(
            events.len() as u64,
            count(EventKind::Showing)
                + count(EventKind::Sold)
                + count(EventKind::Listed)
                + count(EventKind::Delisted)
        );
        // Sold events carry their age; no other event does.
        assert!(events
            .iter()
            .all(|e| (e.event_kind == EventKind::Sold) == e.days_on_market.is_some()));
    }

    #[test]
    fn equal_seeds_are_byte_identical_and_seeds_differ() {
        let render = |seed: u64| -> (Vec<u8>, Vec<u8>) {
            let (events, weekly) = generate_events(&small_params(seed)).unwrap();
            let mut ev_buf = Vec::new();
            write_events_csv(&events, &mut ev_buf).unwrap();
            let mut wk_buf = Vec::new();
            weekly.write_csv(&mut wk_buf).unwrap();
            (ev_buf, wk_buf)
        };
        let (ev_a, wk_a) = render(5);
        let (ev_b, wk_b) = render(5);
        assert_eq!(ev_a, ev_b);
        assert_eq!(wk_a, wk_b);
        let (ev_c, _) = render(6);
        assert_ne!(ev_a, ev_c);
    }

    #[test]
    fn default_kernel_is_a_normalized_triangle_at_ten_weeks() {
        let kernel = default_conversion_lags();
        assert_eq!(kernel.keys().copied().min(), Some(5));
        assert_eq!(kernel.keys().copied().max(), Some(15));
        let peak = kernel
            .iter()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(&lag, _)| lag);
        assert_eq!(peak, Some(10));
        for lag in 5..=10usize {
            let low = kernel[&(lag - 1).max(5)];
            assert!(kernel[&lag] >= low);
            assert_relative_eq!(kernel[&lag], kernel[&(20 - lag)], max_relative = 1e-12);
        }
        assert_relative_eq!(kernel.values().sum::<f64>(), 0.005, max_relative = 1e-12);
    }

    #[test]
    fn sold_never_exceeds_inventory_even_with_heavy_conversion() {
        let mut conversion_lags = BTreeMap::new();
        conversion_lags.insert(5, 0.9);
        let params = SynthParams {
            seed: 2,
            n_weeks: 30,
            showings_base: 500.0,
            on_market_base: 40.0,
            conversion_lags,
            ..SynthParams::default()
        };
        let (weekly, _) = generate_weekly(&params).unwrap();
        for r in weekly.records() {
            assert!(r.sold <= r.on_market);
        }
        let (events, emitted) = generate_events(&params).unwrap();
        assert_eq!(aggregate_weekly(&events).unwrap(), emitted);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let bad = |f: &dyn Fn(&mut SynthParams)| {
            let mut p = SynthParams::default();
            f(&mut p);
            p.validate().is_err()
        };
        assert!(bad(&|p| p.n_weeks = 0));
        assert!(bad(&|p| p.showings_base = 0.0));
        assert!(bad(&|p| p.on_market_base = 0.0));
        assert!(bad(&|p| p.seasonal_amplitude = 1.0));
        assert!(bad(&|p| p.peak_week = 53));
        assert!(bad(&|p| p.noise_sd = 0.7));
        assert!(bad(&|p| p.start_week = 0));
        assert!(bad(&|p| {
            p.conversion_lags.insert(7, 0.9);
            p.conversion_lags.insert(9, 0.2);
        }));
        assert!(bad(&|p| {
            p.conversion_lags.insert(7, -0.1);
        }));
        assert!(bad(&|p| p.trend_slope = -0.1));
        assert!(SynthParams::default().validate().is_ok());
    }

    #[test]
    fn truth_json_carries_params_and_components() {
        let params = small_params(4);
        let (_, truth) = generate_weekly(&params).unwrap();
        let v = truth.to_json();
        assert_eq!(v["params"]["n_weeks"], 30);
        assert_eq!(
            v["components"]["trend"].as_array().unwrap().len(),
            params.n_weeks
        );
        let mut buf = Vec::new();
        write_truth_json(&truth, &mut buf).unwrap();
        let parsed: Value = serde_json::from_slice(&buf).unwrap();
        let back: SynthParams = serde_json::from_value(parsed["params"].clone()).unwrap();
        assert_eq!(back, params);
    }
}
