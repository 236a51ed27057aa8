//! Data-shaping commands: corpus synthesis, event aggregation, index
//! construction, and the exploratory decomposition, cross-correlation,
//! and design-matrix steps.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use demandcast_core::indices::{compute_indices, write_index_csv};
use demandcast_core::ingest::{aggregate_weekly, filter_events, parse_events, write_events_csv};
use demandcast_core::synth::{self, SynthParams};
use demandcast_core::tsa::{
    build_design_matrix, cross_correlation, seasonal_decompose, write_decomposition_csv,
    write_design_csv, write_xcorr_csv, LagSpec,
};
use demandcast_core::WeeklySeries;

use crate::support::{
    atomic_write, echo_config, load_config, parse_lag_list, read_file, require, resolve_column,
    usage, CResult,
};

use super::Ctx;

fn read_weekly(path: &Path) -> CResult<WeeklySeries> {
    let bytes = read_file(path)?;
    Ok(WeeklySeries::read_csv(&bytes[..])?)
}

#[derive(Args)]
pub struct SynthCmd {
    /// Output directory for events.csv, weekly.csv, and truth.json.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Generator seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of weeks to generate.
    #[arg(long, value_name = "N")]
    n_weeks: Option<usize>,
    /// Calendar year of the first week.
    #[arg(long)]
    start_year: Option<i32>,
    /// Week of year (1-52) the series starts on.
    #[arg(long)]
    start_week: Option<u32>,
    /// Expected weekly showings at the start of the series.
    #[arg(long)]
    showings_base: Option<f64>,
    /// Weekly linear growth in expected showings, as a fraction of base.
    #[arg(long)]
    trend_slope: Option<f64>,
    /// Peak-to-mean seasonal swing in [0, 1).
    #[arg(long)]
    seasonal_amplitude: Option<f64>,
    /// Week of year where the seasonal cycle peaks.
    #[arg(long)]
    peak_week: Option<u32>,
    /// Log-scale noise level for the weekly counts.
    #[arg(long)]
    noise_sd: Option<f64>,
    /// Mean on-market inventory level.
    #[arg(long)]
    on_market_base: Option<f64>,
}

#[derive(Serialize, Deserialize, Clone, Default)]
#[serde(default)]
pub(crate) struct SynthConfig {
    out: Option<PathBuf>,
    #[serde(flatten)]
    generator: SynthParams,
}

pub fn run_synth(ctx: &Ctx, cmd: SynthCmd) -> CResult<()> {
    let mut cfg: SynthConfig = load_config(ctx.config.as_deref())?;
    if let Some(v) = cmd.out {
        cfg.out = Some(v);
    }
    let g = &mut cfg.generator;
    if let Some(v) = cmd.seed {
        g.seed = v;
    }
    if let Some(v) = cmd.n_weeks {
        g.n_weeks = v;
    }
    if let Some(v) = cmd.start_year {
        g.start_year = v;
    }
    if let Some(v) = cmd.start_week {
        g.start_week = v;
    }
    if let Some(v) = cmd.showings_base {
        g.showings_base = v;
    }
    if let Some(v) = cmd.trend_slope {
        g.trend_slope = v;
    }
    if let Some(v) = cmd.seasonal_amplitude {
        g.seasonal_amplitude = v;
    }
    if let Some(v) = cmd.peak_week {
        g.peak_week = v;
    }
    if let Some(v) = cmd.noise_sd {
        g.noise_sd = v;
    }
    if let Some(v) = cmd.on_market_base {
        g.on_market_base = v;
    }
    let out = require(cfg.out.clone(), "--out")?;
    cfg.generator.validate().map_err(|e| usage(e.to_string()))?;

    let (events, weekly) = synth::generate_events(&cfg.generator)?;
    let (_, truth) = synth::generate_weekly(&cfg.generator)?;

    let mut buf = Vec::new();
    write_events_csv(&events, &mut buf)?;
    atomic_write(&out.join("events.csv"), &buf)?;

    let mut buf = Vec::new();
    weekly.write_csv(&mut buf)?;
    atomic_write(&out.join("weekly.csv"), &buf)?;

    let mut buf = Vec::new();
    synth::write_truth_json(&truth, &mut buf)?;
    atomic_write(&out.join("truth.json"), &buf)?;

    echo_config(&out, "synth", ctx.threads, &cfg)
}

#[derive(Args)]
pub struct AggregateCmd {
    /// Property-event CSV to aggregate.
    #[arg(long, value_name = "FILE")]
    events: Option<PathBuf>,
    /// Destination weekly CSV.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Clone, Default)]
#[serde(default)]
pub(crate) struct AggregateConfig {
    events: Option<PathBuf>,
    out: Option<PathBuf>,
}

pub fn run_aggregate(ctx: &Ctx, cmd: AggregateCmd) -> CResult<()> {
    let mut cfg: AggregateConfig = load_config(ctx.config.as_deref())?;
    if let Some(v) = cmd.events {
        cfg.events = Some(v);
    }
    if let Some(v) = cmd.out {
        cfg.out = Some(v);
    }
    let events_path = require(cfg.events.clone(), "--events")?;
    let out = require(cfg.out.clone(), "--out")?;

    let bytes = read_file(&events_path)?;
    let events = filter_events(parse_events(&bytes[..])?);
    let weekly = aggregate_weekly(&events)?;

    let mut buf = Vec::new();
    weekly.write_csv(&mut buf)?;
    atomic_write(&out, &buf)?;
    echo_config(&out, "aggregate", ctx.threads, &cfg)
}

#[derive(Args)]
pub struct IndicesCmd {
    /// Weekly market CSV.
    #[arg(long, value_name = "FILE")]
    weekly: Option<PathBuf>,
    /// Destination index CSV.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Clone, Default)]
#[serde(default)]
pub(crate) struct IndicesConfig {
    weekly: Option<PathBuf>,
    out: Option<PathBuf>,
}

pub fn run_indices(ctx: &Ctx, cmd: IndicesCmd) -> CResult<()> {
    let mut cfg: IndicesConfig = load_config(ctx.config.as_deref())?;
    if let Some(v) = cmd.weekly {
        cfg.weekly = Some(v);
    }
    if let Some(v) = cmd.out {
        cfg.out = Some(v);
    }
    let weekly_path = require(cfg.weekly.clone(), "--weekly")?;
    let out = require(cfg.out.clone(), "--out")?;

    let weekly = read_weekly(&weekly_path)?;
    let idx = compute_indices(&weekly)?;

    let mut buf = Vec::new();
    write_index_csv(&idx, &mut buf)?;
    atomic_write(&out, &buf)?;
    echo_config(&out, "indices", ctx.threads, &cfg)
}

#[derive(Args)]
pub struct DecomposeCmd {
    /// Weekly market CSV.
    #[arg(long, value_name = "FILE")]
    weekly: Option<PathBuf>,
    /// Column to decompose (showings, sold, on_market, median_dom, hdi, si, hdi_sqrt).
    #[arg(long)]
    column: Option<String>,
    /// Season length in weeks.
    #[arg(long)]
    period: Option<usize>,
    /// Trend/seasonal refinement passes.
    #[arg(long)]
    iterations: Option<usize>,
    /// Destination decomposition CSV.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(default)]
pub(crate) struct DecomposeConfig {
    weekly: Option<PathBuf>,
    column: String,
    period: usize,
    iterations: usize,
    out: Option<PathBuf>,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        DecomposeConfig {
            weekly: None,
            column: "showings".into(),
            period: 52,
            iterations: 2,
            out: None,
        }
    }
}

pub fn run_decompose(ctx: &Ctx, cmd: DecomposeCmd) -> CResult<()> {
    let mut cfg: DecomposeConfig = load_config(ctx.config.as_deref())?;
    if let Some(v) = cmd.weekly {
        cfg.weekly = Some(v);
    }
    if let Some(v) = cmd.column {
        cfg.column = v;
    }
    if let Some(v) = cmd.period {
        cfg.period = v;
    }
    if let Some(v) = cmd.iterations {
        cfg.iterations = v;
    }
    if let Some(v) = cmd.out {
        cfg.out = Some(v);
    }
    let weekly_path = require(cfg.weekly.clone(), "--weekly")?;
    let out = require(cfg.out.clone(), "--out")?;

    let weekly = read_weekly(&weekly_path)?;
    let series = resolve_column(&weekly, &cfg.column)?;
    let dec = seasonal_decompose(&series, cfg.period, cfg.iterations)?;

    let mut buf = Vec::new();
    write_decomposition_csv(&series, &dec, &mut buf)?;
    atomic_write(&out, &buf)?;
    echo_config(&out, "decompose", ctx.threads, &cfg)
}

#[derive(Args)]
pub struct XcorrCmd {
    /// Weekly market CSV.
    #[arg(long, value_name = "FILE")]
    weekly: Option<PathBuf>,
    /// Leading column (correlated at positive lags).
    #[arg(long)]
    a: Option<String>,
    /// Trailing column.
    #[arg(long)]
    b: Option<String>,
    /// Largest lag to scan, in weeks.
    #[arg(long)]
    max_lag: Option<usize>,
    /// Destination correlation CSV.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(default)]
pub(crate) struct XcorrConfig {
    weekly: Option<PathBuf>,
    a: String,
    b: String,
    max_lag: usize,
    out: Option<PathBuf>,
}

impl Default for XcorrConfig {
    fn default() -> Self {
        XcorrConfig {
            weekly: None,
            a: "si".into(),
            b: "hdi".into(),
            max_lag: 20,
            out: None,
        }
    }
}

pub fn run_xcorr(ctx: &Ctx, cmd: XcorrCmd) -> CResult<()> {
    let mut cfg: XcorrConfig = load_config(ctx.config.as_deref())?;
    if let Some(v) = cmd.weekly {
        cfg.weekly = Some(v);
    }
    if let Some(v) = cmd.a {
        cfg.a = v;
    }
    if let Some(v) = cmd.b {
        cfg.b = v;
    }
    if let Some(v) = cmd.max_lag {
        cfg.max_lag = v;
    }
    if let Some(v) = cmd.out {
        cfg.out = Some(v);
    }
    let weekly_path = require(cfg.weekly.clone(), "--weekly")?;
    let out = require(cfg.out.clone(), "--out")?;

    let weekly = read_weekly(&weekly_path)?;
    let a = resolve_column(&weekly, &cfg.a)?;
    let b = resolve_column(&weekly, &cfg.b)?;
    let xc = cross_correlation(&a, &b, cfg.max_lag)?;

    let mut buf = Vec::new();
    write_xcorr_csv(&xc, &mut buf)?;
    atomic_write(&out, &buf)?;
    echo_config(&out, "xcorr", ctx.threads, &cfg)
}

#[derive(Args)]
pub struct DesignCmd {
    /// Weekly market CSV.
    #[arg(long, value_name = "FILE")]
    weekly: Option<PathBuf>,
    /// Target column: hdi_sqrt, hdi, or si.
    #[arg(long)]
    target: Option<String>,
    /// Showing-index lags, e.g. "0,5-20" (empty for none).
    #[arg(long, value_name = "LIST")]
    si_lags: Option<String>,
    /// Demand-index lags, e.g. "5-20" (empty for none).
    #[arg(long, value_name = "LIST")]
    hdi_lags: Option<String>,
    /// Include the weekly median days-on-market column.
    #[arg(long, value_name = "BOOL")]
    include_median_dom: Option<bool>,
    /// Include the week-of-year column.
    #[arg(long, value_name = "BOOL")]
    include_week_number: Option<bool>,
    /// Destination design CSV.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(default)]
pub(crate) struct DesignConfig {
    weekly: Option<PathBuf>,
    target: String,
    si_lags: Vec<usize>,
    hdi_lags: Vec<usize>,
    include_median_dom: bool,
    include_week_number: bool,
    out: Option<PathBuf>,
}

impl Default for DesignConfig {
    fn default() -> Self {
        let full = LagSpec::full();
        DesignConfig {
            weekly: None,
            target: full.target_name,
            si_lags: full.si_lags,
            hdi_lags: full.hdi_lags,
            include_median_dom: full.include_median_dom,
            include_week_number: full.include_week_number,
            out: None,
        }
    }
}

pub fn run_design(ctx: &Ctx, cmd: DesignCmd) -> CResult<()> {
    let mut cfg: DesignConfig = load_config(ctx.config.as_deref())?;
    if let Some(v) = cmd.weekly {
        cfg.weekly = Some(v);
    }
    if let Some(v) = cmd.target {
        cfg.target = v;
    }
    if let Some(v) = cmd.si_lags {
        cfg.si_lags = parse_lag_list(&v)?;
    }
    if let Some(v) = cmd.hdi_lags {
        cfg.hdi_lags = parse_lag_list(&v)?;
    }
    if let Some(v) = cmd.include_median_dom {
        cfg.include_median_dom = v;
    }
    if let Some(v) = cmd.include_week_number {
        cfg.include_week_number = v;
    }
    if let Some(v) = cmd.out {
        cfg.out = Some(v);
    }
    let weekly_path = require(cfg.weekly.clone(), "--weekly")?;
    let out = require(cfg.out.clone(), "--out")?;

    let spec = LagSpec {
        target_name: cfg.target.clone(),
        si_lags: cfg.si_lags.clone(),
        hdi_lags: cfg.hdi_lags.clone(),
        include_median_dom: cfg.include_median_dom,
        include_week_number: cfg.include_week_number,
    };
    let weekly = read_weekly(&weekly_path)?;
    let idx = compute_indices(&weekly)?;
    let dm = build_design_matrix(&idx, &weekly, &spec)?;

    let mut buf = Vec::new();
    write_design_csv(&dm, &mut buf)?;
    atomic_write(&out, &buf)?;
    echo_config(&out, "design", ctx.threads, &cfg)
}
