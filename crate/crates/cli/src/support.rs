//! Shared command plumbing: the exit-code error split, atomic file output,
//! config-file merging with the effective-config echo, and the small
//! argument grammars (lag lists, ARIMA order strings, column names).

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use demandcast_core::arima::ArimaSpec;
use demandcast_core::indices::{compute_indices, IndexSeries};
use demandcast_core::tsa::{build_design_matrix, LagSpec};
use demandcast_core::{Error as CoreError, WeeklySeries};

/// Failures split by exit code: usage problems exit 1, data/model/file
/// problems exit 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

pub type CResult<T> = Result<T, CliError>;

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Data(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Data(e.to_string())
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn data(msg: impl Into<String>) -> CliError {
    CliError::Data(msg.into())
}

/// Requires a value that may come from a flag or the config file.
pub fn require<T>(value: Option<T>, flag: &str) -> CResult<T> {
    value.ok_or_else(|| usage(format!("missing {flag} (pass the flag or set it in --config)")))
}

/// Reads a whole file, tagging errors with the path.
pub fn read_file(path: &Path) -> CResult<Vec<u8>> {
    fs::read(path).map_err(|e| data(format!("{}: {e}", path.display())))
}

/// Writes bytes through a temp file in the destination directory followed
/// by a rename, so an interrupted run never leaves a half-written output.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> CResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| data(format!("{}: {e}", dir.display())))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, bytes).map_err(|e| data(format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        data(format!("{}: {e}", path.display()))
    })
}

/// Pretty JSON with a trailing newline, written atomically.
pub fn write_json(path: &Path, value: &Value) -> CResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| data(format!("{}: {e}", path.display())))?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

pub fn read_json(path: &Path) -> CResult<Value> {
    let bytes = read_file(path)?;
    serde_json::from_slice(&bytes).map_err(|e| data(format!("{}: {e}", path.display())))
}

/// Loads the optional config file into a command's parameter struct.
pub fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> CResult<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let bytes = read_file(p)?;
            serde_json::from_slice(&bytes).map_err(|e| data(format!("{}: {e}", p.display())))
        }
    }
}

/// Echo location for an output path: `<out>.config.json` with trailing
/// separators trimmed, so directory outputs get a sibling echo.
pub fn echo_path(out: &Path) -> PathBuf {
    let text = out.to_string_lossy();
    let trimmed = text.trim_end_matches('/');
    PathBuf::from(format!("{trimmed}.config.json"))
}

/// Writes the effective-config echo next to the outputs. Identical
/// effective configs produce identical outputs, so the echo doubles as a
/// cache key for pipeline runners.
pub fn echo_config<T: Serialize>(
    out: &Path,
    command: &str,
    threads: usize,
    params: &T,
) -> CResult<()> {
    let value = json!({
        "command": command,
        "threads": threads,
        "params": params,
    });
    write_json(&echo_path(out), &value)
}

/// Parses a lag list such as `10`, `0,5-20`, or the empty string (no lags).
pub fn parse_lag_list(text: &str) -> CResult<Vec<usize>> {
    let mut lags = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        match part.split_once('-') {
            Some((a, b)) => {
                let bad = || usage(format!("bad lag range '{part}' (expected start-end)"));
                let a: usize = a.trim().parse().map_err(|_| bad())?;
                let b: usize = b.trim().parse().map_err(|_| bad())?;
                if a > b {
                    return Err(usage(format!("bad lag range '{part}': start exceeds end")));
                }
                lags.extend(a..=b);
            }
            None => {
                lags.push(
                    part.parse()
                        .map_err(|_| usage(format!("bad lag '{part}' (expected an integer)")))?,
                );
            }
        }
    }
    Ok(lags)
}

/// Parses `p,d,q:P,D,Q:s` into model orders; a bare `p,d,q` means no
/// seasonal part.
pub fn parse_arima_spec(text: &str) -> CResult<ArimaSpec> {
    let bad = || usage(format!("bad ARIMA spec '{text}' (expected p,d,q:P,D,Q:s)"));
    let triple = |block: &str| -> CResult<(usize, usize, usize)> {
        let nums: Vec<&str> = block.split(',').collect();
        if nums.len() != 3 {
            return Err(bad());
        }
        let mut parsed = [0usize; 3];
        for (slot, text) in parsed.iter_mut().zip(&nums) {
            *slot = text.trim().parse().map_err(|_| bad())?;
        }
        Ok((parsed[0], parsed[1], parsed[2]))
    };
    let blocks: Vec<&str> = text.split(':').collect();
    match blocks.as_slice() {
        [orders] => {
            let (p, d, q) = triple(orders)?;
            Ok(ArimaSpec::new(p, d, q, 0, 0, 0, 1))
        }
        [orders, seasonal, period] => {
            let (p, d, q) = triple(orders)?;
            let (sp, sd, sq) = triple(seasonal)?;
            let s: usize = period.trim().parse().map_err(|_| bad())?;
            Ok(ArimaSpec::new(p, d, q, sp, sd, sq, s))
        }
        _ => Err(bad()),
    }
}

/// Renders model orders back in the flag form `p,d,q:P,D,Q:s`.
pub fn spec_to_arg(spec: &ArimaSpec) -> String {
    format!(
        "{},{},{}:{},{},{}:{}",
        spec.p, spec.d, spec.q, spec.seasonal_p, spec.seasonal_d, spec.seasonal_q, spec.period
    )
}

/// Resolves a named weekly or index column to a float series.
pub fn resolve_column(weekly: &WeeklySeries, name: &str) -> CResult<Vec<f64>> {
    match name {
        "showings" => Ok(weekly.showings()),
        "sold" => Ok(weekly.sold()),
        "on_market" => Ok(weekly.on_market()),
        "median_dom" => Ok(weekly.median_dom()),
        "hdi" | "si" | "hdi_sqrt" => {
            let idx = compute_indices(weekly)?;
            index_target(&idx, name)
        }
        other => Err(usage(format!(
            "unknown column '{other}' (expected showings, sold, on_market, median_dom, hdi, si, or hdi_sqrt)"
        ))),
    }
}

/// Target series for model fitting: one of the index columns.
pub fn index_target(idx: &IndexSeries, name: &str) -> CResult<Vec<f64>> {
    match name {
        "hdi_sqrt" => Ok(idx.hdi_sqrt()),
        "hdi" => Ok(idx.hdi()),
        "si" => Ok(idx.si()),
        other => Err(usage(format!(
            "unknown target '{other}' (expected hdi_sqrt, hdi, or si)"
        ))),
    }
}

/// Which lagged index columns ride along as ARIMA regressors. Stored in
/// the model artifact so forecast and evaluate rebuild the identical
/// regressor layout from any compatible weekly series.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RegressorSpec {
    pub si_lags: Vec<usize>,
    pub hdi_lags: Vec<usize>,
    pub include_median_dom: bool,
    pub include_week_number: bool,
}

impl RegressorSpec {
    pub fn is_empty(&self) -> bool {
        self.si_lags.is_empty()
            && self.hdi_lags.is_empty()
            && !self.include_median_dom
            && !self.include_week_number
    }

    pub fn lag_spec(&self, target: &str) -> LagSpec {
        LagSpec {
            target_name: target.to_string(),
            si_lags: self.si_lags.clone(),
            hdi_lags: self.hdi_lags.clone(),
            include_median_dom: self.include_median_dom,
            include_week_number: self.include_week_number,
        }
    }
}

/// Target and aligned regressor columns for a weekly series under a lag
/// layout. With no regressors the target runs over every week; otherwise
/// rows start after the longest lag so every predictor cell is observed.
pub fn arima_training_data(
    weekly: &WeeklySeries,
    idx: &IndexSeries,
    target: &str,
    reg: &RegressorSpec,
) -> CResult<(Vec<f64>, Vec<(String, Vec<f64>)>)> {
    if reg.is_empty() {
        return Ok((index_target(idx, target)?, Vec::new()));
    }
    let dm = build_design_matrix(idx, weekly, &reg.lag_spec(target))?;
    let mut xreg = Vec::new();
    for name in dm.column_names() {
        let col = dm.column(name)?.to_vec();
        xreg.push((name.clone(), col));
    }
    Ok((dm.target().to_vec(), xreg))
}
