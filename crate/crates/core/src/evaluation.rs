//! Train/test splits, cross-validation, rolling-origin evaluation, and the
//! error metrics used to compare forecasting models.
//!
//! Random splitting matches the original modeling protocol for weekly demand
//! data; chronological splitting and rolling-origin evaluation avoid the
//! temporal leakage that random row sampling introduces and are the
//! recommended defaults for honest forecast scoring.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::tsa::DesignMatrix;

/// How rows are assigned to the training side of a split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitMode {
    /// Sample training rows without replacement using the seed.
    Random { seed: u64 },
    /// Take the first `fraction` of rows, preserving time order.
    Chronological,
}

/// Partitions a design matrix into disjoint train and test matrices.
///
/// The train side receives `floor(fraction * n)` rows. Random mode shuffles
/// row indices with a seeded generator; both sides keep their original row
/// order so downstream time-aware code sees rows in sequence.
pub fn split_train_test(
    dm: &DesignMatrix,
    fraction: f64,
    mode: SplitMode,
) -> Result<(DesignMatrix, DesignMatrix)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let n = dm.nrows();
    let n_train = (fraction * n as f64).floor() as usize;
    if n_train < 2 {
        return Err(Error::InvalidArgument(format!(
            "training side would have {n_train} rows; need at least 2"
        )));
    }
    if n_train == n {
        return Err(Error::InvalidArgument(
            "test side would be empty; lower the fraction".into(),
        ));
    }
    let (mut train_rows, mut test_rows) = match mode {
        SplitMode::Chronological => ((0..n_train).collect(), (n_train..n).collect()),
        SplitMode::Random { seed } => {
            let mut rows: Vec<usize> = (0..n).collect();
            rows.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let test = rows.split_off(n_train);
            (rows, test)
        }
    };
    train_rows.sort_unstable();
    test_rows.sort_unstable();
    Ok((dm.subset_rows(&train_rows)?, dm.subset_rows(&test_rows)?))
}

/// Coefficient of determination of predictions against actuals.
///
/// Fails when the actuals have no variance, where R² is undefined.
pub fn r_squared(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    if actual.is_empty() || actual.len() != predicted.len() {
        return Err(Error::InvalidArgument(format!(
            "actual ({}) and predicted ({}) lengths must match and be positive",
            actual.len(),
            predicted.len()
        )));
    }
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let ss_tot: f64 = actual.iter().map(|a| (a - mean).powi(2)).sum();
    if ss_tot <= 0.0 {
        return Err(Error::ZeroVariance("actual".into()));
    }
    let ss_res: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p).powi(2))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// R² penalized for the number of fitted parameters (excluding the
/// intercept): `1 - (1 - R²)(n - 1)/(n - p - 1)`.
pub fn adjusted_r_squared(actual: &[f64], predicted: &[f64], n_params: usize) -> Result<f64> {
    let r2 = r_squared(actual, predicted)?;
    let n = actual.len();
    if n <= n_params + 1 {
        return Err(Error::InvalidArgument(format!(
            "adjusted R² needs more than {} observations for {n_params} parameters, got {n}",
            n_params + 1
        )));
    }
    Ok(1.0 - (1.0 - r2) * (n as f64 - 1.0) / (n as f64 - n_params as f64 - 1.0))
}

/// Mean absolute percentage error, in percent.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    if actual.is_empty() || actual.len() != predicted.len() {
        return Err(Error::InvalidArgument(format!(
            "actual ({}) and predicted ({}) lengths must match and be positive",
            actual.len(),
            predicted.len()
        )));
    }
    let mut sum = 0.0;
    for (index, (a, p)) in actual.iter().zip(predicted).enumerate() {
        if *a == 0.0 {
            return Err(Error::ZeroActual { index });
        }
        sum += ((a - p) / a).abs();
    }
    Ok(100.0 * sum / actual.len() as f64)
}

/// Metrics for one held-out fold.
#[derive(Debug, Clone)]
pub struct FoldResult {
    pub fold: usize,
    /// Original row indices held out in this fold, ascending.
    pub rows: Vec<usize>,
    /// None when the held-out actuals have no variance (e.g. leave-one-out).
    pub r2: Option<f64>,
    pub mape: f64,
}

/// Cross-validation outcome: per-fold metrics plus aggregates.
#[derive(Debug, Clone)]
pub struct CvReport {
    pub folds: Vec<FoldResult>,
    /// (fold index, reason) for folds whose fit or scoring failed.
    pub failures: Vec<(usize, String)>,
    /// Mean of the defined per-fold R² values.
    pub mean_r2: Option<f64>,
    pub mean_mape: f64,
    /// R² of all held-out predictions pooled together.
    pub pooled_r2: Option<f64>,
}

/// Seeded k-fold cross-validation.
///
/// Rows are shuffled once, dealt into k folds whose sizes differ by at most
/// one, and each fold is held out in turn. The fitter receives the training
/// and held-out matrices and returns predictions for the held-out rows. A
/// fold whose fit or scoring fails is recorded and skipped; aggregates cover
/// the successful folds.
pub fn kfold_cv<F>(dm: &DesignMatrix, k: usize, fitter: F, seed: u64) -> Result<CvReport>
where
    F: Fn(&DesignMatrix, &DesignMatrix) -> Result<Vec<f64>>,
{
    let n = dm.nrows();
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "cross-validation needs k >= 2, got {k}"
        )));
    }
    if n < k {
        return Err(Error::InvalidArgument(format!(
            "cannot make {k} folds from {n} rows"
        )));
    }
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let base = n / k;
    let remainder = n % k;

    let mut folds = Vec::new();
    let mut failures = Vec::new();
    let mut pooled_actual = Vec::new();
    let mut pooled_pred = Vec::new();
    let mut cursor = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < remainder);
        let mut test_rows: Vec<usize> = rows[cursor..cursor + size].to_vec();
        cursor += size;
        test_rows.sort_unstable();
        let mut train_rows: Vec<usize> = rows[..cursor - size]
            .iter()
            .chain(&rows[cursor..])
            .copied()
            .collect();
        train_rows.sort_unstable();
        let outcome = (|| -> Result<FoldResult> {
            let train = dm.subset_rows(&train_rows)?;
            let test = dm.subset_rows(&test_rows)?;
            let pred = fitter(&train, &test)?;
            if pred.len() != test.nrows() {
                return Err(Error::InvalidArgument(format!(
                    "fitter returned {} predictions for {} held-out rows",
                    pred.len(),
                    test.nrows()
                )));
            }
            let fold_mape = mape(test.target(), &pred)?;
            let fold_r2 = r_squared(test.target(), &pred).ok();
            pooled_actual.extend_from_slice(test.target());
            pooled_pred.extend_from_slice(&pred);
            Ok(FoldResult {
                fold,
                rows: test_rows.clone(),
                r2: fold_r2,
                mape: fold_mape,
            })
        })();
        match outcome {
            Ok(result) => folds.push(result),
            Err(e) => failures.push((fold, e.to_string())),
        }
    }
    if folds.is_empty() {
        return Err(Error::FitFailed(format!(
            "all {k} cross-validation folds failed; first failure: {}",
            failures[0].1
        )));
    }
    let defined: Vec<f64> = folds.iter().filter_map(|f| f.r2).collect();
    let mean_r2 = if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    };
    let mean_mape = folds.iter().map(|f| f.mape).sum::<f64>() / folds.len() as f64;
    let pooled_r2 = r_squared(&pooled_actual, &pooled_pred).ok();
    Ok(CvReport {
        folds,
        failures,
        mean_r2,
        mean_mape,
        pooled_r2,
    })
}

/// Forecasts and realized values from one evaluation origin.
#[derive(Debug, Clone)]
pub struct OriginForecast {
    /// Number of observations the fitter trained on.
    pub origin: usize,
    pub forecast: Vec<f64>,
    pub actual: Vec<f64>,
}

/// Rolling-origin evaluation outcome.
#[derive(Debug, Clone)]
pub struct RollingOriginReport {
    pub h: usize,
    pub min_train: usize,
    pub origins: Vec<OriginForecast>,
    /// (origin, reason) for fits that failed and were skipped.
    pub failures: Vec<(usize, String)>,
    /// MAPE across origins at each forecast step 1..=h.
    pub mape_per_step: Vec<f64>,
    /// MAPE at the final step h.
    pub mape_at_h: f64,
    /// MAPE averaged over all steps.
    pub mape_avg: f64,
}

/// Walks forecast origins forward through the series: for each origin t from
/// `min_train` to `n - h`, the fitter trains on the first t observations and
/// forecasts the next h, which are scored against the realized values. No
/// origin ever sees data at or beyond its forecast targets.
pub fn rolling_origin<F>(
    y: &[f64],
    fitter: F,
    h: usize,
    min_train: usize,
) -> Result<RollingOriginReport>
where
    F: Fn(&[f64], usize) -> Result<Vec<f64>>,
{
    if h == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    if min_train == 0 {
        return Err(Error::InvalidArgument(
            "minimum training length must be at least 1".into(),
        ));
    }
    let n = y.len();
    if n < min_train + h {
        return Err(Error::SeriesTooShort {
            needed: min_train + h,
            got: n,
        });
    }
    let mut origins = Vec::new();
    let mut failures = Vec::new();
    for t in min_train..=n - h {
        match fitter(&y[..t], h) {
            Ok(forecast) if forecast.len() == h => origins.push(OriginForecast {
                origin: t,
                forecast,
                actual: y[t..t + h].to_vec(),
            }),
            Ok(forecast) => failures.push((
                t,
                format!("fitter returned {} forecasts for horizon {h}", forecast.len()),
            )),
            Err(e) => failures.push((t, e.to_string())),
        }
    }
    if origins.is_empty() {
        return Err(Error::FitFailed(format!(
            "every rolling-origin fit failed; first failure: {}",
            failures[0].1
        )));
    }
    let mut mape_per_step = Vec::with_capacity(h);
    for step in 0..h {
        let actual: Vec<f64> = origins.iter().map(|o| o.actual[step]).collect();
        let pred: Vec<f64> = origins.iter().map(|o| o.forecast[step]).collect();
        mape_per_step.push(mape(&actual, &pred)?);
    }
    let mape_at_h = mape_per_step[h - 1];
    let mape_avg = mape_per_step.iter().sum::<f64>() / h as f64;
    Ok(RollingOriginReport {
        h,
        min_train,
        origins,
        failures,
        mape_per_step,
        mape_at_h,
        mape_avg,
    })
}

/// Reference forecasts every model must beat.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineForecasts {
    /// Last observed value, repeated.
    pub constant: Vec<f64>,
    /// Mean of the trailing window (up to 10 observations), repeated.
    pub mean: Vec<f64>,
}

/// Window length for the mean baseline.
const BASELINE_WINDOW: usize = 10;

/// Builds the constant (last value) and trailing-mean baseline forecasts.
pub fn baseline_forecasts(y: &[f64], h: usize) -> Result<BaselineForecasts> {
    if y.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot build baselines from an empty series".into(),
        ));
    }
    if h == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let last = *y.last().expect("nonempty");
    let window = &y[y.len().saturating_sub(BASELINE_WINDOW)..];
    let mean = window.iter().sum::<f64>() / window.len() as f64;
    Ok(BaselineForecasts {
        constant: vec![last; h],
        mean: vec![mean; h],
    })
}

/// A model's evaluation summary, serializable for the reporting pipeline.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub model: String,
    /// Human-readable split descriptor, e.g. "random 80/20 (seed 7)".
    pub split: String,
    pub horizon: usize,
    pub mape: f64,
    pub r2: f64,
    pub adj_r2: f64,
    pub baseline_constant_mape: f64,
    pub baseline_mean_mape: f64,
    /// Per-fold metrics when the evaluation used cross-validation.
    pub folds: Vec<FoldResult>,
}

impl EvalReport {
    pub fn to_json(&self) -> Value {
        let mut obj = serde_json::Map::new();
        obj.insert("model".into(), json!(self.model));
        obj.insert("split".into(), json!(self.split));
        obj.insert("horizon".into(), json!(self.horizon));
        obj.insert("mape".into(), json!(self.mape));
        obj.insert("r2".into(), json!(self.r2));
        obj.insert("adj_r2".into(), json!(self.adj_r2));
        obj.insert(
            "baselines".into(),
            json!({
                "constant": self.baseline_constant_mape,
                "mean": self.baseline_mean_mape,
            }),
        );
        let folds: Vec<Value> = self
            .folds
            .iter()
            .map(|f| {
                json!({
                    "fold": f.fold,
                    "size": f.rows.len(),
                    "r2": f.r2,
                    "mape": f.mape,
                })
            })
            .collect();
        obj.insert("folds".into(), Value::Array(folds));
        Value::Object(obj)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear;
    use approx::assert_relative_eq;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::cell::RefCell;
    use std::collections::BTreeSet;

    /// Matrix with an "idx" column recording each row's original position,
    /// so partition tests can identify rows after subsetting.
    fn indexed_matrix(n: usize) -> DesignMatrix {
        let mut x = Array2::zeros((n, 1));
        for i in 0..n {
            x[(i, 0)] = i as f64;
        }
        let target: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 + 3.0).collect();
        DesignMatrix::new(vec!["idx".into()], x, target).unwrap()
    }

    fn row_ids(dm: &DesignMatrix) -> Vec<usize> {
        dm.column("idx")
            .unwrap()
            .iter()
            .map(|&v| v as usize)
            .collect()
    }

    #[test]
    fn split_sizes_match_the_weekly_protocol() {
        let dm = indexed_matrix(144);
        let (train, test) =
            split_train_test(&dm, 0.8, SplitMode::Random { seed: 7 }).unwrap();
        assert_eq!(train.nrows(), 115);
        assert_eq!(test.nrows(), 29);
        let mut all: Vec<usize> = row_ids(&train);
        all.extend(row_ids(&test));
        all.sort_unstable();
        assert_eq!(all, (0..144).collect::<Vec<_>>());
    }

    #[test]
    fn chronological_split_takes_the_leading_rows() {
        let dm = indexed_matrix(10);
        let (train, test) = split_train_test(&dm, 0.5, SplitMode::Chronological).unwrap();
        assert_eq!(row_ids(&train), vec![0, 1, 2, 3, 4]);
        assert_eq!(row_ids(&test), vec![5, 6, 7, 8, 9]);
    }

    #[test]
    fn random_split_is_seed_deterministic() {
        let dm = indexed_matrix(60);
        let (a_train, _) = split_train_test(&dm, 0.8, SplitMode::Random { seed: 3 }).unwrap();
        let (b_train, _) = split_train_test(&dm, 0.8, SplitMode::Random { seed: 3 }).unwrap();
        assert_eq!(row_ids(&a_train), row_ids(&b_train));
        let (c_train, _) = split_train_test(&dm, 0.8, SplitMode::Random { seed: 4 }).unwrap();
        assert_ne!(row_ids(&a_train), row_ids(&c_train));
    }

    #[test]
    fn degenerate_splits_are_rejected() {
        let dm = indexed_matrix(10);
        assert!(split_train_test(&dm, 0.1, SplitMode::Chronological).is_err());
        assert!(split_train_test(&dm, 0.0, SplitMode::Chronological).is_err());
        assert!(split_train_test(&dm, 1.0, SplitMode::Chronological).is_err());
    }

    #[test]
    fn mape_arithmetic_and_guards() {
        assert_eq!(mape(&[100.0, 200.0], &[110.0, 180.0]).unwrap(), 10.0);
        assert_eq!(mape(&[5.0, 5.0], &[5.0, 5.0]).unwrap(), 0.0);
        let a = vec![3.0, 7.0, 11.0];
        let p = vec![2.5, 8.0, 10.0];
        let scaled_a: Vec<f64> = a.iter().map(|v| v * 3.7).collect();
        let scaled_p: Vec<f64> = p.iter().map(|v| v * 3.7).collect();
        assert_relative_eq!(
            mape(&a, &p).unwrap(),
            mape(&scaled_a, &scaled_p).unwrap(),
            max_relative = 1e-12
        );
        match mape(&[1.0, 0.0], &[1.0, 1.0]) {
            Err(Error::ZeroActual { index }) => assert_eq!(index, 1),
            other => panic!("expected ZeroActual, got {other:?}"),
        }
        assert!(mape(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn r_squared_arithmetic() {
        assert_relative_eq!(
            r_squared(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(),
            1.0
        );
        // ss_res = 1, ss_tot = 2 about the mean of 2.
        assert_relative_eq!(r_squared(&[1.0, 2.0, 3.0], &[1.0, 2.0, 2.0]).unwrap(), 0.5);
        assert_relative_eq!(
            adjusted_r_squared(&[1.0, 2.0, 3.0], &[1.0, 2.0, 2.0], 1).unwrap(),
            0.0
        );
        assert!(r_squared(&[2.0, 2.0], &[2.0, 2.0]).is_err());
        assert!(adjusted_r_squared(&[1.0, 2.0, 3.0], &[1.0, 2.0, 2.0], 2).is_err());
    }

    fn ols_fitter(train: &DesignMatrix, test: &DesignMatrix) -> Result<Vec<f64>> {
        let fit = linear::ols_fit(train)?;
        linear::predict(&fit, test)
    }

    #[test]
    fn leave_one_out_on_noiseless_data_has_zero_error() {
        let dm = indexed_matrix(30); // target is exactly linear in idx
        let report = kfold_cv(&dm, 30, ols_fitter, 11).unwrap();
        assert!(report.failures.is_empty());
        assert!(report.mean_mape < 1e-8, "mean MAPE {}", report.mean_mape);
        // Single-row folds have no defined per-fold R², but pooling does.
        assert!(report.mean_r2.is_none());
        assert!(report.pooled_r2.unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn fold_sizes_differ_by_at_most_one_and_partition_the_rows() {
        let dm = indexed_matrix(144);
        let report = kfold_cv(&dm, 10, ols_fitter, 5).unwrap();
        assert_eq!(report.folds.len(), 10);
        let mut sizes: Vec<usize> = report.folds.iter().map(|f| f.rows.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![14, 14, 14, 14, 14, 14, 15, 15, 15, 15]);
        let mut seen = BTreeSet::new();
        for fold in &report.folds {
            for &row in &fold.rows {
                assert!(seen.insert(row), "row {row} held out twice");
            }
        }
        assert_eq!(seen.len(), 144);
    }

    #[test]
    fn cross_validation_rarely_beats_training_fit() {
        let mut better = 0;
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 60;
            let mut x = Array2::zeros((n, 2));
            let mut y = Vec::with_capacity(n);
            for i in 0..n {
                x[(i, 0)] = rng.random_range(-2.0..2.0);
                x[(i, 1)] = rng.random_range(-2.0..2.0);
                y.push(5.0 + x[(i, 0)] - 0.5 * x[(i, 1)] + rng.random_range(-1.0..1.0));
            }
            let dm =
                DesignMatrix::new(vec!["x0".into(), "x1".into()], x, y).unwrap();
            let fit = linear::ols_fit(&dm).unwrap();
            let report = kfold_cv(&dm, 5, ols_fitter, seed).unwrap();
            if report.mean_r2.unwrap() <= fit.r2 {
                better += 1;
            }
        }
        assert!(better >= 90, "cv beat training fit too often: {better}/100");
    }

    #[test]
    fn failed_folds_are_recorded_and_skipped() {
        let dm = indexed_matrix(40);
        let report = kfold_cv(
            &dm,
            5,
            |train, test| {
                if test.column("idx").unwrap().iter().any(|&v| v == 0.0) {
                    return Err(Error::FitFailed("synthetic failure".into()));
                }
                ols_fitter(train, test)
            },
            2,
        )
        .unwrap();
        assert_eq!(report.folds.len(), 4);
        assert_eq!(report.failures.len(), 1);
        assert!(report.failures[0].1.contains("synthetic failure"));
        let all_fail = kfold_cv(
            &dm,
            5,
            |_, _| Err::<Vec<f64>, _>(Error::FitFailed("no".into())),
            2,
        );
        assert!(matches!(all_fail, Err(Error::FitFailed(_))));
    }

    #[test]
    fn rolling_origin_counts_origins_and_sees_only_the_past() {
        let y: Vec<f64> = (1..=30).map(|i| i as f64).collect();
        let seen = RefCell::new(Vec::new());
        let report = rolling_origin(
            &y,
            |train, h| {
                seen.borrow_mut().push(train.len());
                Ok(vec![*train.last().unwrap(); h])
            },
            3,
            20,
        )
        .unwrap();
        // n - h - min_train + 1 = 30 - 3 - 20 + 1 = 8 origins.
        assert_eq!(report.origins.len(), 8);
        assert_eq!(*seen.borrow(), (20..=27).collect::<Vec<_>>());
        for o in &report.origins {
            let expect: Vec<f64> = (o.origin + 1..=o.origin + 3).map(|i| i as f64).collect();
            assert_eq!(o.actual, expect);
        }
        assert_eq!(report.mape_per_step.len(), 3);
        assert_eq!(report.mape_at_h, report.mape_per_step[2]);
    }

    #[test]
    fn rolling_origin_mean_fitter_is_exact_on_constant_series() {
        let y = vec![5.0; 25];
        let report = rolling_origin(
            &y,
            |train, h| {
                let mean = train.iter().sum::<f64>() / train.len() as f64;
                Ok(vec![mean; h])
            },
            4,
            15,
        )
        .unwrap();
        assert!(report.mape_per_step.iter().all(|&m| m == 0.0));
        assert_eq!(report.mape_avg, 0.0);
    }

    #[test]
    fn rolling_origin_records_failures_and_length_mismatches() {
        let y: Vec<f64> = (1..=26).map(|i| i as f64).collect();
        let report = rolling_origin(
            &y,
            |train, h| {
                if train.len() % 2 == 1 {
                    return Err(Error::FitFailed("odd origin".into()));
                }
                Ok(vec![1.0; h])
            },
            2,
            18,
        )
        .unwrap();
        // Origins 18..=24: four even train lengths succeed, three odd fail.
        assert_eq!(report.origins.len(), 4);
        assert_eq!(report.failures.len(), 3);
        let wrong_len = rolling_origin(&y, |_, _| Ok(vec![1.0]), 2, 18).unwrap_err();
        assert!(matches!(wrong_len, Error::FitFailed(_)));
    }

    #[test]
    fn rolling_origin_validates_lengths() {
        let y = vec![1.0; 10];
        assert!(matches!(
            rolling_origin(&y, |_, h| Ok(vec![1.0; h]), 5, 6),
            Err(Error::SeriesTooShort { needed: 11, got: 10 })
        ));
    }

    #[test]
    fn baselines_repeat_last_value_and_trailing_mean() {
        let b = baseline_forecasts(&[1.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(b.constant, vec![3.0, 3.0]);
        let b = baseline_forecasts(&[5.0; 10], 4).unwrap();
        assert_eq!(b.mean, vec![5.0; 4]);
        // Trailing window covers the last ten values only.
        let y: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let b = baseline_forecasts(&y, 1).unwrap();
        assert_relative_eq!(b.mean[0], 15.5);
        assert_eq!(b.constant[0], 20.0);
        assert!(baseline_forecasts(&[], 2).is_err());
    }

    #[test]
    fn report_json_has_the_expected_shape() {
        let report = EvalReport {
            model: "arima(3,1,1)(0,1,0)[52]+regressors".into(),
            split: "rolling-origin".into(),
            horizon: 20,
            mape: 16.55,
            r2: 0.87,
            adj_r2: 0.84,
            baseline_constant_mape: 28.0,
            baseline_mean_mape: 23.0,
            folds: vec![FoldResult {
                fold: 0,
                rows: vec![1, 2, 3],
                r2: Some(0.9),
                mape: 12.0,
            }],
        };
        let v = report.to_json();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(
            keys,
            vec![
                "model",
                "split",
                "horizon",
                "mape",
                "r2",
                "adj_r2",
                "baselines",
                "folds"
            ]
        );
        assert_eq!(v["baselines"]["constant"], 28.0);
        assert_eq!(v["folds"][0]["size"], 3);
    }
}
