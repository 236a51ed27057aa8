//! Seasonal ARIMA fitting with exogenous regressors.
//!
//! The model is φ(B)Φ(B^s)(1−B)^d(1−B^s)^D (y_t − μ − x_tᵀβ) =
//! θ(B)Θ(B^s)ε_t. Fitting differences the target and every regressor
//! column, then maximizes the exact Gaussian likelihood of the ARMA errors
//! by Kalman filtering: the filter whitens the differenced target and
//! regressors in one pass, β (and the mean, when no differencing is
//! applied) drop out by least squares on the whitened data, and σ² is
//! concentrated out in closed form. The ARMA coefficients are optimized
//! on an unconstrained scale that maps onto the stationary and invertible
//! regions, warm-started from a conditional-sum-of-squares pass.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::lstsq;
use crate::tsa::difference;

use super::optimize::nelder_mead;
use super::state_space::StateSpace;
use super::transform::{
    expand_ar, expand_ma, unconstrained_to_ar, unconstrained_to_ma,
};

/// Model orders (p,d,q)(P,D,Q)[s].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArimaSpec {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    #[serde(rename = "P")]
    pub seasonal_p: usize,
    #[serde(rename = "D")]
    pub seasonal_d: usize,
    #[serde(rename = "Q")]
    pub seasonal_q: usize,
    #[serde(rename = "s")]
    pub period: usize,
}

impl ArimaSpec {
    pub fn new(
        p: usize,
        d: usize,
        q: usize,
        seasonal_p: usize,
        seasonal_d: usize,
        seasonal_q: usize,
        period: usize,
    ) -> Self {
        ArimaSpec {
            p,
            d,
            q,
            seasonal_p,
            seasonal_d,
            seasonal_q,
            period,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.period == 0 {
            return Err(Error::InvalidArgument("seasonal period must be >= 1".into()));
        }
        if self.period == 1 && (self.seasonal_p > 0 || self.seasonal_d > 0 || self.seasonal_q > 0)
        {
            return Err(Error::InvalidArgument(
                "seasonal orders need a period greater than 1".into(),
            ));
        }
        Ok(())
    }

    /// Number of free ARMA coefficients.
    pub fn num_arma_params(&self) -> usize {
        self.p + self.q + self.seasonal_p + self.seasonal_q
    }

    /// Observations consumed by differencing.
    pub fn diff_loss(&self) -> usize {
        self.d + self.period * self.seasonal_d
    }
}

impl std::fmt::Display for ArimaSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({},{},{})({},{},{})[{}]",
            self.p, self.d, self.q, self.seasonal_p, self.seasonal_d, self.seasonal_q, self.period
        )
    }
}

/// Fitting controls. The defaults suit weekly series of a few years.
#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Include a mean term. Defaults to "only when no differencing is
    /// applied"; forcing it on with differencing is rejected.
    pub with_mean: Option<bool>,
    /// Evaluation budget per optimizer phase, scaled by dimension.
    pub max_evals_per_param: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            with_mean: None,
            max_evals_per_param: 600,
        }
    }
}

/// A fitted model: coefficients, profiled regression terms, and the
/// likelihood summary.
#[derive(Debug, Clone, PartialEq)]
pub struct ArimaFit {
    pub spec: ArimaSpec,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub seasonal_ar: Vec<f64>,
    pub seasonal_ma: Vec<f64>,
    pub beta: Vec<(String, f64)>,
    pub mean: Option<f64>,
    pub sigma2: f64,
    pub loglik: f64,
    pub aicc: f64,
    pub n_obs: usize,
    pub n_eff: usize,
}

impl ArimaFit {
    /// Free parameters counted by the information criterion: ARMA
    /// coefficients, regression coefficients, the mean when present, and
    /// the innovation variance.
    pub fn num_params(&self) -> usize {
        self.spec.num_arma_params() + self.beta.len() + usize::from(self.mean.is_some()) + 1
    }

    pub fn beta_value(&self, name: &str) -> Option<f64> {
        self.beta.iter().find(|(c, _)| c == name).map(|&(_, v)| v)
    }
}

/// Differenced data with the regression channels laid out for filtering.
struct Prepared {
    dy: Vec<f64>,
    /// Differenced regressor columns; a leading ones column when the mean
    /// is estimated.
    dx: Vec<Vec<f64>>,
    names: Vec<String>,
    use_mean: bool,
    n_eff: usize,
}

fn prepare(
    y: &[f64],
    xreg: &[(String, Vec<f64>)],
    spec: &ArimaSpec,
    options: &FitOptions,
) -> Result<Prepared> {
    spec.validate()?;
    let n = y.len();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidSeries("target contains non-finite values".into()));
    }
    for (name, col) in xreg {
        if col.len() != n {
            return Err(Error::InvalidArgument(format!(
                "regressor {name} has {} values for {n} observations",
                col.len()
            )));
        }
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "regressor {name} contains non-finite values"
            )));
        }
    }

    let diff_total = spec.diff_loss();
    let use_mean = match options.with_mean {
        Some(true) if diff_total > 0 => {
            return Err(Error::InvalidArgument(
                "a mean term is only identified without differencing".into(),
            ));
        }
        Some(flag) => flag,
        None => diff_total == 0,
    };

    let k = spec.num_arma_params() + xreg.len() + usize::from(use_mean) + 1;
    // AICc needs n_eff − k − 1 > 0; one extra observation keeps the
    // correction finite rather than borderline.
    let needed = diff_total + k + 2;
    if n < needed {
        return Err(Error::SeriesTooShort { needed, got: n });
    }
    let n_eff = n - diff_total;

    let dy = difference(y, spec.d, spec.seasonal_d, spec.period)?;
    let mut dx = Vec::with_capacity(xreg.len() + 1);
    let mut names = Vec::with_capacity(xreg.len());
    if use_mean {
        dx.push(vec![1.0; n_eff]);
    }
    for (name, col) in xreg {
        dx.push(difference(col, spec.d, spec.seasonal_d, spec.period)?);
        names.push(name.clone());
    }
    Ok(Prepared {
        dy,
        dx,
        names,
        use_mean,
        n_eff,
    })
}

/// Splits the unconstrained optimizer vector into the four coefficient
/// groups on the natural scale.
fn decode_params(z: &[f64], spec: &ArimaSpec) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let (a, rest) = z.split_at(spec.p);
    let (m, rest) = rest.split_at(spec.q);
    let (sa, sm) = rest.split_at(spec.seasonal_p);
    (
        unconstrained_to_ar(a),
        unconstrained_to_ma(m),
        unconstrained_to_ar(sa),
        unconstrained_to_ma(sm),
    )
}

struct Profiled {
    coefs: Vec<f64>,
    sigma2: f64,
    loglik: f64,
}

/// Exact concentrated log-likelihood at fixed ARMA coefficients: filters
/// every channel, profiles the regression by least squares on the
/// whitened data, and concentrates σ².
fn profile_likelihood(
    prepared: &Prepared,
    phi: &[f64],
    theta: &[f64],
) -> Result<Profiled> {
    let n = prepared.n_eff as f64;
    let ss = StateSpace::new(phi, theta);
    let mut channels: Vec<&[f64]> = Vec::with_capacity(1 + prepared.dx.len());
    channels.push(&prepared.dy);
    for col in &prepared.dx {
        channels.push(col);
    }
    let out = ss.filter(&channels)?;

    let (coefs, rss) = if prepared.dx.is_empty() {
        (Vec::new(), out.whitened[0].iter().map(|v| v * v).sum())
    } else {
        let k = prepared.dx.len();
        let mut a = ndarray::Array2::zeros((prepared.n_eff, k));
        for (j, col) in out.whitened[1..].iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                a[(i, j)] = v;
            }
        }
        lstsq(&a, &out.whitened[0])?
    };
    let sigma2 = rss / n;
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::Divergence {
            what: "concentrated variance collapsed".into(),
        });
    }
    let loglik = -0.5 * n * ((2.0 * std::f64::consts::PI).ln() + sigma2.ln() + 1.0)
        - 0.5 * out.log_f_sum;
    Ok(Profiled {
        coefs,
        sigma2,
        loglik,
    })
}

/// Conditional-sum-of-squares objective on fixed regression residuals:
/// cheap, and a good warm start for the exact likelihood.
fn css_objective(resid: &[f64], phi: &[f64], theta: &[f64]) -> f64 {
    let n = resid.len();
    let p = phi.len();
    if n <= p + 4 {
        return f64::INFINITY;
    }
    let mut eps = vec![0.0; n];
    let mut ss = 0.0;
    for t in p..n {
        let mut e = resid[t];
        for (i, &coef) in phi.iter().enumerate() {
            e -= coef * resid[t - 1 - i];
        }
        for (j, &coef) in theta.iter().enumerate() {
            if t >= j + 1 {
                e -= coef * eps[t - 1 - j];
            }
        }
        eps[t] = e;
        ss += e * e;
    }
    if ss.is_finite() {
        ((ss / (n - p) as f64).max(f64::MIN_POSITIVE)).ln()
    } else {
        f64::INFINITY
    }
}

/// Sample partial autocorrelations via the Durbin–Levinson recursion on
/// the sample autocovariances; used only for optimizer starting values.
fn sample_pacf(x: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let mut acov = vec![0.0; m + 1];
    for (k, slot) in acov.iter_mut().enumerate() {
        let mut sum = 0.0;
        for t in k..n {
            sum += (x[t] - mean) * (x[t - k] - mean);
        }
        *slot = sum / n as f64;
    }
    if acov[0] <= 0.0 {
        return vec![0.0; m];
    }
    let mut pacf = Vec::with_capacity(m);
    let mut a: Vec<f64> = Vec::new();
    let mut v = acov[0];
    for k in 1..=m {
        let mut num = acov[k];
        for (j, &aj) in a.iter().enumerate() {
            num -= aj * acov[k - 1 - j];
        }
        let r = if v > 0.0 { (num / v).clamp(-0.98, 0.98) } else { 0.0 };
        pacf.push(r);
        let prev = a.clone();
        a.push(r);
        for j in 0..prev.len() {
            a[j] = prev[j] - r * prev[prev.len() - 1 - j];
        }
        v *= 1.0 - r * r;
    }
    pacf
}

fn finish_fit(
    prepared: &Prepared,
    spec: &ArimaSpec,
    z: &[f64],
    n_obs: usize,
) -> Result<ArimaFit> {
    let (ar, ma, sar, sma) = decode_params(z, spec);
    let phi = expand_ar(&ar, &sar, spec.period);
    let theta = expand_ma(&ma, &sma, spec.period);
    let profiled = profile_likelihood(prepared, &phi, &theta)?;

    let mut coefs = profiled.coefs.iter();
    let mean = if prepared.use_mean {
        Some(*coefs.next().expect("mean column present"))
    } else {
        None
    };
    let beta: Vec<(String, f64)> = prepared
        .names
        .iter()
        .cloned()
        .zip(coefs.copied())
        .collect();

    let k = spec.num_arma_params() + beta.len() + usize::from(mean.is_some()) + 1;
    let n_eff = prepared.n_eff as f64;
    let aicc = -2.0 * profiled.loglik
        + 2.0 * k as f64
        + 2.0 * k as f64 * (k as f64 + 1.0) / (n_eff - k as f64 - 1.0);

    Ok(ArimaFit {
        spec: *spec,
        ar,
        ma,
        seasonal_ar: sar,
        seasonal_ma: sma,
        beta,
        mean,
        sigma2: profiled.sigma2,
        loglik: profiled.loglik,
        aicc,
        n_obs,
        n_eff: prepared.n_eff,
    })
}

/// Fits the model by exact maximum likelihood.
pub fn fit_regarima(
    y: &[f64],
    xreg: &[(String, Vec<f64>)],
    spec: &ArimaSpec,
    options: &FitOptions,
) -> Result<ArimaFit> {
    let prepared = prepare(y, xreg, spec, options)?;
    let dim = spec.num_arma_params();

    if dim == 0 {
        return finish_fit(&prepared, spec, &[], y.len());
    }

    // Regression residuals once, for the warm-start objective.
    let resid: Vec<f64> = if prepared.dx.is_empty() {
        prepared.dy.clone()
    } else {
        let k = prepared.dx.len();
        let mut a = ndarray::Array2::zeros((prepared.n_eff, k));
        for (j, col) in prepared.dx.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                a[(i, j)] = v;
            }
        }
        match lstsq(&a, &prepared.dy) {
            Ok((coefs, _)) => prepared
                .dy
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    v - prepared
                        .dx
                        .iter()
                        .zip(&coefs)
                        .map(|(col, c)| col[i] * c)
                        .sum::<f64>()
                })
                .collect(),
            Err(_) => prepared.dy.clone(),
        }
    };

    let css = |z: &[f64]| -> f64 {
        let (ar, ma, sar, sma) = decode_params(z, spec);
        let phi = expand_ar(&ar, &sar, spec.period);
        let theta = expand_ma(&ma, &sma, spec.period);
        css_objective(&resid, &phi, &theta)
    };
    let exact = |z: &[f64]| -> f64 {
        let (ar, ma, sar, sma) = decode_params(z, spec);
        let phi = expand_ar(&ar, &sar, spec.period);
        let theta = expand_ma(&ma, &sma, spec.period);
        match profile_likelihood(&prepared, &phi, &theta) {
            Ok(p) => -p.loglik,
            Err(_) => f64::INFINITY,
        }
    };

    // Starting point: sample partial autocorrelations of the regression
    // residuals for the AR block, zeros elsewhere.
    let mut start = vec![0.0; dim];
    if spec.p > 0 {
        let pacf = sample_pacf(&resid, spec.p);
        for (i, r) in pacf.iter().enumerate() {
            start[i] = r.atanh();
        }
    }

    let budget = options.max_evals_per_param * dim.max(1);
    let warm = nelder_mead(css, &start, 0.4, budget / 2, 1e-10);
    let warm_start = if warm.value.is_finite() { warm.x } else { start.clone() };
    let mut best = nelder_mead(exact, &warm_start, 0.15, budget, 1e-11);

    // Retries: a cold start, then a shifted start, before giving up.
    if !best.value.is_finite() || at_boundary(&best.x) {
        let retry = nelder_mead(exact, &vec![0.0; dim], 0.6, budget, 1e-11);
        if retry.value < best.value || !best.value.is_finite() {
            best = retry;
        }
    }
    if !best.value.is_finite() || at_boundary(&best.x) {
        let shifted: Vec<f64> = (0..dim).map(|i| if i % 2 == 0 { 0.3 } else { -0.3 }).collect();
        let retry = nelder_mead(exact, &shifted, 0.4, budget, 1e-11);
        if retry.value < best.value || !best.value.is_finite() {
            best = retry;
        }
    }
    if !best.value.is_finite() {
        return Err(Error::FitFailed(format!(
            "likelihood for {spec} was degenerate from every starting point"
        )));
    }
    if at_boundary(&best.x) {
        return Err(Error::FitFailed(format!(
            "{spec} converged onto the stationarity or invertibility boundary"
        )));
    }

    finish_fit(&prepared, spec, &best.x, y.len())
}

/// True when any partial autocorrelation is saturated.
fn at_boundary(z: &[f64]) -> bool {
    z.iter().any(|v| v.tanh().abs() > 0.9999)
}

/// Evaluates the model at fixed ARMA coefficients, still profiling the
/// regression and variance. Useful for cross-checks and for re-driving a
/// stored fit against its data.
pub fn evaluate_regarima(
    y: &[f64],
    xreg: &[(String, Vec<f64>)],
    spec: &ArimaSpec,
    ar: &[f64],
    ma: &[f64],
    seasonal_ar: &[f64],
    seasonal_ma: &[f64],
    options: &FitOptions,
) -> Result<ArimaFit> {
    if ar.len() != spec.p
        || ma.len() != spec.q
        || seasonal_ar.len() != spec.seasonal_p
        || seasonal_ma.len() != spec.seasonal_q
    {
        return Err(Error::InvalidArgument(
            "coefficient lengths must match the model orders".into(),
        ));
    }
    let prepared = prepare(y, xreg, spec, options)?;
    let phi = expand_ar(ar, seasonal_ar, spec.period);
    let theta = expand_ma(ma, seasonal_ma, spec.period);
    let profiled = profile_likelihood(&prepared, &phi, &theta)?;

    let mut coefs = profiled.coefs.iter();
    let mean = if prepared.use_mean {
        Some(*coefs.next().expect("mean column present"))
    } else {
        None
    };
    let beta: Vec<(String, f64)> = prepared
        .names
        .iter()
        .cloned()
        .zip(coefs.copied())
        .collect();
    let k = spec.num_arma_params() + beta.len() + usize::from(mean.is_some()) + 1;
    let n_eff = prepared.n_eff as f64;
    let aicc = -2.0 * profiled.loglik
        + 2.0 * k as f64
        + 2.0 * k as f64 * (k as f64 + 1.0) / (n_eff - k as f64 - 1.0);
    Ok(ArimaFit {
        spec: *spec,
        ar: ar.to_vec(),
        ma: ma.to_vec(),
        seasonal_ar: seasonal_ar.to_vec(),
        seasonal_ma: seasonal_ma.to_vec(),
        beta,
        mean,
        sigma2: profiled.sigma2,
        loglik: profiled.loglik,
        aicc,
        n_obs: y.len(),
        n_eff: prepared.n_eff,
    })
}

/// Outcome of fitting a candidate grid: the winner plus the full score
/// table and any per-candidate failures.
#[derive(Debug)]
pub struct SelectionReport {
    pub fit: ArimaFit,
    pub chosen_index: usize,
    /// Candidate AICc values in grid order; failures hold the error text.
    pub table: Vec<(ArimaSpec, std::result::Result<f64, String>)>,
    pub warnings: Vec<String>,
}

/// Fits every candidate and keeps the lowest AICc. Ties go to the model
/// with fewer parameters, then to the earlier grid position. Candidates
/// that fail to fit are recorded as warnings; if all fail the selection
/// fails.
pub fn auto_select(
    y: &[f64],
    xreg: &[(String, Vec<f64>)],
    candidates: &[ArimaSpec],
    options: &FitOptions,
) -> Result<SelectionReport> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no candidate models given".into()));
    }
    let mut table = Vec::with_capacity(candidates.len());
    let mut warnings = Vec::new();
    let mut best: Option<(usize, ArimaFit)> = None;
    for (index, spec) in candidates.iter().enumerate() {
        match fit_regarima(y, xreg, spec, options) {
            Ok(fit) => {
                let replace = match &best {
                    None => true,
                    Some((_, current)) => {
                        fit.aicc < current.aicc - 1e-9
                            || ((fit.aicc - current.aicc).abs() <= 1e-9
                                && fit.num_params() < current.num_params())
                    }
                };
                table.push((*spec, Ok(fit.aicc)));
                if replace {
                    best = Some((index, fit));
                }
            }
            Err(err) => {
                warnings.push(format!("candidate {spec} failed: {err}"));
                table.push((*spec, Err(err.to_string())));
            }
        }
    }
    match best {
        Some((chosen_index, fit)) => Ok(SelectionReport {
            fit,
            chosen_index,
            table,
            warnings,
        }),
        None => Err(Error::AllFitsFailed(candidates.len())),
    }
}
