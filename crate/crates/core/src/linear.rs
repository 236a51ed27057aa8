//! Ordinary least squares and forward stepwise regression.
//!
//! Solving goes through a Householder QR decomposition rather than the
//! normal equations, so ill-conditioned lag designs keep full precision and
//! rank deficiency is detected at the offending columns.

use ndarray::Array2;
use serde_json::{json, Value};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::tsa::DesignMatrix;

/// A fitted linear model with named coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    /// (predictor name, coefficient), in design-matrix column order.
    pub coefficients: Vec<(String, f64)>,
    pub residuals: Vec<f64>,
    pub fitted: Vec<f64>,
    pub r2: f64,
    pub adj_r2: f64,
    pub n: usize,
    pub p: usize,
    /// Order in which predictors entered (stepwise) or appeared (plain OLS).
    pub selection_order: Vec<String>,
}

impl LinearFit {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.coefficients
            .iter()
            .find(|(c, _)| c == name)
            .map(|&(_, v)| v)
    }

    /// Serializes to the model artifact layout.
    pub fn to_artifact(&self, model: &str) -> Value {
        let mut coefficients = serde_json::Map::new();
        for (name, v) in &self.coefficients {
            coefficients.insert(name.clone(), json!(v));
        }
        json!({
            "model": model,
            "intercept": self.intercept,
            "coefficients": coefficients,
            "selection_order": self.selection_order,
            "r2": self.r2,
            "adj_r2": self.adj_r2,
            "n": self.n,
            "p": self.p,
        })
    }

    /// Rebuilds a fit from its artifact (residuals/fitted are not stored).
    pub fn from_artifact(v: &Value) -> Result<LinearFit> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Artifact("linear artifact is not an object".into()))?;
        let num = |key: &str| -> Result<f64> {
            obj.get(key)
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::Artifact(format!("missing numeric field '{key}'")))
        };
        let coeff_obj = obj
            .get("coefficients")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Artifact("missing 'coefficients' object".into()))?;
        let mut coefficients = Vec::with_capacity(coeff_obj.len());
        for (name, val) in coeff_obj {
            let v = val
                .as_f64()
                .ok_or_else(|| Error::Artifact(format!("coefficient '{name}' not numeric")))?;
            coefficients.push((name.clone(), v));
        }
        let selection_order = obj
            .get("selection_order")
            .and_then(Value::as_array)
            .map(|a| {
                a.iter()
                    .filter_map(Value::as_str)
                    .map(str::to_string)
                    .collect()
            })
            .unwrap_or_else(|| coefficients.iter().map(|(n, _)| n.clone()).collect());
        Ok(LinearFit {
            intercept: num("intercept")?,
            coefficients,
            residuals: Vec::new(),
            fitted: Vec::new(),
            r2: num("r2")?,
            adj_r2: num("adj_r2")?,
            n: num("n")? as usize,
            p: num("p")? as usize,
            selection_order,
        })
    }
}

/// Householder QR of the given matrix; factors stored in place.
struct QrFactors {
    /// m×n working matrix: R on and above the diagonal, reflector tails below.
    a: Array2<f64>,
    /// Leading reflector components (the v₁ of each Householder vector).
    v_heads: Vec<f64>,
    /// Squared norms of each Householder vector.
    v_norms2: Vec<f64>,
}

impl QrFactors {
    fn decompose(mut a: Array2<f64>) -> Self {
        let (m, n) = a.dim();
        let mut v_heads = Vec::with_capacity(n);
        let mut v_norms2 = Vec::with_capacity(n);
        for k in 0..n.min(m) {
            let norm_x = (k..m).map(|i| a[(i, k)] * a[(i, k)]).sum::<f64>().sqrt();
            let alpha = if a[(k, k)] > 0.0 { -norm_x } else { norm_x };
            let v1 = a[(k, k)] - alpha;
            let vtv = v1 * v1 + (k + 1..m).map(|i| a[(i, k)] * a[(i, k)]).sum::<f64>();
            if vtv > 0.0 {
                // Apply I − 2vvᵀ/vᵀv to the trailing columns.
                for j in k + 1..n {
                    let mut dot = v1 * a[(k, j)];
                    for i in k + 1..m {
                        dot += a[(i, k)] * a[(i, j)];
                    }
                    let scale = 2.0 * dot / vtv;
                    a[(k, j)] -= scale * v1;
                    for i in k + 1..m {
                        a[(i, j)] -= scale * a[(i, k)];
                    }
                }
            }
            v_heads.push(v1);
            v_norms2.push(vtv);
            a[(k, k)] = alpha;
        }
        QrFactors { a, v_heads, v_norms2 }
    }

    fn ncols(&self) -> usize {
        self.a.ncols()
    }

    /// Columns whose R diagonal is negligibly small relative to the largest.
    fn deficient_columns(&self) -> Vec<usize> {
        let n = self.ncols();
        let max_diag = (0..n).map(|k| self.a[(k, k)].abs()).fold(0.0, f64::max);
        let tol = 1e-10 * max_diag.max(1e-300);
        (0..n).filter(|&k| self.a[(k, k)].abs() < tol).collect()
    }

    /// Applies Qᵀ to b in place.
    fn apply_qt(&self, b: &mut [f64]) {
        let (m, n) = self.a.dim();
        for k in 0..n.min(m) {
            let vtv = self.v_norms2[k];
            if vtv <= 0.0 {
                continue;
            }
            let mut dot = self.v_heads[k] * b[k];
            for i in k + 1..m {
                dot += self.a[(i, k)] * b[i];
            }
            let scale = 2.0 * dot / vtv;
            b[k] -= scale * self.v_heads[k];
            for i in k + 1..m {
                b[i] -= scale * self.a[(i, k)];
            }
        }
    }

    /// Solves R x = c by back substitution.
    fn solve_r(&self, c: &[f64]) -> Vec<f64> {
        let n = self.ncols();
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let mut v = c[k];
            for j in k + 1..n {
                v -= self.a[(k, j)] * x[j];
            }
            x[k] = v / self.a[(k, k)];
        }
        x
    }

    /// Diagonal of (XᵀX)⁻¹ = R⁻¹R⁻ᵀ, via forward solves against Rᵀ.
    fn xtx_inverse_diagonal(&self) -> Vec<f64> {
        let n = self.ncols();
        let mut diag = vec![0.0; n];
        for j in 0..n {
            // Solve Rᵀ u = e_j (lower triangular).
            let mut u = vec![0.0; n];
            for i in j..n {
                let mut v = if i == j { 1.0 } else { 0.0 };
                for k in j..i {
                    v -= self.a[(k, i)] * u[k];
                }
                u[i] = v / self.a[(i, i)];
            }
            diag[j] = u.iter().map(|v| v * v).sum();
        }
        diag
    }
}

/// Minimum-norm-free dense least squares for internal callers that manage
/// their own column bookkeeping: returns (coefficients, residual sum of
/// squares) for min ‖a·x − b‖².
pub(crate) fn lstsq(a: &Array2<f64>, b: &[f64]) -> Result<(Vec<f64>, f64)> {
    let (m, n) = a.dim();
    if b.len() != m {
        return Err(Error::InvalidArgument(format!(
            "left side has {m} rows but right side has {}",
            b.len()
        )));
    }
    if n == 0 {
        return Ok((Vec::new(), b.iter().map(|v| v * v).sum()));
    }
    if m < n {
        return Err(Error::InvalidArgument(format!(
            "least squares needs rows >= columns, got {m} rows for {n} columns"
        )));
    }
    let qr = QrFactors::decompose(a.clone());
    let deficient = qr.deficient_columns();
    if !deficient.is_empty() {
        return Err(Error::RankDeficient {
            columns: deficient.iter().map(|j| format!("column {j}")).collect(),
        });
    }
    let mut rhs = b.to_vec();
    qr.apply_qt(&mut rhs);
    let coefs = qr.solve_r(&rhs[..n]);
    let rss = rhs[n..].iter().map(|v| v * v).sum();
    Ok((coefs, rss))
}

struct OlsSolution {
    coefs: Vec<f64>,
    fitted: Vec<f64>,
    residuals: Vec<f64>,
    sse: f64,
    /// Standard errors of the coefficients (None when dof = 0).
    std_errors: Option<Vec<f64>>,
}

/// Least squares of target on the named subset of columns plus intercept.
fn solve_ols(dm: &DesignMatrix, columns: &[&str]) -> Result<OlsSolution> {
    let n = dm.nrows();
    let p = columns.len();
    let mut x = Array2::ones((n, p + 1));
    for (j, name) in columns.iter().enumerate() {
        x.column_mut(j + 1).assign(&dm.column(name)?);
    }
    let qr = QrFactors::decompose(x.clone());
    let deficient = qr.deficient_columns();
    if !deficient.is_empty() {
        let names: Vec<String> = deficient
            .iter()
            .map(|&k| {
                if k == 0 {
                    "(intercept)".to_string()
                } else {
                    columns[k - 1].to_string()
                }
            })
            .collect();
        return Err(Error::RankDeficient { columns: names });
    }

    let mut qtb = dm.target().to_vec();
    qr.apply_qt(&mut qtb);
    let coefs = qr.solve_r(&qtb[..p + 1]);

    let mut fitted = vec![0.0; n];
    for i in 0..n {
        let mut v = coefs[0];
        for j in 0..p {
            v += coefs[j + 1] * x[(i, j + 1)];
        }
        fitted[i] = v;
    }
    let residuals: Vec<f64> = dm
        .target()
        .iter()
        .zip(&fitted)
        .map(|(y, f)| y - f)
        .collect();
    let sse: f64 = residuals.iter().map(|r| r * r).sum();

    let dof = n as i64 - (p + 1) as i64;
    let std_errors = if dof > 0 {
        let sigma2 = sse / dof as f64;
        Some(
            qr.xtx_inverse_diagonal()
                .iter()
                .map(|d| (sigma2 * d).sqrt())
                .collect(),
        )
    } else {
        None
    };

    Ok(OlsSolution {
        coefs,
        fitted,
        residuals,
        sse,
        std_errors,
    })
}

fn build_fit(
    dm: &DesignMatrix,
    columns: &[&str],
    sol: OlsSolution,
    selection_order: Vec<String>,
) -> LinearFit {
    let n = dm.nrows();
    let p = columns.len();
    let y = dm.target();
    let mean = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let r2 = if sst <= f64::MIN_POSITIVE {
        0.0
    } else {
        (1.0 - sol.sse / sst).clamp(0.0, 1.0)
    };
    let adj_r2 = if n > p + 1 {
        1.0 - (1.0 - r2) * (n as f64 - 1.0) / (n as f64 - p as f64 - 1.0)
    } else {
        f64::NAN
    };
    LinearFit {
        intercept: sol.coefs[0],
        coefficients: columns
            .iter()
            .zip(sol.coefs[1..].iter())
            .map(|(name, &c)| (name.to_string(), c))
            .collect(),
        residuals: sol.residuals,
        fitted: sol.fitted,
        r2,
        adj_r2,
        n,
        p,
        selection_order,
    }
}

/// Fits target on all design columns plus an intercept.
pub fn ols_fit(dm: &DesignMatrix) -> Result<LinearFit> {
    if dm.nrows() <= dm.ncols() + 1 {
        return Err(Error::InvalidArgument(format!(
            "need more than {} rows to fit {} predictors, got {}",
            dm.ncols() + 1,
            dm.ncols(),
            dm.nrows()
        )));
    }
    let columns: Vec<&str> = dm.column_names().iter().map(String::as_str).collect();
    let sol = solve_ols(dm, &columns)?;
    let order = dm.column_names().to_vec();
    Ok(build_fit(dm, &columns, sol, order))
}

/// Entry rule for forward stepwise selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepwiseCriterion {
    /// Add the predictor that lowers AIC most; stop when none does.
    Aic,
    /// Add the predictor with the smallest t-test p-value while it is
    /// below alpha; stop otherwise.
    PValue { alpha: f64 },
}

fn aic(n: usize, sse: f64, n_params: usize) -> f64 {
    let nf = n as f64;
    nf * (sse.max(f64::MIN_POSITIVE) / nf).ln() + 2.0 * n_params as f64
}

fn p_value_of_last(sol: &OlsSolution, n: usize, n_params: usize) -> Option<f64> {
    let se = sol.std_errors.as_ref()?;
    let j = se.len() - 1;
    if se[j] <= 0.0 {
        return Some(0.0);
    }
    let t = sol.coefs[j] / se[j];
    let dof = (n - n_params) as f64;
    let dist = StudentsT::new(0.0, 1.0, dof).ok()?;
    Some(2.0 * (1.0 - dist.cdf(t.abs())))
}

/// Builds a model by forward selection from an intercept-only start.
///
/// Candidates are scanned in column order each round; ties keep the
/// earliest column, so the procedure is deterministic. Candidates that
/// would make the design rank deficient are skipped.
pub fn forward_stepwise(dm: &DesignMatrix, criterion: StepwiseCriterion) -> Result<LinearFit> {
    let n = dm.nrows();
    if n <= dm.ncols() + 1 {
        return Err(Error::InvalidArgument(format!(
            "need more than {} rows for stepwise over {} predictors, got {}",
            dm.ncols() + 1,
            dm.ncols(),
            dm.nrows()
        )));
    }
    if let StepwiseCriterion::PValue { alpha } = criterion {
        if !(0.0..1.0).contains(&alpha) || alpha <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "stepwise alpha must be in (0, 1), got {alpha}"
            )));
        }
    }

    let all: Vec<&str> = dm.column_names().iter().map(String::as_str).collect();
    let mut selected: Vec<&str> = Vec::new();
    let mut current_sol = solve_ols(dm, &selected)?;
    let mut current_aic = aic(n, current_sol.sse, 1);

    loop {
        let mut best: Option<(usize, OlsSolution, f64)> = None;
        for (idx, cand) in all.iter().enumerate() {
            if selected.contains(cand) {
                continue;
            }
            let mut trial: Vec<&str> = selected.clone();
            trial.push(cand);
            let sol = match solve_ols(dm, &trial) {
                Ok(s) => s,
                Err(Error::RankDeficient { .. }) => continue,
                Err(e) => return Err(e),
            };
            let score = match criterion {
                StepwiseCriterion::Aic => aic(n, sol.sse, trial.len() + 1),
                StepwiseCriterion::PValue { .. } => {
                    match p_value_of_last(&sol, n, trial.len() + 1) {
                        Some(p) => p,
                        None => continue,
                    }
                }
            };
            if best.as_ref().map_or(true, |(_, _, s)| score < *s) {
                best = Some((idx, sol, score));
            }
        }

        let Some((idx, sol, score)) = best else { break };
        let accept = match criterion {
            StepwiseCriterion::Aic => score < current_aic - 1e-12,
            StepwiseCriterion::PValue { alpha } => score < alpha,
        };
        if !accept {
            break;
        }
        selected.push(all[idx]);
        current_aic = match criterion {
            StepwiseCriterion::Aic => score,
            StepwiseCriterion::PValue { .. } => aic(n, sol.sse, selected.len() + 1),
        };
        current_sol = sol;
    }

    let order: Vec<String> = selected.iter().map(|s| s.to_string()).collect();
    Ok(build_fit(dm, &selected, current_sol, order))
}

/// Evaluates the fit on a design matrix, matching predictors by name.
pub fn predict(fit: &LinearFit, dm: &DesignMatrix) -> Result<Vec<f64>> {
    let mut out = vec![fit.intercept; dm.nrows()];
    for (name, coef) in &fit.coefficients {
        let col = dm.column(name)?;
        for (o, v) in out.iter_mut().zip(col.iter()) {
            *o += coef * v;
        }
    }
    Ok(out)
}
