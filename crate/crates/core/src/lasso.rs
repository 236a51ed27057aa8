//! L1-regularized regression via the least-angle path algorithm.
//!
//! The path is computed on standardized predictors (mean 0, unit population
//! standard deviation) against a centered target. The penalty is
//! parameterized by the dual value λ = max_j |x_jᵀ r|, which decreases
//! linearly along each path segment, so coefficients between breakpoints
//! are exact linear interpolations. In lasso mode a coefficient that would
//! cross zero is dropped at the crossing, which is the full lasso solution
//! path; plain LAR never drops. A cyclic coordinate-descent solver for the
//! penalized objective is included as an independent cross-check.

use std::io::Write;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::tsa::DesignMatrix;

/// Path flavor: pure least-angle moves, or the lasso modification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathMode {
    Lar,
    Lasso,
}

/// One vertex of the piecewise-linear coefficient path.
#[derive(Debug, Clone, PartialEq)]
pub struct Breakpoint {
    /// Dual penalty max_j |x_jᵀ r| at this vertex (strictly decreasing).
    pub lambda: f64,
    /// Standardized-scale coefficients, full length-p vector.
    pub coefficients: Vec<f64>,
    /// Names of active predictors, in entry order.
    pub active_set: Vec<String>,
}

/// The full coefficient path with its standardization record.
#[derive(Debug, Clone, PartialEq)]
pub struct LarPath {
    pub mode: PathMode,
    pub breakpoints: Vec<Breakpoint>,
    names: Vec<String>,
    means: Vec<f64>,
    scales: Vec<f64>,
    target_mean: f64,
}

/// Coefficients at a fixed penalty, on both scales.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoSolution {
    pub intercept: f64,
    /// (name, coefficient) on the original column scale.
    pub coefficients: Vec<(String, f64)>,
    standardized: Vec<f64>,
}

impl LassoSolution {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.coefficients
            .iter()
            .find(|(c, _)| c == name)
            .map(|&(_, v)| v)
    }

    /// Coefficients on the standardized scale the path is computed on.
    pub fn standardized_coefficients(&self) -> &[f64] {
        &self.standardized
    }
}

/// Standardized copy of the design: columns mean 0 / unit population sd,
/// target centered.
struct Standardized {
    x: Array2<f64>,
    y: Array1<f64>,
    means: Vec<f64>,
    scales: Vec<f64>,
    target_mean: f64,
}

fn standardize(dm: &DesignMatrix) -> Result<Standardized> {
    let n = dm.nrows();
    let p = dm.ncols();
    let nf = n as f64;
    let mut x = dm.x().clone();
    let mut means = Vec::with_capacity(p);
    let mut scales = Vec::with_capacity(p);
    for j in 0..p {
        let mean = x.column(j).sum() / nf;
        let var = x.column(j).iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
        let scale = var.sqrt();
        if scale < 1e-12 * (1.0 + mean.abs()) {
            return Err(Error::ConstantColumn(dm.column_names()[j].clone()));
        }
        for v in x.column_mut(j) {
            *v = (*v - mean) / scale;
        }
        means.push(mean);
        scales.push(scale);
    }
    let target_mean = dm.target().iter().sum::<f64>() / nf;
    let y = Array1::from_iter(dm.target().iter().map(|v| v - target_mean));
    Ok(Standardized {
        x,
        y,
        means,
        scales,
        target_mean,
    })
}

/// Solves the dense symmetric system G d = s by Gaussian elimination.
fn solve_dense(g: &mut Array2<f64>, s: &mut [f64], context: &[String]) -> Result<Vec<f64>> {
    let k = s.len();
    for col in 0..k {
        let mut pivot = col;
        for r in col + 1..k {
            if g[(r, col)].abs() > g[(pivot, col)].abs() {
                pivot = r;
            }
        }
        if g[(pivot, col)].abs() < 1e-12 {
            return Err(Error::RankDeficient {
                columns: context.to_vec(),
            });
        }
        if pivot != col {
            for j in 0..k {
                let tmp = g[(col, j)];
                g[(col, j)] = g[(pivot, j)];
                g[(pivot, j)] = tmp;
            }
            s.swap(col, pivot);
        }
        for r in col + 1..k {
            let f = g[(r, col)] / g[(col, col)];
            if f == 0.0 {
                continue;
            }
            for j in col..k {
                g[(r, j)] -= f * g[(col, j)];
            }
            s[r] -= f * s[col];
        }
    }
    let mut d = vec![0.0; k];
    for r in (0..k).rev() {
        let mut v = s[r];
        for j in r + 1..k {
            v -= g[(r, j)] * d[j];
        }
        d[r] = v / g[(r, r)];
    }
    Ok(d)
}

/// Traces the full coefficient path of the standardized problem.
pub fn lar_path(dm: &DesignMatrix, mode: PathMode) -> Result<LarPath> {
    let n = dm.nrows();
    let p = dm.ncols();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "path needs at least 2 rows, got {n}"
        )));
    }
    let std = standardize(dm)?;
    let names = dm.column_names().to_vec();

    let mut beta = vec![0.0; p];
    let mut mu = Array1::zeros(n);
    let mut active: Vec<usize> = Vec::new();
    let mut just_dropped = false;

    let corr = |mu: &Array1<f64>| -> Vec<f64> {
        let r = &std.y - mu;
        (0..p).map(|j| std.x.column(j).dot(&r)).collect()
    };

    let c0 = corr(&mu);
    let lambda_entry = c0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut breakpoints = vec![Breakpoint {
        lambda: lambda_entry,
        coefficients: beta.clone(),
        active_set: Vec::new(),
    }];
    let gamma_eps = 1e-9 * (1.0 + lambda_entry);
    if lambda_entry <= gamma_eps {
        // Target is orthogonal to every predictor; the path is a point.
        return Ok(LarPath {
            mode,
            breakpoints,
            names,
            means: std.means,
            scales: std.scales,
            target_mean: std.target_mean,
        });
    }

    let max_steps = 10 * p + 50;
    for _ in 0..max_steps {
        let c = corr(&mu);
        let lambda = if active.is_empty() {
            c.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        } else {
            active.iter().map(|&j| c[j].abs()).fold(0.0f64, f64::max)
        };
        if lambda <= gamma_eps {
            break;
        }

        if !just_dropped && active.len() < p {
            // Admit the most-correlated inactive predictor (earliest on ties).
            let mut enter: Option<usize> = None;
            for j in 0..p {
                if active.contains(&j) {
                    continue;
                }
                if c[j].abs() >= lambda - gamma_eps
                    && enter.map_or(true, |e| c[j].abs() > c[e].abs() + 1e-15)
                {
                    enter = Some(j);
                }
            }
            if let Some(j) = enter {
                active.push(j);
            }
        }
        just_dropped = false;
        if active.is_empty() {
            break;
        }

        // Direction d with G d = sign(c_A): every active correlation then
        // shrinks at unit rate, so travel distance equals the drop in λ.
        let k = active.len();
        let mut g = Array2::zeros((k, k));
        for (ai, &i) in active.iter().enumerate() {
            for (aj, &j) in active.iter().enumerate() {
                g[(ai, aj)] = std.x.column(i).dot(&std.x.column(j));
            }
        }
        let mut s: Vec<f64> = active.iter().map(|&j| c[j].signum()).collect();
        let context: Vec<String> = active.iter().map(|&j| names[j].clone()).collect();
        let d = solve_dense(&mut g, &mut s, &context)?;

        let u: Array1<f64> = {
            let mut u = Array1::zeros(n);
            for (ai, &j) in active.iter().enumerate() {
                u = u + &std.x.column(j).to_owned() * d[ai];
            }
            u
        };

        // Distance to the next entry event, or to the unpenalized end.
        let mut gamma = lambda;
        for j in 0..p {
            if active.contains(&j) {
                continue;
            }
            let a_j = std.x.column(j).dot(&u);
            for (num, den) in [(lambda - c[j], 1.0 - a_j), (lambda + c[j], 1.0 + a_j)] {
                if den > 1e-12 && num > gamma_eps {
                    gamma = gamma.min(num / den);
                }
            }
        }

        // Lasso modification: stop early where a coefficient crosses zero.
        let mut drop_idx: Option<usize> = None;
        if mode == PathMode::Lasso {
            for (ai, &j) in active.iter().enumerate() {
                if d[ai] == 0.0 {
                    continue;
                }
                let cross = -beta[j] / d[ai];
                if cross > gamma_eps && cross < gamma - 1e-15 {
                    gamma = cross;
                    drop_idx = Some(ai);
                }
            }
        }

        for (ai, &j) in active.iter().enumerate() {
            beta[j] += gamma * d[ai];
        }
        mu = mu + &u * gamma;
        let new_lambda = (lambda - gamma).max(0.0);

        if let Some(ai) = drop_idx {
            beta[active[ai]] = 0.0;
            active.remove(ai);
            just_dropped = true;
        }

        breakpoints.push(Breakpoint {
            lambda: new_lambda,
            coefficients: beta.clone(),
            active_set: active.iter().map(|&j| names[j].clone()).collect(),
        });

        if new_lambda <= gamma_eps {
            break;
        }
    }

    let last = breakpoints.last().expect("non-empty path");
    if last.lambda > gamma_eps {
        return Err(Error::NonConvergence {
            what: "least-angle path".into(),
            iterations: max_steps,
            trace: Some(format!("stalled at lambda {}", last.lambda)),
        });
    }

    Ok(LarPath {
        mode,
        breakpoints,
        names,
        means: std.means,
        scales: std.scales,
        target_mean: std.target_mean,
    })
}

impl LarPath {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// λ at which the first predictor enters.
    pub fn entry_lambda(&self) -> f64 {
        self.breakpoints[0].lambda
    }

    fn solution_from_standardized(&self, std_coefs: Vec<f64>) -> LassoSolution {
        let mut intercept = self.target_mean;
        let mut coefficients = Vec::with_capacity(self.names.len());
        for (j, name) in self.names.iter().enumerate() {
            let original = std_coefs[j] / self.scales[j];
            intercept -= original * self.means[j];
            coefficients.push((name.clone(), original));
        }
        LassoSolution {
            intercept,
            coefficients,
            standardized: std_coefs,
        }
    }

    /// Coefficients at the given penalty, interpolated between breakpoints
    /// and mapped back to the original column scales. Penalties above the
    /// entry point give the all-zero model; below the path end, the
    /// unpenalized end of the path.
    pub fn coefficients_at(&self, lambda: f64) -> LassoSolution {
        let bps = &self.breakpoints;
        if lambda >= bps[0].lambda || bps.len() == 1 {
            return self.solution_from_standardized(bps[0].coefficients.clone());
        }
        if lambda <= bps[bps.len() - 1].lambda {
            return self.solution_from_standardized(bps[bps.len() - 1].coefficients.clone());
        }
        let mut hi = 0;
        while bps[hi + 1].lambda > lambda {
            hi += 1;
        }
        let (a, b) = (&bps[hi], &bps[hi + 1]);
        let span = a.lambda - b.lambda;
        let t = if span > 0.0 { (a.lambda - lambda) / span } else { 0.0 };
        let coefs: Vec<f64> = a
            .coefficients
            .iter()
            .zip(&b.coefficients)
            .map(|(ca, cb)| ca + t * (cb - ca))
            .collect();
        self.solution_from_standardized(coefs)
    }

    /// Largest violation of the penalized-objective stationarity conditions
    /// over all breakpoints: active coordinates must satisfy
    /// x_jᵀr = λ·sign(β_j), inactive ones |x_jᵀr| ≤ λ. Meaningful for
    /// lasso-mode paths (plain LAR does not solve the penalized objective
    /// once a sign crossing has occurred).
    pub fn max_kkt_violation(&self, dm: &DesignMatrix) -> Result<f64> {
        let std = standardize(dm)?;
        let mut worst = 0.0f64;
        for bp in &self.breakpoints {
            let mut r = std.y.clone();
            for (j, &b) in bp.coefficients.iter().enumerate() {
                if b != 0.0 {
                    r = r - &std.x.column(j).to_owned() * b;
                }
            }
            for j in 0..self.names.len() {
                let c_j = std.x.column(j).dot(&r);
                let b_j = bp.coefficients[j];
                let violation = if b_j != 0.0 {
                    (c_j - bp.lambda * b_j.signum()).abs()
                } else {
                    (c_j.abs() - bp.lambda).max(0.0)
                };
                worst = worst.max(violation);
            }
        }
        Ok(worst)
    }
}

/// Cyclic coordinate descent for ½‖y−Xβ‖² + λ‖β‖₁ on the standardized
/// problem; the independent cross-check for the path algorithm.
pub fn cd_lasso(dm: &DesignMatrix, lambda: f64) -> Result<LassoSolution> {
    if lambda < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "penalty must be >= 0, got {lambda}"
        )));
    }
    let std = standardize(dm)?;
    let p = dm.ncols();
    let n = dm.nrows() as f64;

    // Gram matrix and correlation vector once; each sweep is then O(p²).
    let mut gram = Array2::zeros((p, p));
    for i in 0..p {
        for j in i..p {
            let v = std.x.column(i).dot(&std.x.column(j));
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    let b: Vec<f64> = (0..p).map(|j| std.x.column(j).dot(&std.y)).collect();

    let soft = |v: f64, t: f64| -> f64 {
        if v > t {
            v - t
        } else if v < -t {
            v + t
        } else {
            0.0
        }
    };

    let mut beta = vec![0.0; p];
    let max_sweeps = 100_000;
    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut max_change = 0.0f64;
        for j in 0..p {
            let gb: f64 = (0..p).map(|k| gram[(j, k)] * beta[k]).sum();
            let rho = b[j] - gb + gram[(j, j)] * beta[j];
            let new = soft(rho, lambda) / gram[(j, j)];
            max_change = max_change.max((new - beta[j]).abs());
            beta[j] = new;
        }
        if max_change < 1e-10 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            what: "coordinate-descent lasso".into(),
            iterations: max_sweeps,
            trace: None,
        });
    }
    let _ = n;

    let mut intercept = std.target_mean;
    let mut coefficients = Vec::with_capacity(p);
    for (j, name) in dm.column_names().iter().enumerate() {
        let original = beta[j] / std.scales[j];
        intercept -= original * std.means[j];
        coefficients.push((name.clone(), original));
    }
    Ok(LassoSolution {
        intercept,
        coefficients,
        standardized: beta,
    })
}

/// Writes the path CSV: `step,lambda,active_set,l1_norm,coef_<name>...`,
/// with coefficients on the original scale and the L1 norm on the
/// standardized scale the path is computed on.
pub fn write_lar_path_csv<W: Write>(path: &LarPath, writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    let mut header = vec![
        "step".to_string(),
        "lambda".to_string(),
        "active_set".to_string(),
        "l1_norm".to_string(),
    ];
    header.extend(path.names().iter().map(|n| format!("coef_{n}")));
    out.write_record(&header)?;
    for (step, bp) in path.breakpoints.iter().enumerate() {
        let l1: f64 = bp.coefficients.iter().map(|v| v.abs()).sum();
        let mut rec = vec![
            step.to_string(),
            format!("{}", bp.lambda),
            bp.active_set.join("|"),
            format!("{l1}"),
        ];
        let sol = path.solution_from_standardized(bp.coefficients.clone());
        for (_, v) in &sol.coefficients {
            rec.push(format!("{v}"));
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}
