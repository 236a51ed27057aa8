//! Derivative-free minimization for the likelihood surfaces in this crate.
//!
//! A standard Nelder–Mead simplex with reflection, expansion, contraction,
//! and shrink steps. The likelihood objectives are smooth but their
//! gradients are awkward to derive through the filter recursions, and the
//! parameter counts are small (rarely above six), which is exactly the
//! regime where the simplex search is dependable.

pub(crate) struct MinimizeResult {
    pub x: Vec<f64>,
    pub value: f64,
}

/// Minimizes `f` starting from `x0`, with `step` controlling the initial
/// simplex spread. Runs until the simplex collapses (function spread below
/// `tol`) or the evaluation budget is spent, returning the best vertex seen.
pub(crate) fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: f64,
    max_evals: usize,
    tol: f64,
) -> MinimizeResult {
    let dim = x0.len();
    if dim == 0 {
        let value = f(x0);
        return MinimizeResult {
            x: Vec::new(),
            value,
        };
    }

    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let v0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), v0));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }

    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        if (worst - best).abs() <= tol * (1.0 + best.abs()) {
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; dim];
        for vertex in &simplex[..dim] {
            for (c, x) in centroid.iter_mut().zip(&vertex.0) {
                *c += x / dim as f64;
            }
        }

        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&simplex[dim].0)
            .map(|(c, w)| c + (c - w))
            .collect();
        let fr = eval(&reflect, &mut evals);

        if fr < simplex[0].1 {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&simplex[dim].0)
                .map(|(c, w)| c + 2.0 * (c - w))
                .collect();
            let fe = eval(&expand, &mut evals);
            simplex[dim] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflect, fr);
        } else {
            let contract: Vec<f64> = if fr < simplex[dim].1 {
                centroid
                    .iter()
                    .zip(&reflect)
                    .map(|(c, r)| c + 0.5 * (r - c))
                    .collect()
            } else {
                centroid
                    .iter()
                    .zip(&simplex[dim].0)
                    .map(|(c, w)| c + 0.5 * (w - c))
                    .collect()
            };
            let fc = eval(&contract, &mut evals);
            if fc < simplex[dim].1.min(fr) {
                simplex[dim] = (contract, fc);
            } else {
                // Shrink every vertex toward the best.
                let best_x = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    for (x, b) in vertex.0.iter_mut().zip(&best_x) {
                        *x = b + 0.5 * (*x - b);
                    }
                    vertex.1 = eval(&vertex.0.clone(), &mut evals);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    MinimizeResult {
        x: simplex[0].0.clone(),
        value: simplex[0].1,
    }
}
