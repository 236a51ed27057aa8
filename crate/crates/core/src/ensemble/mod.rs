//! Fixed-weight ensemble of the linear, tree, and network models.
//!
//! The ensemble predicts a convex combination of three sub-model outputs on
//! the transformed demand scale: `w_lr·linear + w_cart·tree + w_nn·network`,
//! with default weights (0.15, 0.05, 0.80). Weights can optionally be tuned
//! by exhaustive search over a simplex lattice, maximizing fit on a held-out
//! target; ties go to the triple closest to the default.

mod cart;
mod mlp;

pub use cart::{fit_cart, CartTree};
pub use mlp::{fit_mlp, mlp_loss_and_gradient, mlp_param_count, MlpModel, MlpParams};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linear::{self, LinearFit};
use crate::tsa::DesignMatrix;

/// Convex weights for the three sub-models, in (linear, tree, network) order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleWeights {
    pub linear: f64,
    pub cart: f64,
    pub mlp: f64,
}

impl Default for EnsembleWeights {
    fn default() -> Self {
        EnsembleWeights {
            linear: 0.15,
            cart: 0.05,
            mlp: 0.80,
        }
    }
}

impl EnsembleWeights {
    pub fn new(linear: f64, cart: f64, mlp: f64) -> Result<Self> {
        let w = EnsembleWeights { linear, cart, mlp };
        w.validate()?;
        Ok(w)
    }

    /// Weights must be non-negative and sum to one within 1e-12.
    pub fn validate(&self) -> Result<()> {
        for (name, w) in [
            ("linear", self.linear),
            ("cart", self.cart),
            ("mlp", self.mlp),
        ] {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} weight must be non-negative and finite, got {w}"
                )));
            }
        }
        let sum = self.linear + self.cart + self.mlp;
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "weights must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }

    /// Squared Euclidean distance to another weight triple.
    fn distance2(&self, other: &EnsembleWeights) -> f64 {
        (self.linear - other.linear).powi(2)
            + (self.cart - other.cart).powi(2)
            + (self.mlp - other.mlp).powi(2)
    }
}

/// The three fitted sub-models plus their combination weights.
#[derive(Debug, Clone)]
pub struct EnsembleModel {
    pub linear: LinearFit,
    pub cart: CartTree,
    pub mlp: MlpModel,
    pub weights: EnsembleWeights,
}

impl EnsembleModel {
    pub fn new(
        linear: LinearFit,
        cart: CartTree,
        mlp: MlpModel,
        weights: EnsembleWeights,
    ) -> Result<Self> {
        weights.validate()?;
        Ok(EnsembleModel {
            linear,
            cart,
            mlp,
            weights,
        })
    }

    /// Returns the same model with different combination weights.
    pub fn with_weights(mut self, weights: EnsembleWeights) -> Result<Self> {
        weights.validate()?;
        self.weights = weights;
        Ok(self)
    }

    /// Serializes the ensemble: the weight triple plus all three sub-model
    /// artifacts.
    pub fn to_artifact(&self) -> Value {
        let mut obj = serde_json::Map::new();
        obj.insert("model".into(), json!("ensemble"));
        obj.insert(
            "weights".into(),
            json!([self.weights.linear, self.weights.cart, self.weights.mlp]),
        );
        obj.insert("linear".into(), self.linear.to_artifact("linear"));
        obj.insert("cart".into(), self.cart.to_artifact());
        obj.insert("mlp".into(), self.mlp.to_artifact());
        Value::Object(obj)
    }

    pub fn from_artifact(v: &Value) -> Result<EnsembleModel> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Artifact("ensemble artifact is not an object".into()))?;
        if obj.get("model").and_then(Value::as_str) != Some("ensemble") {
            return Err(Error::Artifact(
                "ensemble artifact has wrong 'model' tag".into(),
            ));
        }
        let weights = obj
            .get("weights")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Artifact("missing 'weights' array".into()))?;
        let w: Vec<f64> = weights
            .iter()
            .map(|v| v.as_f64())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Artifact("non-numeric entry in 'weights'".into()))?;
        if w.len() != 3 {
            return Err(Error::Artifact(format!(
                "'weights' must have 3 entries, got {}",
                w.len()
            )));
        }
        let field = |key: &str| -> Result<&Value> {
            obj.get(key)
                .ok_or_else(|| Error::Artifact(format!("missing '{key}' artifact")))
        };
        EnsembleModel::new(
            LinearFit::from_artifact(field("linear")?)?,
            CartTree::from_artifact(field("cart")?)?,
            MlpModel::from_artifact(field("mlp")?)?,
            EnsembleWeights::new(w[0], w[1], w[2])?,
        )
    }
}

/// Fits all three sub-models on the same design matrix and combines them
/// with the default weights.
pub fn fit_ensemble(
    dm: &DesignMatrix,
    max_depth: usize,
    min_leaf: usize,
    mlp_params: MlpParams,
) -> Result<EnsembleModel> {
    let linear = linear::ols_fit(dm)?;
    let cart = fit_cart(dm, max_depth, min_leaf)?;
    let mlp = fit_mlp(dm, mlp_params)?;
    EnsembleModel::new(linear, cart, mlp, EnsembleWeights::default())
}

/// Elementwise convex combination of three prediction vectors.
pub fn combine_predictions(
    weights: &EnsembleWeights,
    linear: &[f64],
    cart: &[f64],
    mlp: &[f64],
) -> Result<Vec<f64>> {
    weights.validate()?;
    if linear.len() != cart.len() || linear.len() != mlp.len() {
        return Err(Error::InvalidArgument(format!(
            "prediction lengths differ: {} vs {} vs {}",
            linear.len(),
            cart.len(),
            mlp.len()
        )));
    }
    Ok((0..linear.len())
        .map(|i| weights.linear * linear[i] + weights.cart * cart[i] + weights.mlp * mlp[i])
        .collect())
}

/// Scores the ensemble on a design matrix: each sub-model predicts on its
/// own columns (matched by name) and the results are combined.
pub fn predict_ensemble(model: &EnsembleModel, dm: &DesignMatrix) -> Result<Vec<f64>> {
    let lr = linear::predict(&model.linear, dm)?;
    let tree = model.cart.predict(dm)?;
    let nn = model.mlp.predict(dm)?;
    combine_predictions(&model.weights, &lr, &tree, &nn)
}

/// Exhaustive weight search over the simplex lattice with the given step.
///
/// Every triple (i/m, j/m, 1-i/m-j/m) with `m = 1/grid_step` is scored
/// against the target by residual sum of squares, which ranks candidates
/// identically to R² or adjusted R² since the target and parameter count are
/// fixed. Ties within float resolution go to the triple closest to the
/// default weights.
pub fn tune_weights(
    linear: &[f64],
    cart: &[f64],
    mlp: &[f64],
    target: &[f64],
    grid_step: f64,
) -> Result<EnsembleWeights> {
    let n = target.len();
    if n == 0 {
        return Err(Error::InvalidArgument("target is empty".into()));
    }
    if linear.len() != n || cart.len() != n || mlp.len() != n {
        return Err(Error::InvalidArgument(format!(
            "prediction lengths ({}, {}, {}) must match the target length ({n})",
            linear.len(),
            cart.len(),
            mlp.len()
        )));
    }
    if !(grid_step > 0.0 && grid_step <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "grid step must lie in (0, 1], got {grid_step}"
        )));
    }
    let m = (1.0 / grid_step).round();
    if (m * grid_step - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "grid step {grid_step} does not divide 1"
        )));
    }
    let m = m as usize;
    let default = EnsembleWeights::default();
    let mut best: Option<(f64, f64, EnsembleWeights)> = None;
    for i in 0..=m {
        for j in 0..=(m - i) {
            let w_lr = i as f64 / m as f64;
            let w_cart = j as f64 / m as f64;
            let w_nn = (1.0 - w_lr - w_cart).max(0.0);
            let candidate = EnsembleWeights {
                linear: w_lr,
                cart: w_cart,
                mlp: w_nn,
            };
            let mut ss_res = 0.0;
            for k in 0..n {
                let pred = w_lr * linear[k] + w_cart * cart[k] + w_nn * mlp[k];
                ss_res += (target[k] - pred).powi(2);
            }
            let score = -ss_res;
            let dist = candidate.distance2(&default);
            let replace = match &best {
                None => true,
                Some((best_score, best_dist, _)) => {
                    let tol = 1e-12 * (1.0 + best_score.abs());
                    score > best_score + tol
                        || ((score - best_score).abs() <= tol && dist < best_dist - 1e-15)
                }
            };
            if replace {
                best = Some((score, dist, candidate));
            }
        }
    }
    Ok(best.expect("lattice is never empty").2)
}
