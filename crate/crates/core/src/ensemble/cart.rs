//! Regression tree fit by greedy variance reduction.
//!
//! Each split maximizes the decrease in the residual sum of squares around
//! the leaf means, with the threshold placed at the midpoint between adjacent
//! sorted predictor values. Growth stops at a depth limit, a minimum leaf
//! size, or when no candidate split reduces the error. Split nodes record the
//! predictor by column name so a tree can score any design matrix that
//! carries the same columns, in any order.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::tsa::DesignMatrix;

/// One node of the tree, stored in an arena indexed by position.
#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf {
        value: f64,
        count: usize,
    },
    Split {
        column: String,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A fitted regression tree with named split columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CartTree {
    nodes: Vec<Node>,
    root: usize,
    max_depth: usize,
    min_leaf: usize,
}

/// Relative tolerance below which a split's error reduction counts as zero.
const GAIN_TOL: f64 = 1e-12;

impl CartTree {
    /// Default depth limit; weekly housing series are short, deep trees memorize.
    pub const DEFAULT_MAX_DEPTH: usize = 6;
    /// Default minimum number of training rows per leaf.
    pub const DEFAULT_MIN_LEAF: usize = 5;

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn min_leaf(&self) -> usize {
        self.min_leaf
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Height of the tree: 0 for a single leaf.
    pub fn depth(&self) -> usize {
        self.node_depth(self.root)
    }

    fn node_depth(&self, idx: usize) -> usize {
        match &self.nodes[idx] {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => {
                1 + self.node_depth(*left).max(self.node_depth(*right))
            }
        }
    }

    /// The root split as (column, threshold), or None for a single-leaf tree.
    pub fn root_split(&self) -> Option<(&str, f64)> {
        match &self.nodes[self.root] {
            Node::Leaf { .. } => None,
            Node::Split {
                column, threshold, ..
            } => Some((column.as_str(), *threshold)),
        }
    }

    /// Predicts the target for every row of the design matrix.
    ///
    /// Split columns are matched by name, so the matrix may carry extra
    /// columns or a different column order than the training data.
    pub fn predict(&self, dm: &DesignMatrix) -> Result<Vec<f64>> {
        // Resolve every split column once up front.
        let mut column_of = vec![usize::MAX; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            if let Node::Split { column, .. } = node {
                column_of[i] = dm
                    .column_index(column)
                    .ok_or_else(|| Error::MissingColumn(column.clone()))?;
            }
        }
        let x = dm.x();
        let mut out = Vec::with_capacity(dm.nrows());
        for i in 0..dm.nrows() {
            let mut idx = self.root;
            loop {
                match &self.nodes[idx] {
                    Node::Leaf { value, .. } => {
                        out.push(*value);
                        break;
                    }
                    Node::Split {
                        threshold,
                        left,
                        right,
                        ..
                    } => {
                        idx = if x[(i, column_of[idx])] <= *threshold {
                            *left
                        } else {
                            *right
                        };
                    }
                }
            }
        }
        Ok(out)
    }

    /// Leaf index and training-row count for each leaf, in arena order.
    pub fn leaf_counts(&self) -> Vec<(usize, usize)> {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| match n {
                Node::Leaf { count, .. } => Some((i, *count)),
                Node::Split { .. } => None,
            })
            .collect()
    }

    /// Serializes the tree to its JSON artifact.
    pub fn to_artifact(&self) -> Value {
        let mut obj = serde_json::Map::new();
        obj.insert("model".into(), json!("cart"));
        obj.insert("max_depth".into(), json!(self.max_depth));
        obj.insert("min_leaf".into(), json!(self.min_leaf));
        obj.insert("tree".into(), self.node_value(self.root));
        Value::Object(obj)
    }

    fn node_value(&self, idx: usize) -> Value {
        match &self.nodes[idx] {
            Node::Leaf { value, count } => json!({ "value": value, "count": count }),
            Node::Split {
                column,
                threshold,
                left,
                right,
            } => {
                let mut obj = serde_json::Map::new();
                obj.insert("column".into(), json!(column));
                obj.insert("threshold".into(), json!(threshold));
                obj.insert("left".into(), self.node_value(*left));
                obj.insert("right".into(), self.node_value(*right));
                Value::Object(obj)
            }
        }
    }

    /// Rebuilds a tree from its JSON artifact.
    pub fn from_artifact(v: &Value) -> Result<CartTree> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Artifact("cart artifact is not an object".into()))?;
        if obj.get("model").and_then(Value::as_str) != Some("cart") {
            return Err(Error::Artifact("cart artifact has wrong 'model' tag".into()));
        }
        let usize_field = |key: &str| -> Result<usize> {
            obj.get(key)
                .and_then(Value::as_u64)
                .map(|v| v as usize)
                .ok_or_else(|| Error::Artifact(format!("missing integer field '{key}'")))
        };
        let tree = obj
            .get("tree")
            .ok_or_else(|| Error::Artifact("missing 'tree' field".into()))?;
        let mut nodes = Vec::new();
        let root = parse_node(tree, &mut nodes)?;
        Ok(CartTree {
            nodes,
            root,
            max_depth: usize_field("max_depth")?,
            min_leaf: usize_field("min_leaf")?,
        })
    }
}

fn parse_node(v: &Value, nodes: &mut Vec<Node>) -> Result<usize> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Artifact("tree node is not an object".into()))?;
    if let Some(value) = obj.get("value") {
        let value = value
            .as_f64()
            .ok_or_else(|| Error::Artifact("leaf 'value' not numeric".into()))?;
        let count = obj
            .get("count")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Artifact("leaf 'count' not an integer".into()))?;
        nodes.push(Node::Leaf {
            value,
            count: count as usize,
        });
        return Ok(nodes.len() - 1);
    }
    let column = obj
        .get("column")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Artifact("split 'column' not a string".into()))?
        .to_string();
    let threshold = obj
        .get("threshold")
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::Artifact("split 'threshold' not numeric".into()))?;
    let left_v = obj
        .get("left")
        .ok_or_else(|| Error::Artifact("split missing 'left'".into()))?;
    let right_v = obj
        .get("right")
        .ok_or_else(|| Error::Artifact("split missing 'right'".into()))?;
    let slot = nodes.len();
    nodes.push(Node::Leaf {
        value: 0.0,
        count: 0,
    });
    let left = parse_node(left_v, nodes)?;
    let right = parse_node(right_v, nodes)?;
    nodes[slot] = Node::Split {
        column,
        threshold,
        left,
        right,
    };
    Ok(slot)
}

/// Fits a regression tree by recursive greedy variance-reduction splitting.
///
/// A node becomes a leaf when it reaches `max_depth`, holds fewer than
/// `2 * min_leaf` rows, or when no threshold reduces the sum of squared
/// errors. Thresholds sit at the midpoint between adjacent distinct sorted
/// values, so both children always satisfy the leaf-size floor.
pub fn fit_cart(dm: &DesignMatrix, max_depth: usize, min_leaf: usize) -> Result<CartTree> {
    if dm.nrows() == 0 {
        return Err(Error::InvalidArgument(
            "cannot fit a tree on an empty design matrix".into(),
        ));
    }
    if min_leaf == 0 {
        return Err(Error::InvalidArgument("min_leaf must be at least 1".into()));
    }
    let mut builder = Builder {
        dm,
        min_leaf,
        max_depth,
        nodes: Vec::new(),
    };
    let rows: Vec<usize> = (0..dm.nrows()).collect();
    let root = builder.build(rows, 0);
    Ok(CartTree {
        nodes: builder.nodes,
        root,
        max_depth,
        min_leaf,
    })
}

struct Builder<'a> {
    dm: &'a DesignMatrix,
    min_leaf: usize,
    max_depth: usize,
    nodes: Vec<Node>,
}

struct BestSplit {
    column: usize,
    threshold: f64,
    gain: f64,
    /// Row indices of the left child, sorted order preserved.
    left_rows: Vec<usize>,
    right_rows: Vec<usize>,
}

impl Builder<'_> {
    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let y = self.dm.target();
        let n = rows.len() as f64;
        let sum: f64 = rows.iter().map(|&i| y[i]).sum();
        let mean = sum / n;
        let sse: f64 = rows.iter().map(|&i| (y[i] - mean).powi(2)).sum();

        let split = if depth < self.max_depth && rows.len() >= 2 * self.min_leaf {
            self.best_split(&rows, sse)
        } else {
            None
        };
        match split {
            None => {
                self.nodes.push(Node::Leaf {
                    value: mean,
                    count: rows.len(),
                });
                self.nodes.len() - 1
            }
            Some(best) => {
                let slot = self.nodes.len();
                self.nodes.push(Node::Leaf {
                    value: 0.0,
                    count: 0,
                });
                let left = self.build(best.left_rows, depth + 1);
                let right = self.build(best.right_rows, depth + 1);
                let column = self.dm.column_names()[best.column].clone();
                self.nodes[slot] = Node::Split {
                    column,
                    threshold: best.threshold,
                    left,
                    right,
                };
                slot
            }
        }
    }

    /// Scans every column and eligible cut position for the largest drop in
    /// the sum of squared errors. Ties keep the first candidate encountered
    /// (lowest column index, then lowest threshold), so fits are
    /// deterministic.
    fn best_split(&self, rows: &[usize], sse_parent: f64) -> Option<BestSplit> {
        let x = self.dm.x();
        let y = self.dm.target();
        let n = rows.len();
        let sum_tot: f64 = rows.iter().map(|&i| y[i]).sum();
        let sq_tot: f64 = rows.iter().map(|&i| y[i] * y[i]).sum();
        let mut best: Option<BestSplit> = None;
        let mut order = rows.to_vec();
        for j in 0..self.dm.ncols() {
            order.sort_unstable_by(|&a, &b| x[(a, j)].total_cmp(&x[(b, j)]));
            let mut sum_left = 0.0;
            let mut sq_left = 0.0;
            for k in 1..n {
                let yi = y[order[k - 1]];
                sum_left += yi;
                sq_left += yi * yi;
                if k < self.min_leaf || n - k < self.min_leaf {
                    continue;
                }
                let xl = x[(order[k - 1], j)];
                let xr = x[(order[k], j)];
                if !(xr > xl) {
                    continue;
                }
                let nl = k as f64;
                let nr = (n - k) as f64;
                let sse_l = sq_left - sum_left * sum_left / nl;
                let sum_right = sum_tot - sum_left;
                let sse_r = (sq_tot - sq_left) - sum_right * sum_right / nr;
                let gain = sse_parent - sse_l - sse_r;
                if gain <= GAIN_TOL * (1.0 + sse_parent) {
                    continue;
                }
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    // Midpoint, nudged back onto the left value if the gap is
                    // below float resolution so the training partition and the
                    // `x <= threshold` prediction rule agree.
                    let mut threshold = xl + (xr - xl) / 2.0;
                    if threshold >= xr {
                        threshold = xl;
                    }
                    best = Some(BestSplit {
                        column: j,
                        threshold,
                        gain,
                        left_rows: order[..k].to_vec(),
                        right_rows: order[k..].to_vec(),
                    });
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::{self, ols_fit};
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn matrix_from(cols: Vec<(&str, Vec<f64>)>, target: Vec<f64>) -> DesignMatrix {
        let n = target.len();
        let mut x = Array2::zeros((n, cols.len()));
        let mut names = Vec::new();
        for (j, (name, col)) in cols.iter().enumerate() {
            names.push(name.to_string());
            for i in 0..n {
                x[(i, j)] = col[i];
            }
        }
        DesignMatrix::new(names, x, target).unwrap()
    }

    fn mse(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            / a.len() as f64
    }

    #[test]
    fn constant_target_gives_single_leaf() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let dm = matrix_from(vec![("x0", x)], vec![3.25; 20]);
        let tree = fit_cart(&dm, 6, 1).unwrap();
        assert_eq!(tree.n_nodes(), 1);
        assert_eq!(tree.depth(), 0);
        let pred = tree.predict(&dm).unwrap();
        assert!(pred.iter().all(|&p| p == 3.25));
    }

    #[test]
    fn step_function_splits_at_the_boundary() {
        let n = 100;
        let x: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| if v < 0.37 { 1.0 } else { 4.0 }).collect();
        let dm = matrix_from(vec![("x0", x)], y.clone());
        let tree = fit_cart(&dm, 6, 5).unwrap();
        let (col, threshold) = tree.root_split().expect("tree should split");
        assert_eq!(col, "x0");
        // The step sits between grid values 0.36 and 0.37; the midpoint
        // threshold must land within one grid cell of it.
        assert!((threshold - 0.365).abs() < 0.011, "threshold {threshold}");
        let pred = tree.predict(&dm).unwrap();
        assert!(mse(&pred, &y) < 1e-20);
    }

    #[test]
    fn unlimited_tree_fits_training_data_below_ols_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 80;
        let x0: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let x1: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = x0
            .iter()
            .zip(&x1)
            .map(|(&a, &b)| (3.0 * a).sin() + b * b + 0.1 * rng.random_range(-1.0..1.0))
            .collect();
        let dm = matrix_from(vec![("x0", x0), ("x1", x1)], y.clone());
        let tree = fit_cart(&dm, 64, 1).unwrap();
        let tree_pred = tree.predict(&dm).unwrap();
        let ols = ols_fit(&dm).unwrap();
        let ols_pred = linear::predict(&ols, &dm).unwrap();
        assert!(mse(&tree_pred, &y) <= mse(&ols_pred, &y));
        // Distinct predictor values let the tree isolate every row exactly.
        assert!(mse(&tree_pred, &y) < 1e-18);
    }

    #[test]
    fn depth_limit_bounds_the_tree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 60;
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let y: Vec<f64> = x.iter().map(|&v| v + 0.05 * rng.random_range(-1.0..1.0)).collect();
        let dm = matrix_from(vec![("x0", x)], y);
        let flat = fit_cart(&dm, 0, 1).unwrap();
        assert_eq!(flat.n_nodes(), 1);
        let shallow = fit_cart(&dm, 1, 1).unwrap();
        assert!(shallow.depth() <= 1);
        assert!(shallow.n_nodes() <= 3);
        let deep = fit_cart(&dm, 6, 1).unwrap();
        assert!(deep.depth() <= 6);
    }

    #[test]
    fn leaves_hold_at_least_min_leaf_rows_and_their_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 90;
        let x0: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x1: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = x0
            .iter()
            .zip(&x1)
            .map(|(&a, &b)| a * b + 0.2 * rng.random_range(-1.0..1.0))
            .collect();
        let dm = matrix_from(vec![("x0", x0), ("x1", x1)], y.clone());
        let min_leaf = 5;
        let tree = fit_cart(&dm, 6, min_leaf).unwrap();
        assert!(tree.depth() >= 1, "data should admit at least one split");

        // Route every training row to its leaf by matching predictions to
        // leaf values, then audit size and mean per leaf.
        let pred = tree.predict(&dm).unwrap();
        for (leaf_idx, count) in tree.leaf_counts() {
            let Node::Leaf { value, .. } = &tree.nodes[leaf_idx] else {
                unreachable!()
            };
            let value = *value;
            let members: Vec<usize> = (0..n).filter(|&i| pred[i] == value).collect();
            assert!(count >= min_leaf, "leaf with {count} rows");
            assert_eq!(members.len(), count);
            let mean = members.iter().map(|&i| y[i]).sum::<f64>() / count as f64;
            assert!((mean - value).abs() <= 1e-12 * (1.0 + value.abs()));
        }
    }

    #[test]
    fn predictions_are_invariant_under_monotone_predictor_transforms() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let n = 70;
        let x0: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..3.0)).collect();
        let x1: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = x0
            .iter()
            .zip(&x1)
            .map(|(&a, &b)| a.ln() + b + 0.1 * rng.random_range(-1.0..1.0))
            .collect();
        let squared: Vec<f64> = x0.iter().map(|&v| v * v).collect();
        let dm = matrix_from(vec![("x0", x0), ("x1", x1.clone())], y.clone());
        let dm_sq = matrix_from(vec![("x0", squared), ("x1", x1)], y);
        let tree = fit_cart(&dm, 6, 5).unwrap();
        let tree_sq = fit_cart(&dm_sq, 6, 5).unwrap();
        // Squaring a positive column preserves row order within it, so the
        // chosen partitions and leaf means coincide exactly.
        assert_eq!(tree.predict(&dm).unwrap(), tree_sq.predict(&dm_sq).unwrap());
    }

    #[test]
    fn missing_column_is_reported_by_name() {
        let x: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| if v < 15.0 { 0.0 } else { 1.0 }).collect();
        let dm = matrix_from(vec![("x0", x.clone())], y.clone());
        let tree = fit_cart(&dm, 6, 5).unwrap();
        let other = matrix_from(vec![("z", x)], y);
        match tree.predict(&other) {
            Err(Error::MissingColumn(name)) => assert_eq!(name, "x0"),
            other => panic!("expected MissingColumn, got {other:?}"),
        }
    }

    #[test]
    fn artifact_round_trip_preserves_predictions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 60;
        let x0: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = x0
            .iter()
            .map(|&a| a.abs() + 0.1 * rng.random_range(-1.0..1.0))
            .collect();
        let dm = matrix_from(vec![("x0", x0)], y);
        let tree = fit_cart(&dm, 6, 5).unwrap();
        let artifact = tree.to_artifact();
        assert_eq!(artifact["model"], "cart");
        let text = serde_json::to_string(&artifact).unwrap();
        let back = CartTree::from_artifact(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, tree);
        assert_eq!(back.predict(&dm).unwrap(), tree.predict(&dm).unwrap());
    }

    #[test]
    fn zero_min_leaf_is_rejected() {
        let dm = matrix_from(vec![("x0", vec![1.0, 2.0])], vec![0.0, 1.0]);
        assert!(matches!(
            fit_cart(&dm, 6, 0),
            Err(Error::InvalidArgument(_))
        ));
    }
}
